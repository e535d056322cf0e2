#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "commutree/tree.hpp"

namespace commutree {

/// One row of the convergence log.
struct PartitionEvent {
  std::size_t iteration = 0;
  double t_wall = 0.0;
  std::string action;
  double cell_volume = 0.0;
  double closed_fraction = 0.0;
  NodeId node = kNoNode;
};

using EventSink = std::function<void(const PartitionEvent&)>;

/// Columns: iter,t_wall,action,cell_volume,closed_fraction.
void write_events_csv(std::ostream& os, const std::vector<PartitionEvent>& events);
std::vector<PartitionEvent> read_events_csv(std::istream& is);

}  // namespace commutree
