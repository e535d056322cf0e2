#include "commutree/events.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "commutree/errors.hpp"

namespace commutree {

void write_events_csv(std::ostream& os, const std::vector<PartitionEvent>& events) {
  os << "iter,t_wall,action,cell_volume,closed_fraction\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& e : events) {
    row.str("");
    row << e.iteration << ',' << e.t_wall << ',' << e.action << ',' << e.cell_volume << ','
        << e.closed_fraction << '\n';
    os << row.str();
  }
}

std::vector<PartitionEvent> read_events_csv(std::istream& is) {
  std::vector<PartitionEvent> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::istringstream ss(line);
    std::string f[5];
    for (auto& s : f)
      if (!std::getline(ss, s, ',')) throw FormatError(lineno, "event row needs 5 columns");
    try {
      PartitionEvent e;
      e.iteration = std::stoull(f[0]);
      e.t_wall = std::stod(f[1]);
      e.action = f[2];
      e.cell_volume = std::stod(f[3]);
      e.closed_fraction = std::stod(f[4]);
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw FormatError(lineno, "bad event row");
    }
  }
  return out;
}

}  // namespace commutree
