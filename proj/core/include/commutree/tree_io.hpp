#pragma once

#include <iosfwd>
#include <string>

#include "commutree/tree.hpp"

namespace commutree {

/// Canonical line-oriented text with hex floats; serialize(deserialize(s))
/// reproduces s byte for byte.
void serialize(std::ostream& os, const PartitionTree& tree);
std::string serialize(const PartitionTree& tree);

/// Throws FormatError (with a 1-based line number) on malformed input or
/// when child volumes do not add up to the parent volume.
PartitionTree deserialize(std::istream& is);
PartitionTree deserialize(const std::string& text);

void save_tree(const std::string& path, const PartitionTree& tree);
PartitionTree load_tree(const std::string& path);

}  // namespace commutree
