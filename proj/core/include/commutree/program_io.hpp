#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commutree/geometry.hpp"
#include "commutree/problem.hpp"

namespace commutree {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// A program together with its parameter set and free-form metadata.
struct ProblemInstance {
  std::optional<ParametricProgram> program;
  Polytope theta;
  Metadata meta;

  /// Value of the first matching key, if any.
  std::optional<std::string> find_meta(const std::string& key) const;
};

/// Sectioned text with hex floats. Only table and affine encodings can be
/// written; black-box data maps throw InvalidInput.
void write_instance(std::ostream& os, const ParametricProgram& prog, const Polytope& theta,
                    const Metadata& meta = {});
std::string write_instance(const ParametricProgram& prog, const Polytope& theta,
                           const Metadata& meta = {});

/// Throws FormatError with a 1-based line number.
ProblemInstance read_instance(std::istream& is);
ProblemInstance read_instance(const std::string& text);

void save_instance(const std::string& path, const ParametricProgram& prog, const Polytope& theta,
                   const Metadata& meta = {});
ProblemInstance load_instance(const std::string& path);

}  // namespace commutree
