#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "commutree/problem.hpp"

namespace commutree {

/// Walks admissible commutations in a fixed order. With disjoint one-hot
/// groups the space is the product of group sizes times 2^(free bits); the
/// walk is an odometer over these units ordered by their first bit, with the
/// last unit varying fastest. Table programs walk their table in key order.
class CommutationEnumerator {
 public:
  explicit CommutationEnumerator(const ParametricProgram& prog);

  std::optional<Commutation> next();
  void reset();

  /// Number of admissible commutations, saturated at UINT64_MAX.
  std::uint64_t count() const { return count_; }

 private:
  struct Unit {
    std::vector<int> bits;  // one-hot group, or a single free bit
    bool one_hot = false;
    int radix() const { return one_hot ? static_cast<int>(bits.size()) : 2; }
  };

  Commutation decode() const;
  bool advance();

  const ParametricProgram* prog_;
  std::vector<Unit> units_;
  std::vector<int> digits_;
  std::vector<Commutation> table_keys_;
  std::size_t table_pos_ = 0;
  bool brute_force_ = false;
  std::uint64_t brute_next_ = 0;
  bool started_ = false;
  bool done_ = false;
  std::uint64_t count_ = 0;
};

/// Materializes the first `limit` admissible commutations.
std::vector<Commutation> admissible_commutations(const ParametricProgram& prog,
                                                 std::size_t limit = SIZE_MAX);

}  // namespace commutree
