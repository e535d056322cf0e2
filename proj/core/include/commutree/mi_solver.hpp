#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "commutree/conic_solver.hpp"
#include "commutree/problem.hpp"

namespace commutree {

/// Commutations observed feasible somewhere, in insertion order.
/// Append-only; concurrent readers see a possibly stale snapshot.
class CommutationCache {
 public:
  struct Entry {
    Commutation delta;
    Point witness;
    std::size_t hits = 0;
  };

  /// Adds delta (with a feasible witness) if new, otherwise bumps its hits.
  void record(const Commutation& delta, const Point& witness);
  void record_hit(const Commutation& delta);
  std::vector<Commutation> snapshot() const;
  std::vector<Entry> entries() const;
  bool contains(const Commutation& delta) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<Entry> entries_;
  std::map<Commutation, std::size_t> index_;
};

enum class MinlpStatus { Optimal, Infeasible, Exhausted };

const char* to_string(MinlpStatus s);

enum class MinlpBackend { Auto, Enumeration, BranchAndBound };

struct MinlpOptions {
  MinlpBackend backend = MinlpBackend::Auto;
  /// Auto switches to branch-and-bound above this many admissible
  /// commutations (when an affine encoding exists); enumeration stops with
  /// Exhausted after this many candidates.
  std::uint64_t enumeration_budget = std::uint64_t{1} << 22;
  bool memoize = true;
  SolverSettings solver;
};

struct MinlpResult {
  MinlpStatus status = MinlpStatus::Infeasible;
  SolveOutcome outcome;
  Commutation delta;
  /// Best known value for the rest: optimal value when Optimal.
  double value() const { return outcome.value; }
};

struct CommonFeasibleResult {
  MinlpStatus status = MinlpStatus::Infeasible;
  Commutation delta;
  /// One outcome per vertex for delta, when found.
  std::vector<SolveOutcome> vertex_outcomes;
};

/// Fixed-commutation solves with memoization and the mixed-integer searches
/// built on them. Thread safe.
class MixedIntegerOracle {
 public:
  /// Keeps a reference to prog, which must outlive the oracle.
  explicit MixedIntegerOracle(const ParametricProgram& prog, MinlpOptions opts = {});
  MixedIntegerOracle(ParametricProgram&&, MinlpOptions = {}) = delete;

  const ParametricProgram& program() const { return *prog_; }
  const MinlpOptions& options() const { return opts_; }
  CommutationCache& cache() { return cache_; }
  const CommutationCache& cache() const { return cache_; }

  /// (P_theta^delta); feasible results are recorded in the cache.
  SolveOutcome solve_fixed(const Point& theta, const Commutation& delta);

  /// (P_theta): min over admissible delta.
  MinlpResult solve_minlp(const Point& theta);

  /// Any feasible delta at theta; cache first, then search order.
  MinlpResult find_feasible(const Point& theta);

  /// (V^R): one delta != exclude feasible at every vertex column.
  CommonFeasibleResult find_common_feasible(const Eigen::MatrixXd& vertices,
                                            const std::optional<Commutation>& exclude = {});

  /// All admissible commutations (materialized on first call); nullptr when
  /// the count exceeds the enumeration budget.
  const std::vector<Commutation>* admissible();

  bool uses_branch_and_bound() const;

  std::uint64_t solve_count() const;
  std::uint64_t memo_hits() const;

 private:
  struct Key {
    std::vector<std::uint64_t> theta_bits;
    Commutation delta;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  MinlpResult minlp_enumerate(const Point& theta, bool first_feasible);
  CommonFeasibleResult common_enumerate(const Eigen::MatrixXd& vertices,
                                        const std::optional<Commutation>& exclude);
  /// Checks delta at all vertices with early abort.
  bool feasible_at_all(const Eigen::MatrixXd& vertices, const Commutation& delta,
                       std::vector<SolveOutcome>* outcomes);

  const ParametricProgram* prog_;
  MinlpOptions opts_;
  CommutationCache cache_;

  mutable std::mutex memo_mu_;
  std::unordered_map<Key, SolveOutcome, KeyHash> memo_;
  std::uint64_t solves_ = 0;
  std::uint64_t memo_hits_ = 0;

  std::once_flag admissible_once_;
  std::optional<std::vector<Commutation>> admissible_;
};

/// Convenience wrappers on a fresh oracle.
MinlpResult solve_minlp(const ParametricProgram& prog, const Point& theta,
                        const MinlpOptions& opts = {});
CommonFeasibleResult find_common_feasible_commutation(
    const ParametricProgram& prog, const Eigen::MatrixXd& vertices,
    const std::optional<Commutation>& exclude = {}, const MinlpOptions& opts = {});

namespace detail {

/// Best-first branch-and-bound over the affine-in-delta encoding. With one
/// point column it minimizes; with several it searches for a delta feasible
/// at all of them (objective zero). Incumbent candidates are tried first.
struct BnbResult {
  MinlpStatus status = MinlpStatus::Infeasible;
  Commutation delta;
  int nodes = 0;
};

BnbResult branch_and_bound(const ParametricProgram& prog, const Eigen::MatrixXd& points,
                           bool minimize, const std::optional<Commutation>& exclude,
                           const std::vector<Commutation>& seeds, const SolverSettings& solver,
                           const std::function<SolveOutcome(const Point&, const Commutation&)>& fixed,
                           std::uint64_t node_budget);

}  // namespace detail

}  // namespace commutree
