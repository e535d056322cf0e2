#include "commutree/mi_solver.hpp"

#include <cstring>
#include <set>

#include "commutree/enumeration.hpp"
#include "commutree/errors.hpp"

namespace commutree {

const char* to_string(MinlpStatus s) {
  switch (s) {
    case MinlpStatus::Optimal: return "optimal";
    case MinlpStatus::Infeasible: return "infeasible";
    case MinlpStatus::Exhausted: return "exhausted";
  }
  return "?";
}

void CommutationCache::record(const Commutation& delta, const Point& witness) {
  std::unique_lock lock(mu_);
  auto it = index_.find(delta);
  if (it != index_.end()) {
    ++entries_[it->second].hits;
    return;
  }
  index_.emplace(delta, entries_.size());
  entries_.push_back({delta, witness, 1});
}

void CommutationCache::record_hit(const Commutation& delta) {
  std::unique_lock lock(mu_);
  auto it = index_.find(delta);
  if (it != index_.end()) ++entries_[it->second].hits;
}

std::vector<Commutation> CommutationCache::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<Commutation> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.delta);
  return out;
}

std::vector<CommutationCache::Entry> CommutationCache::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

bool CommutationCache::contains(const Commutation& delta) const {
  std::shared_lock lock(mu_);
  return index_.count(delta) > 0;
}

std::size_t CommutationCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::size_t MixedIntegerOracle::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (auto b : k.theta_bits) mix(b);
  for (auto b : k.delta.bits()) mix(b);
  return static_cast<std::size_t>(h);
}

MixedIntegerOracle::MixedIntegerOracle(const ParametricProgram& prog, MinlpOptions opts)
    : prog_(&prog), opts_(opts) {}

bool MixedIntegerOracle::uses_branch_and_bound() const {
  if (opts_.backend == MinlpBackend::BranchAndBound) return prog_->mixed().has_value();
  if (opts_.backend == MinlpBackend::Enumeration) return false;
  if (!prog_->mixed()) return false;
  return CommutationEnumerator(*prog_).count() > opts_.enumeration_budget;
}

const std::vector<Commutation>* MixedIntegerOracle::admissible() {
  std::call_once(admissible_once_, [this] {
    CommutationEnumerator it(*prog_);
    if (it.count() <= opts_.enumeration_budget) admissible_ = admissible_commutations(*prog_);
  });
  return admissible_ ? &*admissible_ : nullptr;
}

std::uint64_t MixedIntegerOracle::solve_count() const {
  std::lock_guard lock(memo_mu_);
  return solves_;
}

std::uint64_t MixedIntegerOracle::memo_hits() const {
  std::lock_guard lock(memo_mu_);
  return memo_hits_;
}

SolveOutcome MixedIntegerOracle::solve_fixed(const Point& theta, const Commutation& delta) {
  Key key;
  if (opts_.memoize) {
    key.theta_bits.resize(theta.size());
    std::memcpy(key.theta_bits.data(), theta.data(), sizeof(double) * theta.size());
    key.delta = delta;
    std::lock_guard lock(memo_mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++memo_hits_;
      return it->second;
    }
  }
  SolveOutcome out = solve_fixed_commutation(*prog_, theta, delta, opts_.solver);
  if (out.status == SolveStatus::NumericalFailure) {
    // One retry with the other scaling path before giving up.
    SolverSettings alt = opts_.solver;
    alt.equilibrate = !alt.equilibrate;
    SolveOutcome retry = solve_fixed_commutation(*prog_, theta, delta, alt);
    if (retry.status != SolveStatus::NumericalFailure) out = std::move(retry);
  }
  if (out.optimal()) cache_.record(delta, theta);
  std::lock_guard lock(memo_mu_);
  ++solves_;
  if (opts_.memoize) memo_.emplace(std::move(key), out);
  return out;
}

MinlpResult MixedIntegerOracle::minlp_enumerate(const Point& theta, bool first_feasible) {
  MinlpResult best;
  best.status = MinlpStatus::Infeasible;
  std::set<Commutation> tried;
  std::uint64_t evaluated = 0;
  auto consider = [&](const Commutation& d) {
    if (!tried.insert(d).second) return false;
    ++evaluated;
    SolveOutcome o = solve_fixed(theta, d);
    if (!o.optimal()) return false;
    if (best.status != MinlpStatus::Optimal || o.value < best.outcome.value) {
      best.status = MinlpStatus::Optimal;
      best.outcome = std::move(o);
      best.delta = d;
    }
    return first_feasible;
  };
  for (const auto& d : cache_.snapshot()) {
    if (!prog_->admissible(d)) continue;
    if (consider(d)) return best;
  }
  CommutationEnumerator it(*prog_);
  while (auto d = it.next()) {
    if (evaluated >= opts_.enumeration_budget && !tried.count(*d)) {
      if (best.status != MinlpStatus::Optimal || !first_feasible) best.status = MinlpStatus::Exhausted;
      return best;
    }
    if (consider(*d)) return best;
  }
  return best;
}

MinlpResult MixedIntegerOracle::solve_minlp(const Point& theta) {
  if (!theta.allFinite()) throw InvalidInput("theta must be finite");
  if (!uses_branch_and_bound()) return minlp_enumerate(theta, false);
  auto fixed = [this](const Point& t, const Commutation& d) { return solve_fixed(t, d); };
  auto bnb = detail::branch_and_bound(*prog_, theta, true, std::nullopt, cache_.snapshot(),
                                      opts_.solver, fixed, opts_.enumeration_budget);
  MinlpResult r;
  r.status = bnb.status;
  if (bnb.status == MinlpStatus::Optimal) {
    r.delta = bnb.delta;
    r.outcome = solve_fixed(theta, bnb.delta);
  }
  return r;
}

MinlpResult MixedIntegerOracle::find_feasible(const Point& theta) {
  if (!theta.allFinite()) throw InvalidInput("theta must be finite");
  if (!uses_branch_and_bound()) return minlp_enumerate(theta, true);
  CommonFeasibleResult c = find_common_feasible(theta, std::nullopt);
  MinlpResult r;
  r.status = c.status;
  if (c.status == MinlpStatus::Optimal) {
    r.delta = c.delta;
    r.outcome = c.vertex_outcomes.front();
  }
  return r;
}

bool MixedIntegerOracle::feasible_at_all(const Eigen::MatrixXd& vertices, const Commutation& delta,
                                         std::vector<SolveOutcome>* outcomes) {
  if (outcomes) outcomes->clear();
  for (int k = 0; k < vertices.cols(); ++k) {
    SolveOutcome o = solve_fixed(vertices.col(k), delta);
    if (!o.optimal()) return false;
    if (outcomes) outcomes->push_back(std::move(o));
  }
  return true;
}

CommonFeasibleResult MixedIntegerOracle::common_enumerate(const Eigen::MatrixXd& vertices,
                                                          const std::optional<Commutation>& exclude) {
  CommonFeasibleResult res;
  std::set<Commutation> tried;
  if (exclude) tried.insert(*exclude);
  std::uint64_t evaluated = 0;
  auto consider = [&](const Commutation& d) {
    if (!tried.insert(d).second) return false;
    ++evaluated;
    if (!feasible_at_all(vertices, d, &res.vertex_outcomes)) return false;
    res.status = MinlpStatus::Optimal;
    res.delta = d;
    cache_.record_hit(d);
    return true;
  };
  for (const auto& d : cache_.snapshot()) {
    if (!prog_->admissible(d)) continue;
    if (consider(d)) return res;
  }
  CommutationEnumerator it(*prog_);
  while (auto d = it.next()) {
    if (evaluated >= opts_.enumeration_budget && !tried.count(*d)) {
      res.status = MinlpStatus::Exhausted;
      res.vertex_outcomes.clear();
      return res;
    }
    if (consider(*d)) return res;
  }
  res.vertex_outcomes.clear();
  res.status = MinlpStatus::Infeasible;
  return res;
}

CommonFeasibleResult MixedIntegerOracle::find_common_feasible(
    const Eigen::MatrixXd& vertices, const std::optional<Commutation>& exclude) {
  if (vertices.cols() == 0 || !vertices.allFinite())
    throw InvalidInput("vertices must be nonempty and finite");
  if (!uses_branch_and_bound()) return common_enumerate(vertices, exclude);
  auto fixed = [this](const Point& t, const Commutation& d) { return solve_fixed(t, d); };
  auto bnb = detail::branch_and_bound(*prog_, vertices, false, exclude, cache_.snapshot(),
                                      opts_.solver, fixed, opts_.enumeration_budget);
  CommonFeasibleResult res;
  res.status = bnb.status;
  if (bnb.status == MinlpStatus::Optimal) {
    res.delta = bnb.delta;
    if (!feasible_at_all(vertices, bnb.delta, &res.vertex_outcomes)) {
      res.status = MinlpStatus::Infeasible;
      res.vertex_outcomes.clear();
    }
  }
  return res;
}

MinlpResult solve_minlp(const ParametricProgram& prog, const Point& theta, const MinlpOptions& opts) {
  MixedIntegerOracle oracle(prog, opts);
  return oracle.solve_minlp(theta);
}

CommonFeasibleResult find_common_feasible_commutation(const ParametricProgram& prog,
                                                      const Eigen::MatrixXd& vertices,
                                                      const std::optional<Commutation>& exclude,
                                                      const MinlpOptions& opts) {
  MixedIntegerOracle oracle(prog, opts);
  return oracle.find_common_feasible(vertices, exclude);
}

}  // namespace commutree
