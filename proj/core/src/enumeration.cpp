#include "commutree/enumeration.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "commutree/errors.hpp"

namespace commutree {

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

bool groups_disjoint(const std::vector<OneHotGroup>& groups, int m) {
  std::vector<int> seen(m, 0);
  for (const auto& g : groups)
    for (int b : g.bits) {
      if (b < 0 || b >= m || seen[b]++) return false;
    }
  return true;
}

}  // namespace

CommutationEnumerator::CommutationEnumerator(const ParametricProgram& prog) : prog_(&prog) {
  const int m = prog.m();
  if (prog.table()) {
    for (const auto& [key, data] : *prog.table())
      if (prog.admissible(key)) table_keys_.push_back(key);
    count_ = table_keys_.size();
    return;
  }
  for (const auto& g : prog.groups())
    if (g.bits.empty()) {
      count_ = 0;
      done_ = true;
      return;
    }
  if (!groups_disjoint(prog.groups(), m)) {
    if (m > 24) throw InvalidInput("overlapping one-hot groups with m > 24 cannot be enumerated");
    brute_force_ = true;
    for (std::uint64_t k = 0; k < (1ULL << m); ++k) {
      Commutation d = Commutation::zeros(m);
      for (int b = 0; b < m; ++b) d.set(b, (k >> (m - 1 - b)) & 1ULL);
      if (satisfies_groups(prog.groups(), d)) ++count_;
    }
    return;
  }
  std::vector<int> owner(m, -1);
  for (std::size_t g = 0; g < prog.groups().size(); ++g) {
    Unit u;
    u.bits = prog.groups()[g].bits;
    std::sort(u.bits.begin(), u.bits.end());
    u.one_hot = true;
    units_.push_back(u);
    for (int b : u.bits) owner[b] = 0;
  }
  for (int b = 0; b < m; ++b)
    if (owner[b] < 0) units_.push_back(Unit{{b}, false});
  std::sort(units_.begin(), units_.end(),
            [](const Unit& a, const Unit& b) { return a.bits.front() < b.bits.front(); });
  count_ = 1;
  for (const auto& u : units_) count_ = sat_mul(count_, static_cast<std::uint64_t>(u.radix()));
  digits_.assign(units_.size(), 0);
}

void CommutationEnumerator::reset() {
  table_pos_ = 0;
  brute_next_ = 0;
  started_ = false;
  done_ = count_ == 0;
  std::fill(digits_.begin(), digits_.end(), 0);
}

Commutation CommutationEnumerator::decode() const {
  Commutation d = Commutation::zeros(prog_->m());
  for (std::size_t k = 0; k < units_.size(); ++k) {
    const Unit& u = units_[k];
    if (u.one_hot)
      d.set(u.bits[digits_[k]], true);
    else
      d.set(u.bits[0], digits_[k] == 1);
  }
  return d;
}

bool CommutationEnumerator::advance() {
  for (std::size_t k = units_.size(); k-- > 0;) {
    if (++digits_[k] < units_[k].radix()) return true;
    digits_[k] = 0;
  }
  return false;
}

std::optional<Commutation> CommutationEnumerator::next() {
  if (done_) return std::nullopt;
  if (prog_->table()) {
    if (table_pos_ >= table_keys_.size()) {
      done_ = true;
      return std::nullopt;
    }
    return table_keys_[table_pos_++];
  }
  const int m = prog_->m();
  if (brute_force_) {
    while (brute_next_ < (1ULL << m)) {
      const std::uint64_t k = brute_next_++;
      Commutation d = Commutation::zeros(m);
      for (int b = 0; b < m; ++b) d.set(b, (k >> (m - 1 - b)) & 1ULL);
      if (satisfies_groups(prog_->groups(), d)) return d;
    }
    done_ = true;
    return std::nullopt;
  }
  if (started_ && !advance()) {
    done_ = true;
    return std::nullopt;
  }
  started_ = true;
  return decode();
}

std::vector<Commutation> admissible_commutations(const ParametricProgram& prog, std::size_t limit) {
  std::vector<Commutation> out;
  CommutationEnumerator it(prog);
  while (out.size() < limit) {
    auto d = it.next();
    if (!d) break;
    out.push_back(std::move(*d));
  }
  return out;
}

}  // namespace commutree
