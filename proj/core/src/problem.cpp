#include "commutree/problem.hpp"

#include <algorithm>
#include <set>

#include "commutree/enumeration.hpp"
#include "commutree/errors.hpp"

namespace commutree {

ConeSpec::ConeSpec(std::vector<ConeFactor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    if (f.size <= 0) throw InvalidInput("cone factor sizes must be positive");
    if (f.kind == ConeKind::SecondOrder && f.size < 2)
      throw InvalidInput("second-order cone factors need size >= 2");
  }
}

int ConeSpec::total_rows() const {
  int d = 0;
  for (const auto& f : factors_) d += f.size;
  return d;
}

int ConeSpec::degree() const {
  int d = 0;
  for (const auto& f : factors_) {
    if (f.kind == ConeKind::NonnegOrthant) d += f.size;
    if (f.kind == ConeKind::SecondOrder) d += 1;
  }
  return d;
}

void ConeSpec::append(ConeFactor f) {
  if (f.size <= 0) return;
  if (f.kind == ConeKind::SecondOrder && f.size < 2)
    throw InvalidInput("second-order cone factors need size >= 2");
  if (f.kind != ConeKind::SecondOrder && !factors_.empty() && factors_.back().kind == f.kind) {
    factors_.back().size += f.size;
    return;
  }
  factors_.push_back(f);
}

void ConeSpec::append(const ConeSpec& other) {
  for (const auto& f : other.factors_) append(f);
}

Commutation::Commutation(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

Commutation Commutation::from_string(const std::string& s) {
  if (s == "-" || s.empty()) return Commutation();
  std::vector<std::uint8_t> bits;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw InvalidInput("commutation bits must be 0/1: " + s);
    bits.push_back(ch == '1');
  }
  return Commutation(std::move(bits));
}

Eigen::VectorXd Commutation::as_vector() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v(i) = bits_[i];
  return v;
}

std::string Commutation::to_string() const {
  if (bits_.empty()) return "-";
  std::string s;
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<std::string> ConicData::check_dimensions() const {
  std::vector<std::string> out;
  const auto n = c.size();
  const auto p = c_theta.size();
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  need(A_eq.cols() == n, "A_eq has " + std::to_string(A_eq.cols()) + " columns, expected n = " +
                             std::to_string(n));
  need(b_eq.size() == A_eq.rows(), "b_eq length differs from A_eq rows");
  need(B_eq.rows() == A_eq.rows() && B_eq.cols() == p, "B_eq must be (rows of A_eq) x p");
  need(G.cols() == n, "G has " + std::to_string(G.cols()) + " columns, expected n = " +
                          std::to_string(n));
  need(h.size() == G.rows(), "h length differs from G rows");
  need(H.rows() == G.rows() && H.cols() == p, "H must be (rows of G) x p");
  need(cone.total_rows() == G.rows(), "cone total " + std::to_string(cone.total_rows()) +
                                          " differs from conic constraint rows " +
                                          std::to_string(G.rows()));
  return out;
}

bool ConicData::operator==(const ConicData& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(c, o.c) && same(c_theta, o.c_theta) && c0 == o.c0 && same(A_eq, o.A_eq) &&
         same(b_eq, o.b_eq) && same(B_eq, o.B_eq) && same(G, o.G) && same(h, o.h) &&
         same(H, o.H) && cone == o.cone;
}

ConicData MixedEncoding::substitute(const Commutation& delta) const {
  ConicData d = base;
  if (delta.size() == 0) return d;
  const Eigen::VectorXd dv = delta.as_vector();
  d.c0 += c_delta.dot(dv);
  d.b_eq -= A_delta * dv;
  d.h -= G_delta * dv;
  return d;
}

ScalingTransform ScalingTransform::identity(int p) {
  return {Eigen::VectorXd::Ones(p), Eigen::VectorXd::Zero(p)};
}

Point ScalingTransform::apply(const Point& theta) const {
  return scale.cwiseProduct(theta - offset);
}

Point ScalingTransform::invert(const Point& t) const { return t.cwiseQuotient(scale) + offset; }

Eigen::MatrixXd ScalingTransform::apply_columns(const Eigen::MatrixXd& pts) const {
  return scale.asDiagonal() * (pts.colwise() - offset);
}

bool ScalingTransform::is_identity() const {
  return (scale.array() == 1.0).all() && (offset.array() == 0.0).all();
}

ConicData rescale(const ConicData& d, const ScalingTransform& t) {
  // theta = offset + theta' ./ scale
  ConicData out = d;
  const Eigen::VectorXd inv = t.scale.cwiseInverse();
  out.c0 += d.c_theta.dot(t.offset);
  out.c_theta = d.c_theta.cwiseProduct(inv);
  out.b_eq += d.B_eq * t.offset;
  out.B_eq = d.B_eq * inv.asDiagonal();
  out.h += d.H * t.offset;
  out.H = d.H * inv.asDiagonal();
  return out;
}

bool satisfies_groups(const std::vector<OneHotGroup>& groups, const Commutation& delta) {
  for (const auto& g : groups) {
    int sum = 0;
    for (int b : g.bits) {
      if (b < 0 || b >= delta.size()) return false;
      sum += delta[b];
    }
    if (sum != 1) return false;
  }
  return true;
}

ParametricProgram ParametricProgram::from_table(std::string name, int p, int m, Table table,
                                                std::vector<OneHotGroup> groups) {
  if (table.empty()) throw InvalidInput("commutation table is empty");
  ParametricProgram prog;
  prog.name_ = std::move(name);
  prog.p_ = p;
  prog.m_ = m;
  prog.n_ = table.begin()->second.n();
  prog.groups_ = std::move(groups);
  prog.table_ = std::move(table);
  return prog;
}

ParametricProgram ParametricProgram::from_mixed(std::string name, int p, int m, MixedEncoding enc,
                                                std::vector<OneHotGroup> groups) {
  ParametricProgram prog;
  prog.name_ = std::move(name);
  prog.p_ = p;
  prog.m_ = m;
  prog.n_ = enc.base.n();
  prog.groups_ = std::move(groups);
  prog.mixed_ = std::move(enc);
  return prog;
}

ParametricProgram ParametricProgram::from_map(std::string name, int p, int n, int m, DataMap map,
                                              std::vector<OneHotGroup> groups) {
  ParametricProgram prog;
  prog.name_ = std::move(name);
  prog.p_ = p;
  prog.n_ = n;
  prog.m_ = m;
  prog.groups_ = std::move(groups);
  prog.map_ = std::make_shared<const DataMap>(std::move(map));
  return prog;
}

bool ParametricProgram::admissible(const Commutation& delta) const {
  if (delta.size() != m_) return false;
  if (!satisfies_groups(groups_, delta)) return false;
  if (table_) return table_->count(delta) > 0;
  return true;
}

ConicData ParametricProgram::instantiate(const Commutation& delta) const {
  if (!admissible(delta))
    throw InadmissibleCommutation("commutation " + delta.to_string() + " is not admissible");
  if (table_) return table_->at(delta);
  if (mixed_) return mixed_->substitute(delta);
  return (*map_)(delta);
}

ParametricProgram ParametricProgram::rescaled(const ScalingTransform& t) const {
  ParametricProgram out = *this;
  if (t.is_identity()) return out;
  if (table_) {
    for (auto& [key, data] : *out.table_) data = rescale(data, t);
  } else if (mixed_) {
    out.mixed_->base = rescale(mixed_->base, t);
  } else {
    auto inner = map_;
    out.map_ = std::make_shared<const DataMap>(
        [inner, t](const Commutation& d) { return rescale((*inner)(d), t); });
  }
  return out;
}

ScaledProblem scale_to_unit_box(const ParametricProgram& prog, const Polytope& theta) {
  const int p = theta.dim();
  if (p != prog.p()) throw InvalidInput("parameter set dimension differs from program p");
  ScalingTransform t = ScalingTransform::identity(p);
  for (int i = 0; i < p; ++i) {
    const double ext = theta.vertices().row(i).cwiseAbs().maxCoeff();
    const double spread = theta.vertices().row(i).maxCoeff() - theta.vertices().row(i).minCoeff();
    if (ext == 0.0 || spread == 0.0)
      throw DegenerateInput("parameter set has zero extent on axis " + std::to_string(i));
    t.scale(i) = 1.0 / ext;
  }
  if (!is_full_dimensional(theta.vertices())) throw DegenerateInput("parameter set is not full-dimensional");
  Eigen::MatrixXd v = t.apply_columns(theta.vertices());
  // Pin the extreme coordinate to exactly +-1 against rounding in 1/ext.
  for (int i = 0; i < p; ++i) {
    Eigen::Index k;
    v.row(i).cwiseAbs().maxCoeff(&k);
    v(i, k) = v(i, k) > 0 ? 1.0 : -1.0;
  }
  return {prog.rescaled(t), Polytope(std::move(v)), t};
}

std::vector<Diagnostic> validate(const ParametricProgram& prog) {
  std::vector<Diagnostic> out;
  const int m = prog.m();
  std::set<int> seen;
  for (std::size_t g = 0; g < prog.groups().size(); ++g) {
    const auto& bits = prog.groups()[g].bits;
    if (bits.empty()) {
      out.push_back({"unsatisfiable", "one-hot group " + std::to_string(g) + " has no bits"});
      continue;
    }
    for (int b : bits) {
      if (b < 0 || b >= m)
        out.push_back({"unsatisfiable", "one-hot group " + std::to_string(g) + " references bit " +
                                            std::to_string(b) + " outside m = " + std::to_string(m)});
      else if (!seen.insert(b).second)
        out.push_back({"structure", "bit " + std::to_string(b) + " belongs to several groups"});
    }
  }
  if (!out.empty()) return out;

  std::vector<Commutation> probe;
  try {
    if (prog.table()) {
      for (const auto& [key, data] : *prog.table()) {
        if (key.size() != m)
          out.push_back({"dimension", "table key " + key.to_string() + " has wrong length"});
        else if (!satisfies_groups(prog.groups(), key))
          out.push_back({"structure", "table key " + key.to_string() + " violates one-hot groups"});
        else
          probe.push_back(key);
      }
    } else {
      probe = admissible_commutations(prog, 8);
    }
  } catch (const Error& e) {
    out.push_back({"structure", e.what()});
    return out;
  }
  if (probe.empty()) {
    out.push_back({"unsatisfiable", "no commutation satisfies the structural constraints"});
    return out;
  }
  if (const auto& mx = prog.mixed()) {
    if (mx->c_delta.size() != m || mx->A_delta.cols() != m || mx->G_delta.cols() != m ||
        mx->A_delta.rows() != mx->base.A_eq.rows() || mx->G_delta.rows() != mx->base.G.rows())
      out.push_back({"dimension", "affine commutation columns do not match m or row counts"});
  }
  for (const auto& d : probe) {
    ConicData data;
    try {
      data = prog.instantiate(d);
    } catch (const Error& e) {
      out.push_back({"data_map", e.what()});
      continue;
    }
    for (auto& msg : data.check_dimensions())
      out.push_back({"dimension", "delta " + d.to_string() + ": " + msg});
    if (data.p() != prog.p())
      out.push_back({"dimension", "delta " + d.to_string() + ": parameter columns differ from p"});
    if (!data.c.allFinite() || !data.G.allFinite() || !data.h.allFinite() || !data.H.allFinite() ||
        !data.A_eq.allFinite() || !data.b_eq.allFinite() || !data.B_eq.allFinite())
      out.push_back({"finite", "delta " + d.to_string() + ": non-finite data"});
  }
  return out;
}

}  // namespace commutree
