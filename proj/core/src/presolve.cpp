// Presolve: moves Zero-cone rows to equalities, fixes variables pinned by
// singleton equality rows, drops empty rows and unused free columns.

#include <cmath>

#include "commutree/conic_solver.hpp"

namespace commutree::detail {

namespace {

constexpr double kZero = 0.0;

template <class V>
double amax(const V& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

struct Block {
  ConeKind kind;
  int start;
  int size;
};

std::vector<Block> blocks_of(const ConeSpec& cone) {
  std::vector<Block> out;
  int row = 0;
  for (const auto& f : cone.factors()) {
    out.push_back({f.kind, row, f.size});
    row += f.size;
  }
  return out;
}

}  // namespace

PresolveResult presolve(const ConicProblem& in) {
  PresolveResult res;
  const int n = in.n();
  const auto blocks = blocks_of(in.cone);

  // Equalities: original rows, then Zero-cone rows.
  int zero_rows = 0;
  for (const auto& b : blocks)
    if (b.kind == ConeKind::Zero) zero_rows += b.size;
  Eigen::MatrixXd A(in.A.rows() + zero_rows, n);
  Eigen::VectorXd b(in.A.rows() + zero_rows);
  A.topRows(in.A.rows()) = in.A;
  b.head(in.A.rows()) = in.b;
  int r = static_cast<int>(in.A.rows());
  for (const auto& blk : blocks) {
    if (blk.kind != ConeKind::Zero) continue;
    A.middleRows(r, blk.size) = in.G.middleRows(blk.start, blk.size);
    b.segment(r, blk.size) = in.h.segment(blk.start, blk.size);
    r += blk.size;
  }
  Eigen::VectorXd h = in.h;
  double c0 = in.c0;

  std::vector<bool> col_active(n, true);
  std::vector<bool> eq_active(A.rows(), true);
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);

  auto fix_column = [&](int j, double value) {
    fixed(j) = value;
    col_active[j] = false;
    b -= A.col(j) * value;
    h -= in.G.col(j) * value;
    c0 += in.c(j) * value;
  };

  const double btol = 1e-12 * std::max(1.0, amax(b));
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < A.rows(); ++i) {
      if (!eq_active[i]) continue;
      int nnz = 0;
      int col = -1;
      for (int j = 0; j < n; ++j)
        if (col_active[j] && A(i, j) != kZero) {
          ++nnz;
          col = j;
        }
      if (nnz == 0) {
        eq_active[i] = false;
        if (std::fabs(b(i)) > btol) {
          res.decided = true;
          res.status = SolveStatus::Infeasible;
          return res;
        }
        changed = true;
      } else if (nnz == 1) {
        eq_active[i] = false;
        fix_column(col, b(i) / A(i, col));
        changed = true;
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    if (!col_active[j] || in.c(j) != kZero) continue;
    if (amax(A.col(j)) == kZero && amax(in.G.col(j)) == kZero)
      col_active[j] = false;
  }

  // Cone rows: drop empty orthant rows and whole empty SOC blocks.
  ConeSpec cone;
  std::vector<int> cone_rows;
  const double htol = 1e-12 * std::max(1.0, amax(h));
  auto row_empty = [&](int i) {
    for (int j = 0; j < n; ++j)
      if (col_active[j] && in.G(i, j) != kZero) return false;
    return true;
  };
  for (const auto& blk : blocks) {
    if (blk.kind == ConeKind::Zero) continue;
    if (blk.kind == ConeKind::NonnegOrthant) {
      for (int i = blk.start; i < blk.start + blk.size; ++i) {
        if (row_empty(i)) {
          if (h(i) < -htol) {
            res.decided = true;
            res.status = SolveStatus::Infeasible;
            return res;
          }
          continue;
        }
        cone_rows.push_back(i);
        cone.append({ConeKind::NonnegOrthant, 1});
      }
    } else {
      bool empty = true;
      for (int i = blk.start; i < blk.start + blk.size; ++i) empty = empty && row_empty(i);
      if (empty) {
        if (h(blk.start) < h.segment(blk.start + 1, blk.size - 1).norm() - htol) {
          res.decided = true;
          res.status = SolveStatus::Infeasible;
          return res;
        }
        continue;
      }
      for (int i = blk.start; i < blk.start + blk.size; ++i) cone_rows.push_back(i);
      cone.append({ConeKind::SecondOrder, blk.size});
    }
  }

  std::vector<int> eq_rows;
  for (int i = 0; i < A.rows(); ++i)
    if (eq_active[i]) eq_rows.push_back(i);
  for (int j = 0; j < n; ++j)
    if (col_active[j]) res.kept_columns.push_back(j);

  const int nk = static_cast<int>(res.kept_columns.size());
  ConicProblem& out = res.reduced;
  out.c.resize(nk);
  out.A.resize(static_cast<Eigen::Index>(eq_rows.size()), nk);
  out.b.resize(static_cast<Eigen::Index>(eq_rows.size()));
  out.G.resize(static_cast<Eigen::Index>(cone_rows.size()), nk);
  out.h.resize(static_cast<Eigen::Index>(cone_rows.size()));
  for (int k = 0; k < nk; ++k) {
    const int j = res.kept_columns[k];
    out.c(k) = in.c(j);
    for (std::size_t i = 0; i < eq_rows.size(); ++i) out.A(i, k) = A(eq_rows[i], j);
    for (std::size_t i = 0; i < cone_rows.size(); ++i) out.G(i, k) = in.G(cone_rows[i], j);
  }
  for (std::size_t i = 0; i < eq_rows.size(); ++i) out.b(i) = b(eq_rows[i]);
  for (std::size_t i = 0; i < cone_rows.size(); ++i) out.h(i) = h(cone_rows[i]);
  out.c0 = c0;
  out.cone = cone;
  res.fixed_values = fixed;
  return res;
}

}  // namespace commutree::detail
