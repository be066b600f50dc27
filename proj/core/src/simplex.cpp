#include "stealthrisk/simplex.hpp"

#include <vector>

namespace stealthrisk {

LpSolution maximize_canonical(const Matrix& a, const Vector& b, const Vector& c) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  if (b.size() != rows || c.size() != cols) throw Error("simplex: dimension mismatch");
  if ((b.array() < 0.0).any()) throw Error("simplex: right-hand side must be non-negative");

  constexpr double kPivotTol = 1e-12;
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});
  const double tol = kPivotTol * scale;

  // Tableau [A I | b] with the objective row -c in the last row.
  Matrix t = Matrix::Zero(rows + 1, cols + rows + 1);
  t.topLeftCorner(rows, cols) = a;
  t.block(0, cols, rows, rows).setIdentity();
  t.topRightCorner(rows, 1) = b;
  t.bottomLeftCorner(1, cols) = -c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = cols + i;

  LpSolution sol;
  const Eigen::Index width = cols + rows;
  for (;;) {
    // Bland: lowest-index entering column with negative reduced cost.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < width; ++j) {
      if (t(rows, j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best_ratio = kUnbounded;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (t(i, enter) > tol) {
        const double ratio = t(i, width) / t(i, enter);
        // Ties go to the lowest basic variable index (Bland).
        if (leave < 0 || ratio < best_ratio - tol ||
            (std::abs(ratio - best_ratio) <= tol &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw Error("simplex: objective is unbounded");

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= rows; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++sol.pivots;
  }

  sol.x = Vector::Zero(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index var = basis[static_cast<std::size_t>(i)];
    if (var < cols) sol.x[var] = t(i, width);
  }
  sol.duals = t.block(rows, cols, 1, rows).transpose();
  sol.objective = t(rows, width);

  std::vector<char> is_basic(static_cast<std::size_t>(width), 0);
  for (auto v : basis) is_basic[static_cast<std::size_t>(v)] = 1;
  for (Eigen::Index j = 0; j < width; ++j) {
    if (!is_basic[static_cast<std::size_t>(j)] && std::abs(t(rows, j)) <= tol) {
      sol.alternative_optima = true;
    }
  }
  return sol;
}

}  // namespace stealthrisk
