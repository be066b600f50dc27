#include "stealthrisk/sdp_solver.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace stealthrisk::sdp {

namespace {

using Blocks = std::vector<Matrix>;

double trace_product(const Matrix& a, const Matrix& b) {
  // tr(a * b) for symmetric a without forming the product.
  return a.cwiseProduct(b.transpose()).sum();
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += trace_product(a[k], b[k]);
  return s;
}

double frobenius(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with x + alpha * dx PSD (infinity if dx keeps x PSD for all
// alpha >= 0). Returns a negative value if x itself is not positive definite.
double max_step(const Blocks& x, const Blocks& dx) {
  double alpha = kUnbounded;
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<Matrix> chol(x[k]);
    if (chol.info() != Eigen::Success) return -1.0;
    Matrix w = chol.matrixL().solve(dx[k]);
    w = chol.matrixL().solve(w.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(w), Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

}  // namespace

void DualProblem::validate() const {
  if (a.size() != static_cast<std::size_t>(b.size())) {
    throw Error("SDP: constraint count does not match the length of b");
  }
  for (const auto& ai : a) {
    if (ai.size() != c.size()) throw Error("SDP: constraint matrix has the wrong block count");
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (ai[k].rows() != c[k].rows() || ai[k].cols() != c[k].cols()) {
        throw Error("SDP: block dimension mismatch");
      }
    }
  }
  for (const auto& ck : c) {
    if (ck.rows() != ck.cols()) throw Error("SDP: blocks must be square");
  }
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::NearOptimal:
      return "near-optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::MaxIterations:
      return "max-iterations";
    case Status::NumericalFailure:
      return "numerical-failure";
  }
  return "?";
}

std::vector<Matrix> symmetric_basis(int n) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  const double off = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      Matrix e = Matrix::Zero(n, n);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = off;
        e(j, i) = off;
      }
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

Solution solve(const DualProblem& problem, const SolverOptions& options) {
  problem.validate();
  const int m = problem.num_constraints();
  const int nb = problem.num_blocks();
  const auto& c = problem.c;
  const auto& a = problem.a;
  const Vector& b = problem.b;

  int total_dim = 0;
  for (const auto& ck : c) total_dim += static_cast<int>(ck.rows());

  double a_norm = 0.0;
  for (const auto& ai : a) a_norm = std::max(a_norm, frobenius(ai));
  const double c_norm = frobenius(c);
  const double b_norm = b.norm();
  const double xi = options.initial_scale *
                    std::max(1.0, b.size() > 0 ? b.cwiseAbs().maxCoeff() / (1.0 + a_norm) : 0.0) *
                    std::sqrt(static_cast<double>(total_dim));
  const double eta =
      options.initial_scale * std::max({1.0, c_norm, a_norm}) * std::sqrt(static_cast<double>(total_dim));

  Solution sol;
  sol.y = Vector::Zero(m);
  Blocks x(nb), z(nb);
  for (int k = 0; k < nb; ++k) {
    const auto n = c[k].rows();
    x[k] = xi * Matrix::Identity(n, n);
    z[k] = eta * Matrix::Identity(n, n);
  }

  auto apply_a = [&](const Blocks& v) {
    Vector out(m);
    for (int i = 0; i < m; ++i) out[i] = inner(a[static_cast<std::size_t>(i)], v);
    return out;
  };

  // Best iterate seen so far, by the worst of the three stopping measures.
  struct Snapshot {
    double merit = kUnbounded;
    Vector y;
    Blocks x, z;
    double pobj = 0.0, dobj = 0.0, pres = 0.0, dres = 0.0, gap = 0.0;
  } best;

  Blocks rd(nb), w(nb), gm(nb), ginv(nb);
  std::vector<Vector> lambda(static_cast<std::size_t>(nb));
  std::vector<Blocks> wa(static_cast<std::size_t>(m), Blocks(nb));
  Matrix schur(m, m);

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    sol.iterations = iter;
    for (int k = 0; k < nb; ++k) {
      rd[k] = c[k] - z[k];
      for (int i = 0; i < m; ++i) rd[k] -= sol.y[i] * a[static_cast<std::size_t>(i)][k];
    }
    const Vector rp = b - apply_a(x);
    const double xz = inner(x, z);
    const double mu = xz / total_dim;
    sol.primal_objective = inner(c, x);
    sol.dual_objective = b.dot(sol.y);
    const double denom = 1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective);
    sol.relative_gap = std::max(xz, std::abs(sol.primal_objective - sol.dual_objective)) / denom;
    sol.primal_residual = rp.norm() / (1.0 + b_norm);
    sol.dual_residual = frobenius(rd) / (1.0 + c_norm);

    const double merit = std::max({sol.relative_gap, sol.primal_residual, sol.dual_residual});
    if (merit < best.merit) {
      best = {merit, sol.y, x, z, sol.primal_objective, sol.dual_objective,
              sol.primal_residual, sol.dual_residual, sol.relative_gap};
    }

    if (sol.relative_gap <= options.gap_tolerance &&
        sol.primal_residual <= options.feasibility_tolerance &&
        sol.dual_residual <= options.feasibility_tolerance) {
      sol.status = Status::Optimal;
      break;
    }
    if (frobenius(x) > options.divergence_bound || sol.y.norm() > options.divergence_bound) {
      sol.status = Status::Infeasible;
      break;
    }
    if (iter == options.max_iterations) {
      sol.status = Status::MaxIterations;
      break;
    }

    // Nesterov-Todd scaling: with X = L L^T, Z = R R^T and R^T L = U D V^T,
    // G = L V D^{-1/2} maps both X and Z to the diagonal D, and W = G G^T
    // satisfies W Z W = X.
    bool definite = true;
    for (int k = 0; k < nb && definite; ++k) {
      Eigen::LLT<Matrix> lx(x[k]);
      Eigen::LLT<Matrix> lz(z[k]);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
        definite = false;
        break;
      }
      const Matrix l = lx.matrixL();
      const Matrix r = lz.matrixL();
      Eigen::JacobiSVD<Matrix> svd(r.transpose() * l, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector d = svd.singularValues();
      if (d.minCoeff() <= 0.0) {
        definite = false;
        break;
      }
      const Vector isd = d.cwiseSqrt().cwiseInverse();
      gm[k] = l * svd.matrixV() * isd.asDiagonal();
      // G^{-1} = D^{-1/2} U^T R^T.
      ginv[k] = isd.asDiagonal() * svd.matrixU().transpose() * r.transpose();
      w[k] = gm[k] * gm[k].transpose();
      lambda[static_cast<std::size_t>(k)] = d;
    }
    if (!definite) {
      sol.status = Status::NumericalFailure;
      break;
    }

    // Schur complement M_ij = tr(A_i W A_j W).
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < nb; ++k) wa[j][k] = w[k] * a[static_cast<std::size_t>(j)][k] * w[k];
    }
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        double s = 0.0;
        for (int k = 0; k < nb; ++k) s += trace_product(a[static_cast<std::size_t>(i)][k], wa[j][k]);
        schur(i, j) = s;
        schur(j, i) = s;
      }
    }
    Eigen::LLT<Matrix> schur_chol(schur);
    Eigen::FullPivLU<Matrix> schur_lu;
    const bool use_lu = schur_chol.info() != Eigen::Success;
    if (use_lu) schur_lu.compute(schur);

    Blocks wrdw(nb);
    for (int k = 0; k < nb; ++k) wrdw[k] = w[k] * rd[k] * w[k];
    const Vector a_wrdw = apply_a(wrdw);

    // Scaled complementarity target rhat; the Lyapunov equation
    // D H + H D = 2 rhat gives H = dXhat + dZhat, then
    // dX = G H G^T - W dZ W.
    auto direction = [&](const Blocks& rhat, Vector& dy, Blocks& dx, Blocks& dz) {
      Blocks ghg(nb);
      for (int k = 0; k < nb; ++k) {
        const Vector& d = lambda[static_cast<std::size_t>(k)];
        Matrix h = rhat[k];
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
          for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, j) *= 2.0 / (d[i] + d[j]);
        }
        ghg[k] = gm[k] * h * gm[k].transpose();
      }
      const Vector rhs = rp - apply_a(ghg) + a_wrdw;
      dy = use_lu ? Vector(schur_lu.solve(rhs)) : Vector(schur_chol.solve(rhs));
      for (int k = 0; k < nb; ++k) {
        dz[k] = rd[k];
        for (int i = 0; i < m; ++i) dz[k] -= dy[i] * a[static_cast<std::size_t>(i)][k];
        dx[k] = symmetrize(ghg[k] - w[k] * dz[k] * w[k]);
      }
    };
    auto scaled = [&](const Blocks& dx, const Blocks& dz, Blocks& dxh, Blocks& dzh) {
      for (int k = 0; k < nb; ++k) {
        dxh[k] = ginv[k] * dx[k] * ginv[k].transpose();
        dzh[k] = gm[k].transpose() * dz[k] * gm[k];
      }
    };

    Vector dy(m);
    Blocks dx(nb), dz(nb), rhat(nb), dxh(nb), dzh(nb);
    for (int k = 0; k < nb; ++k) {
      const Vector& d = lambda[static_cast<std::size_t>(k)];
      rhat[k] = Matrix(d.array().square().matrix().asDiagonal());
      rhat[k] = -rhat[k];
    }
    direction(rhat, dy, dx, dz);
    const double ap_aff = std::min(1.0, max_step(x, dx));
    const double ad_aff = std::min(1.0, max_step(z, dz));
    if (ap_aff < 0.0 || ad_aff < 0.0) {
      sol.status = Status::NumericalFailure;
      break;
    }
    double xz_aff = 0.0;
    for (int k = 0; k < nb; ++k) {
      xz_aff += trace_product(x[k] + ap_aff * dx[k], z[k] + ad_aff * dz[k]);
    }
    const double sigma = std::clamp(std::pow(std::max(xz_aff, 0.0) / xz, 3.0), 0.0, 1.0);

    scaled(dx, dz, dxh, dzh);
    for (int k = 0; k < nb; ++k) {
      const Vector& d = lambda[static_cast<std::size_t>(k)];
      rhat[k] = -0.5 * (dxh[k] * dzh[k] + dzh[k] * dxh[k]);
      rhat[k].diagonal().array() += sigma * mu - d.array().square();
    }
    direction(rhat, dy, dx, dz);
    const double ap = std::min(1.0, options.step_fraction * max_step(x, dx));
    const double ad = std::min(1.0, options.step_fraction * max_step(z, dz));
    if (!(ap > 0.0) || !(ad > 0.0)) {
      sol.status = Status::NumericalFailure;
      break;
    }
    for (int k = 0; k < nb; ++k) {
      x[k] = symmetrize(x[k] + ap * dx[k]);
      z[k] = symmetrize(z[k] + ad * dz[k]);
    }
    sol.y += ad * dy;
  }

  if ((sol.status == Status::NumericalFailure || sol.status == Status::MaxIterations) &&
      best.merit <= options.near_optimal_tolerance) {
    sol.status = Status::NearOptimal;
    sol.y = std::move(best.y);
    x = std::move(best.x);
    z = std::move(best.z);
    sol.primal_objective = best.pobj;
    sol.dual_objective = best.dobj;
    sol.primal_residual = best.pres;
    sol.dual_residual = best.dres;
    sol.relative_gap = best.gap;
  }
  sol.x = std::move(x);
  sol.z = std::move(z);
  return sol;
}

}  // namespace stealthrisk::sdp
