#include "stealthrisk/impact.hpp"

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

namespace stealthrisk {

namespace {

using sdp::DualProblem;

constexpr double kCertificateLmiTolerance = 1e-6;
constexpr double kCertificatePsdTolerance = 1e-8;

double operator_scale(const Matrix& a) {
  const double s = a.size() > 0 ? a.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  return s > 0.0 ? s : 1.0;
}

// Orthonormal basis of the orthogonal complement of the column span of k.
Matrix complement_basis(const Matrix& k, int n) {
  if (k.cols() == 0) return Matrix::Identity(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(k);
  const auto rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - rank);
}

double max_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// U^T (A^T T E T^T + T E T^T A) U for every basis element E of sym(n_s).
std::vector<Matrix> storage_terms(const SystemRealization& sys, const ReducedLmi& red,
                                  const std::vector<Matrix>& basis) {
  const Matrix at_t = sys.a_matrix().transpose() * red.t;  // A^T T
  std::vector<Matrix> out;
  out.reserve(basis.size());
  for (const auto& e : basis) {
    Matrix half = red.u.transpose() * at_t * e * (red.t.transpose() * red.u);
    out.push_back(half + half.transpose());
  }
  return out;
}

Matrix projected_outer(const Matrix& u, int vertex) {
  Vector row = u.row(vertex).transpose();
  return row * row.transpose();
}

void record(SolverStats& stats, const sdp::Solution& sol) {
  stats.iterations += sol.iterations;
  stats.subproblems += 1;
  stats.primal_residual = sol.primal_residual;
  stats.dual_residual = sol.dual_residual;
  stats.relative_gap = sol.relative_gap;
}

bool converged(sdp::Status s) { return s == sdp::Status::Optimal || s == sdp::Status::NearOptimal; }

enum class Probe { Feasible, Infeasible, Undetermined };

struct Feasibility {
  Probe verdict = Probe::Undetermined;
  sdp::Solution solution;
  bool feasible() const { return verdict == Probe::Feasible; }
};

Feasibility probe(const SystemRealization& sys, const ReducedLmi& red, double gamma, double sigma,
                  double trace_bound, const ImpactOptions& options, SolverStats& stats) {
  Feasibility out;
  out.solution = sdp::solve(feasibility_problem(sys, red, gamma, trace_bound, sigma), options.solver);
  record(stats, out.solution);
  const auto& sol = out.solution;
  const double tol = options.solver.feasibility_tolerance;
  const double threshold = tol * std::max(1.0, gamma / sigma);
  if (converged(sol.status)) {
    out.verdict = -sol.dual_objective <= threshold ? Probe::Feasible : Probe::Infeasible;
    return out;
  }
  // Only the sign of t matters here. A dual-feasible iterate with t below the
  // threshold is itself a feasible point; a nearly primal-feasible iterate
  // bounds t from below by weak duality, so both ends of the bracket above
  // the threshold mean infeasible.
  if (sol.dual_residual <= tol && -sol.dual_objective <= threshold) {
    out.verdict = Probe::Feasible;
  } else if (sol.primal_residual <= options.solver.near_optimal_tolerance &&
             std::min(-sol.primal_objective, -sol.dual_objective) > threshold) {
    out.verdict = Probe::Infeasible;
  }
  return out;
}

double storage_trace(const Vector& s_coordinates) {
  const int ns = static_cast<int>(std::lround((std::sqrt(8.0 * s_coordinates.size() + 1.0) - 1.0) / 2.0));
  const auto basis = sdp::symmetric_basis(ns);
  double tr = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) tr += s_coordinates[static_cast<Eigen::Index>(k)] * basis[k].trace();
  return tr;
}

// A large trace bound leaves the subproblem badly scaled, so the bound starts
// small and grows by 100x up to options.trace_bound while it is active. An
// infeasible verdict with the bound slack is final: the bound is not what
// keeps t above zero.
Feasibility check_feasible(const SystemRealization& sys, const ReducedLmi& red, double gamma,
                           double sigma, const ImpactOptions& options, SolverStats& stats) {
  for (double bound = std::min(1e2, options.trace_bound);; bound = std::min(100.0 * bound, options.trace_bound)) {
    Feasibility out = probe(sys, red, gamma, sigma, bound, options, stats);
    if (out.verdict == Probe::Feasible || bound >= options.trace_bound || red.t.cols() == 0) return out;
    if (out.verdict == Probe::Infeasible && converged(out.solution.status) &&
        storage_trace(out.solution.y.tail(out.solution.y.size() - 1)) < 0.99 * bound) {
      return out;
    }
  }
}

[[noreturn]] void undetermined(double gamma, const sdp::Solution& sol) {
  throw SolverFailure("feasibility subproblem at gamma = " + std::to_string(gamma) + " ended " +
                      std::string(sdp::to_string(sol.status)));
}

void attach_certificate(ImpactResult& result, const SystemRealization& sys, const ReducedLmi& red,
                        const Vector& s_coordinates, double sigma) {
  result.certificate = expand_storage(red, s_coordinates);
  result.lmi_max_eigenvalue =
      max_eigenvalue(assemble_lmi(sys, result.value, result.certificate, sigma));
  result.p_min_eigenvalue = min_eigenvalue(result.certificate);
  if (result.lmi_max_eigenvalue > kCertificateLmiTolerance ||
      result.p_min_eigenvalue < -kCertificatePsdTolerance) {
    throw SolverFailure("certificate check failed: lambda_max(R) = " +
                        std::to_string(result.lmi_max_eigenvalue) +
                        ", lambda_min(P) = " + std::to_string(result.p_min_eigenvalue));
  }
}

}  // namespace

std::string_view to_string(UnboundedCause cause) {
  switch (cause) {
    case UnboundedCause::None:
      return "none";
    case UnboundedCause::RelativeDegree:
      return "relative-degree";
    case UnboundedCause::UnstableZero:
      return "unstable-zero";
    case UnboundedCause::KrylovCertificate:
      return "krylov-certificate";
    case UnboundedCause::CapHit:
      return "cap-hit";
  }
  return "?";
}

Matrix assemble_lmi(const SystemRealization& sys, double gamma, const Matrix& p, double sigma) {
  const int n = sys.n();
  if (p.rows() != n || p.cols() != n) throw Error("assemble_lmi: P has the wrong shape");
  const Matrix& a = sys.a_matrix();
  Matrix r = Matrix::Zero(n + 1, n + 1);
  const Matrix ap = a.transpose() * p;
  r.topLeftCorner(n, n) = ap + ap.transpose();
  r(sys.monitor_vertex(), sys.monitor_vertex()) -= gamma / sigma;
  r(sys.target_vertex(), sys.target_vertex()) += 1.0;
  r.block(0, n, n, 1) = p.col(sys.attack_vertex());
  r.block(n, 0, 1, n) = p.col(sys.attack_vertex()).transpose();
  return r;
}

ReducedLmi reduce_lmi(const SystemRealization& sys) {
  const int n = sys.n();
  const double s = operator_scale(sys.a_matrix());
  const Matrix a_scaled = sys.a_matrix() / s;
  ReducedLmi red;
  std::vector<Vector> krylov;
  Vector v = Vector::Unit(n, sys.attack_vertex());
  for (int k = 0; k < n; ++k) {
    if (std::abs(v[sys.monitor_vertex()]) > kMarkovTolerance) {
      krylov.push_back(v);
      red.monitor_delay = k;
      Matrix kmat(n, static_cast<Eigen::Index>(krylov.size()));
      for (std::size_t j = 0; j < krylov.size(); ++j) {
        kmat.col(static_cast<Eigen::Index>(j)) = krylov[j].normalized();
      }
      red.t = complement_basis(kmat, n);
      red.u = complement_basis(kmat.leftCols(k), n);
      return red;
    }
    if (std::abs(v[sys.target_vertex()]) > kMarkovTolerance) {
      red.unbounded_direction = v;
      red.monitor_delay = k;
      return red;
    }
    krylov.push_back(v);
    v = a_scaled * v;
  }
  throw DecoupledChannel("monitor vertex " + std::to_string(sys.monitor_vertex() + 1) +
                         " does not observe attack vertex " +
                         std::to_string(sys.attack_vertex() + 1));
}

Matrix expand_storage(const ReducedLmi& red, const Vector& s_coordinates) {
  const auto ns = red.t.cols();
  Matrix s = Matrix::Zero(ns, ns);
  const auto basis = sdp::symmetric_basis(static_cast<int>(ns));
  if (s_coordinates.size() != static_cast<Eigen::Index>(basis.size())) {
    throw Error("storage coordinate vector has the wrong length");
  }
  for (std::size_t k = 0; k < basis.size(); ++k) s += s_coordinates[static_cast<Eigen::Index>(k)] * basis[k];
  return red.t * s * red.t.transpose();
}

DualProblem joint_problem(const SystemRealization& sys, const ReducedLmi& red, double sigma) {
  if (red.unbounded_direction) throw Error("joint_problem: LMI is infeasible for every gamma");
  const int ns = static_cast<int>(red.t.cols());
  const auto basis = sdp::symmetric_basis(ns);
  const auto terms = storage_terms(sys, red, basis);
  const int m = 1 + static_cast<int>(basis.size());
  const bool has_s_block = ns > 0;

  DualProblem prob;
  prob.b = Vector::Zero(m);
  prob.b[0] = -1.0;
  if (has_s_block) prob.c.push_back(Matrix::Zero(ns, ns));
  prob.c.push_back(-projected_outer(red.u, sys.target_vertex()));
  prob.a.resize(static_cast<std::size_t>(m));
  auto& a_gamma = prob.a[0];
  if (has_s_block) a_gamma.push_back(Matrix::Zero(ns, ns));
  a_gamma.push_back(-projected_outer(red.u, sys.monitor_vertex()) / sigma);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    auto& ak = prob.a[k + 1];
    ak.push_back(-basis[k]);
    ak.push_back(terms[k]);
  }
  return prob;
}

DualProblem feasibility_problem(const SystemRealization& sys, const ReducedLmi& red, double gamma,
                                double trace_bound, double sigma) {
  if (red.unbounded_direction) throw Error("feasibility_problem: LMI is infeasible for every gamma");
  const int ns = static_cast<int>(red.t.cols());
  const int nx = static_cast<int>(red.u.cols());
  const auto basis = sdp::symmetric_basis(ns);
  const auto terms = storage_terms(sys, red, basis);
  const int m = 1 + static_cast<int>(basis.size());
  const bool has_s_block = ns > 0;

  DualProblem prob;
  prob.b = Vector::Zero(m);
  prob.b[0] = -1.0;
  if (has_s_block) prob.c.push_back(Matrix::Zero(ns, ns));
  prob.c.push_back(-projected_outer(red.u, sys.target_vertex()) +
                   (gamma / sigma) * projected_outer(red.u, sys.monitor_vertex()));
  if (has_s_block) prob.c.push_back(Matrix::Constant(1, 1, trace_bound));

  prob.a.resize(static_cast<std::size_t>(m));
  auto& a_t = prob.a[0];
  if (has_s_block) a_t.push_back(Matrix::Zero(ns, ns));
  a_t.push_back(-Matrix::Identity(nx, nx));
  if (has_s_block) a_t.push_back(Matrix::Zero(1, 1));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    auto& ak = prob.a[k + 1];
    ak.push_back(-basis[k]);
    ak.push_back(terms[k]);
    ak.push_back(Matrix::Constant(1, 1, basis[k].trace()));
  }
  return prob;
}

ImpactResult solve_impact(const ImpactProblem& problem, const ImpactOptions& options) {
  const SystemRealization& sys = problem.sys;
  const double sigma = problem.alarm_threshold;
  if (!(sigma > 0.0)) throw Error("alarm threshold must be positive");
  if (!(problem.gamma_cap > 0.0)) throw Error("gamma_cap must be positive");

  ImpactResult result;
  if (options.structural_precheck) {
    switch (feasibility_verdict(sys)) {
      case Verdict::InfeasibleRelativeDegree:
        result.cause = UnboundedCause::RelativeDegree;
        return result;
      case Verdict::InfeasibleUnstableZero:
        result.cause = UnboundedCause::UnstableZero;
        return result;
      case Verdict::Feasible:
        break;
    }
  }

  const ReducedLmi red = reduce_lmi(sys);
  if (red.unbounded_direction) {
    result.cause = UnboundedCause::KrylovCertificate;
    return result;
  }

  if (options.method == ImpactMethod::Joint) {
    const sdp::DualProblem joint = joint_problem(sys, red, sigma);
    sdp::Solution sol;
    // Restarts from other starting points and with shorter steps. Problems
    // whose channels share a factor that cancels in the impact ratio have an
    // unbounded optimal storage face, and the iterates can stall on it from
    // one start but not from another.
    static constexpr std::pair<double, double> kRestarts[] = {
        {1.0, 1.0}, {0.1, 0.9}, {10.0, 0.9}, {100.0, 0.9}, {1000.0, 0.8}};
    for (const auto& [scale, step] : kRestarts) {
      sdp::SolverOptions so = options.solver;
      so.initial_scale *= scale;
      so.step_fraction = std::min(so.step_fraction, step);
      sol = sdp::solve(joint, so);
      record(result.stats, sol);
      if (converged(sol.status)) break;
    }
    if (converged(sol.status) && sol.y[0] <= problem.gamma_cap) {
      result.value = std::max(sol.y[0], 0.0);
      attach_certificate(result, sys, red, sol.y.tail(sol.y.size() - 1), sigma);
      return result;
    }
    if (converged(sol.status)) {
      result.cause = UnboundedCause::CapHit;
      return result;
    }
    const auto at_cap = check_feasible(sys, red, problem.gamma_cap, sigma, options, result.stats);
    if (at_cap.verdict == Probe::Undetermined) undetermined(problem.gamma_cap, at_cap.solution);
    if (at_cap.verdict == Probe::Infeasible) {
      result.cause = UnboundedCause::CapHit;
      return result;
    }
    throw SolverFailure("impact SDP ended " + std::string(sdp::to_string(sol.status)) + " after " +
                        std::to_string(sol.iterations) + " iterations");
  }

  auto at_cap = check_feasible(sys, red, problem.gamma_cap, sigma, options, result.stats);
  if (at_cap.verdict == Probe::Undetermined) undetermined(problem.gamma_cap, at_cap.solution);
  if (!at_cap.feasible()) {
    result.cause = UnboundedCause::CapHit;
    return result;
  }
  double lo = 0.0;
  double hi = problem.gamma_cap;
  Vector best = at_cap.solution.y;
  std::vector<std::pair<double, bool>> history{{hi, true}};
  for (int it = 0; it < options.bisection_iterations; ++it) {
    if (hi - lo <= 1e-6 * std::max(1.0, hi)) break;
    const double mid = 0.5 * (lo + hi);
    // An undetermined probe counts as not certified, which keeps hi a
    // certified upper bound.
    auto probe = check_feasible(sys, red, mid, sigma, options, result.stats);
    const bool feasible_mid = probe.feasible();
    for (const auto& [g, feasible] : history) {
      if ((feasible_mid && !feasible && g > mid) || (!feasible_mid && feasible && g < mid)) {
        throw SolverFailure("bisection monotonicity violated near gamma = " + std::to_string(mid));
      }
    }
    history.emplace_back(mid, feasible_mid);
    if (feasible_mid) {
      hi = mid;
      best = probe.solution.y;
    } else {
      lo = mid;
    }
  }
  result.value = hi;
  attach_certificate(result, sys, red, best.tail(best.size() - 1), sigma);
  return result;
}

namespace {

struct ChannelPair {
  std::complex<double> target;
  std::complex<double> monitor;
};

ChannelPair evaluate_channels(const SystemRealization& sys, std::complex<double> s) {
  const int n = sys.n();
  Eigen::MatrixXcd m = -sys.a_matrix().cast<std::complex<double>>();
  m.diagonal().array() += s;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Unit(n, sys.attack_vertex());
  Eigen::VectorXcd x = m.partialPivLu().solve(rhs);
  return {x[sys.target_vertex()], x[sys.monitor_vertex()]};
}

}  // namespace

OracleResult impact_oracle_frequency(const SystemRealization& sys, const FrequencyGrid& grid,
                                     double sigma) {
  if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.points < 3) {
    throw Error("frequency grid must satisfy 0 < lo < hi with at least 3 points");
  }
  auto ratio = [&](double w) {
    const auto g = evaluate_channels(sys, {0.0, w});
    const double gm = std::norm(g.monitor);
    if (gm == 0.0) {
      throw Error("monitor channel vanishes at w = " + std::to_string(w) +
                  " (zero on the imaginary axis)");
    }
    return sigma * std::norm(g.target) / gm;
  };
  auto log_ratio_at = [&](double log_w) { return ratio(std::exp(log_w)); };

  const double llo = std::log(grid.lo);
  const double lhi = std::log(grid.hi);
  std::vector<double> values(static_cast<std::size_t>(grid.points));
  std::size_t best = 0;
  for (int i = 0; i < grid.points; ++i) {
    const double lw = llo + (lhi - llo) * i / (grid.points - 1);
    values[static_cast<std::size_t>(i)] = log_ratio_at(lw);
    if (values[static_cast<std::size_t>(i)] > values[best]) best = static_cast<std::size_t>(i);
  }

  // Tail: the ratio behaves like w^(2 (r_m - r_tau)) far above the network's
  // bandwidth, so a log-log slope near 2 or more signals divergence.
  const double far1 = grid.hi * 1e3;
  const double far2 = grid.hi * 1e4;
  const double r1 = ratio(far1);
  const double r2 = ratio(far2);
  const double slope = std::log(r2 / r1) / std::log(far2 / far1);
  if (slope > 1.0) return {kUnbounded, kUnbounded};
  if (slope > 0.05) {
    throw GridTooCoarse("ambiguous high-frequency slope " + std::to_string(slope) +
                        "; extend the grid");
  }

  OracleResult out;
  out.value = values[best];
  out.peak_frequency = std::exp(llo + (lhi - llo) * static_cast<double>(best) / (grid.points - 1));

  if (best > 0 && best + 1 < values.size()) {
    const double step = (lhi - llo) / (grid.points - 1);
    double a = llo + step * static_cast<double>(best - 1);
    double b = llo + step * static_cast<double>(best + 1);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = log_ratio_at(c);
    double fd = log_ratio_at(d);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = log_ratio_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = log_ratio_at(d);
      }
    }
    const double lw = 0.5 * (a + b);
    const double refined = log_ratio_at(lw);
    if (refined > out.value * (1.0 + 1e-2)) {
      throw GridTooCoarse("peak near w = " + std::to_string(std::exp(lw)) +
                          " is sharper than the grid spacing");
    }
    if (refined > out.value) {
      out.value = refined;
      out.peak_frequency = std::exp(lw);
    }
  }

  // Endpoints beyond the grid: static gain and the high-frequency limit.
  const auto dc = evaluate_channels(sys, {0.0, 0.0});
  if (std::norm(dc.monitor) > 0.0) {
    const double r0 = sigma * std::norm(dc.target) / std::norm(dc.monitor);
    if (r0 > out.value) {
      out.value = r0;
      out.peak_frequency = 0.0;
    }
  }
  if (r2 > out.value) {
    out.value = r2;
    out.peak_frequency = kUnbounded;
  }
  return out;
}

}  // namespace stealthrisk
