#pragma once

#include <optional>
#include <string_view>

#include "stealthrisk/common.hpp"
#include "stealthrisk/sdp_solver.hpp"
#include "stealthrisk/sysid.hpp"

namespace stealthrisk {

enum class UnboundedCause {
  None,
  RelativeDegree,     // structural precheck: r_m > r_tau
  UnstableZero,       // structural precheck: monitor channel zero in the closed RHP
  KrylovCertificate,  // the LMI itself is infeasible for every gamma
  CapHit,             // infeasible at gamma_cap
};

std::string_view to_string(UnboundedCause cause);

enum class ImpactMethod {
  Joint,      // one SDP with gamma as a decision variable
  Bisection,  // bisection on gamma over capped feasibility problems
};

struct ImpactProblem {
  SystemRealization sys;
  double alarm_threshold = 1.0;
  double gamma_cap = 1e6;
};

struct ImpactOptions {
  ImpactMethod method = ImpactMethod::Joint;
  bool structural_precheck = true;
  sdp::SolverOptions solver;
  int bisection_iterations = 53;
  // Trace bound on the reduced storage matrix in feasibility subproblems.
  double trace_bound = 1e6;
};

struct SolverStats {
  int iterations = 0;
  int subproblems = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
};

struct ImpactResult {
  double value = kUnbounded;
  UnboundedCause cause = UnboundedCause::None;
  Matrix certificate;         // P for finite results
  double lmi_max_eigenvalue = 0.0;
  double p_min_eigenvalue = 0.0;
  SolverStats stats;

  bool bounded() const { return !is_unbounded(value); }
};

// Dissipation block matrix
//   [[A^T P + P A - (gamma / sigma) e_m e_m^T + e_tau e_tau^T, P e_a],
//    [e_a^T P,                                               0     ]]
// with A = -L. Feasibility (<= 0) bounds the target energy by gamma times the
// monitor energy budget sigma.
Matrix assemble_lmi(const SystemRealization& sys, double gamma, const Matrix& p,
                    double sigma = 1.0);

// Exact reduction of the LMI to the face it is confined to. P must vanish on
// the Krylov vectors A^k e_a that are invisible to the monitor, so
// P = T S T^T; the dissipation block only needs to hold on the complement
// spanned by U.
struct ReducedLmi {
  Matrix t;  // N x n_s, orthonormal
  Matrix u;  // N x n_x, orthonormal
  int monitor_delay = 0;  // relative degree of the monitor channel minus one
  // Set when some A^k e_a reaches the target before the monitor; the LMI is
  // then infeasible for every gamma and this is the certificate direction.
  std::optional<Vector> unbounded_direction;
};

ReducedLmi reduce_lmi(const SystemRealization& sys);

// Dual-form data for  min gamma  s.t. S PSD, U^T X(gamma, T S T^T) U <= 0.
sdp::DualProblem joint_problem(const SystemRealization& sys, const ReducedLmi& red,
                               double sigma = 1.0);

// Dual-form data for the capped feasibility test at fixed gamma:
//   min t  s.t.  S PSD, U^T X U <= t I, tr(S) <= trace_bound.
sdp::DualProblem feasibility_problem(const SystemRealization& sys, const ReducedLmi& red,
                                     double gamma, double trace_bound, double sigma = 1.0);

// Rebuilds P = T S T^T from the reduced storage matrix.
Matrix expand_storage(const ReducedLmi& red, const Vector& s_coordinates);

// Minimal gamma with P PSD and assemble_lmi(...) <= 0. Throws SolverFailure
// when the interior-point method does not converge.
ImpactResult solve_impact(const ImpactProblem& problem, const ImpactOptions& options = {});

struct FrequencyGrid {
  double lo = 1e-4;
  double hi = 1e4;
  int points = 2000;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

struct OracleResult {
  double value = kUnbounded;
  double peak_frequency = 0.0;  // rad/s; +inf when the supremum is the high-frequency limit
};

// sup_w |G_tau(jw)|^2 / |G_m(jw)|^2 * sigma evaluated directly from the
// resolvent, independent of the LMI machinery.
OracleResult impact_oracle_frequency(const SystemRealization& sys, const FrequencyGrid& grid = {},
                                     double sigma = 1.0);

}  // namespace stealthrisk
