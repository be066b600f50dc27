#pragma once

#include <string_view>
#include <vector>

#include "stealthrisk/common.hpp"

namespace stealthrisk::sdp {

// Block-diagonal SDP in dual form:
//
//   maximize  b^T y   subject to   Z = C - sum_i y_i A_i  is PSD,
//
// paired with the primal  minimize <C, X>  s.t.  <A_i, X> = b_i, X PSD.
// Every block of C and of each A_i must be symmetric.
struct DualProblem {
  std::vector<Matrix> c;               // one entry per block
  std::vector<std::vector<Matrix>> a;  // a[i][block]
  Vector b;

  int num_constraints() const { return static_cast<int>(b.size()); }
  int num_blocks() const { return static_cast<int>(c.size()); }
  void validate() const;
};

struct SolverOptions {
  double gap_tolerance = 1e-8;
  double feasibility_tolerance = 1e-8;
  int max_iterations = 100;
  double step_fraction = 0.95;
  double initial_scale = 1.0;
  // Iterates whose norm exceeds this are taken as evidence of infeasibility.
  double divergence_bound = 1e12;
  // When the iteration breaks down (typically a dual optimum approached only
  // in the limit), the best iterate is still reported as NearOptimal if all
  // three measures are below this.
  double near_optimal_tolerance = 1e-6;
};

enum class Status { Optimal, NearOptimal, Infeasible, MaxIterations, NumericalFailure };

std::string_view to_string(Status s);

struct Solution {
  Status status = Status::NumericalFailure;
  Vector y;
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
};

// Infeasible-start primal-dual path following with Nesterov-Todd scaling
// and a Mehrotra predictor-corrector step.
Solution solve(const DualProblem& problem, const SolverOptions& options = {});

// Symmetric basis E_k of the space of n x n symmetric matrices, ordered by
// column-major upper triangle. Off-diagonal elements carry 1/sqrt(2) so the
// basis is orthonormal in the trace inner product.
std::vector<Matrix> symmetric_basis(int n);

}  // namespace stealthrisk::sdp
