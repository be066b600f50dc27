#pragma once

#include "stealthrisk/common.hpp"

namespace stealthrisk {

struct LpSolution {
  Vector x;
  Vector duals;  // one per constraint row
  double objective = 0.0;
  int pivots = 0;
  // Some nonbasic column has zero reduced cost at the optimum, so other
  // optimal vertices may exist.
  bool alternative_optima = false;
};

// maximize c^T x  subject to  A x <= b, x >= 0, with b >= 0 so the slack
// basis is feasible. Dense tableau, Bland's rule. Throws Error when the
// problem is unbounded.
LpSolution maximize_canonical(const Matrix& a, const Vector& b, const Vector& c);

}  // namespace stealthrisk
