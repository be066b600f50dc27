#pragma once

#include <complex>
#include <vector>

#include "stealthrisk/common.hpp"

namespace stealthrisk {

// Resolvent expansion adj(sI - A) = sum_k B_k s^(n-1-k) and
// det(sI - A) = s^n + c_1 s^(n-1) + ... + c_n, computed by the
// Faddeev-LeVerrier recursion. Coefficient vectors are stored highest degree
// first.
class ResolventExpansion {
 public:
  explicit ResolventExpansion(const Matrix& a);

  int order() const { return static_cast<int>(characteristic_.size()) - 1; }
  // [1, c_1, ..., c_n]
  const Vector& characteristic() const { return characteristic_; }
  const Matrix& adjugate_coefficient(int k) const { return b_[static_cast<std::size_t>(k)]; }

  // Coefficients of the numerator of c^T (sI - A)^{-1} b, length n, highest
  // degree first.
  Vector numerator(const Vector& b, const Vector& c) const;
  // Same for unit vectors e_input and e_output^T.
  Vector numerator(int input, int output) const;

 private:
  Vector characteristic_;
  std::vector<Matrix> b_;
};

// Roots of a polynomial given highest degree first. Leading coefficients that
// are exactly zero must be stripped by the caller.
std::vector<std::complex<double>> polynomial_roots(const Vector& coefficients);

double polynomial_eval(const Vector& coefficients, double x);
std::complex<double> polynomial_eval(const Vector& coefficients, std::complex<double> x);

}  // namespace stealthrisk
