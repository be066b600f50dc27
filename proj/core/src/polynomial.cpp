#include "stealthrisk/polynomial.hpp"

#include <Eigen/Eigenvalues>

namespace stealthrisk {

ResolventExpansion::ResolventExpansion(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("resolvent expansion needs a square matrix");
  const Eigen::Index n = a.rows();
  characteristic_.resize(n + 1);
  characteristic_[0] = 1.0;
  b_.reserve(static_cast<std::size_t>(n));
  Matrix bk = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    b_.push_back(bk);
    Matrix ab = a * bk;
    double ck = -ab.trace() / static_cast<double>(k);
    characteristic_[k] = ck;
    ab.diagonal().array() += ck;
    bk = std::move(ab);
  }
}

Vector ResolventExpansion::numerator(const Vector& b, const Vector& c) const {
  Vector out(static_cast<Eigen::Index>(b_.size()));
  for (std::size_t k = 0; k < b_.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = c.dot(b_[k] * b);
  }
  return out;
}

Vector ResolventExpansion::numerator(int input, int output) const {
  Vector out(static_cast<Eigen::Index>(b_.size()));
  for (std::size_t k = 0; k < b_.size(); ++k) out[static_cast<Eigen::Index>(k)] = b_[k](output, input);
  return out;
}

namespace {

// Parlett-Reinsch diagonal similarity with power-of-two factors so that row
// and column norms of the off-diagonal part roughly agree.
void balance(Matrix& m) {
  const Eigen::Index n = m.rows();
  const double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = m.col(i).lpNorm<1>() - std::abs(m(i, i));
      double row = m.row(i).lpNorm<1>() - std::abs(m(i, i));
      if (col == 0.0 || row == 0.0) continue;
      double g = row / radix;
      double f = 1.0;
      const double s = col + row;
      while (col < g) {
        f *= radix;
        col *= radix * radix;
      }
      g = row * radix;
      while (col > g) {
        f /= radix;
        col /= radix * radix;
      }
      if ((col + row) / f < 0.95 * s) {
        converged = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(const Vector& coefficients) {
  const Eigen::Index degree = coefficients.size() - 1;
  if (degree < 1) return {};
  if (coefficients[0] == 0.0) throw Error("leading polynomial coefficient is zero");

  Matrix companion = Matrix::Zero(degree, degree);
  for (Eigen::Index j = 0; j < degree; ++j) companion(0, j) = -coefficients[j + 1] / coefficients[0];
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  balance(companion);

  Eigen::EigenSolver<Matrix> solver(companion, false);
  if (solver.info() != Eigen::Success) throw SolverFailure("companion eigenvalue solve failed");

  std::vector<std::complex<double>> roots;
  roots.reserve(static_cast<std::size_t>(degree));
  Vector derivative(degree);
  for (Eigen::Index k = 0; k < degree; ++k) {
    derivative[k] = coefficients[k] * static_cast<double>(degree - k);
  }
  for (Eigen::Index k = 0; k < degree; ++k) {
    std::complex<double> z = solver.eigenvalues()[k];
    // One guarded Newton step; kept only when it shrinks the residual.
    std::complex<double> f = polynomial_eval(coefficients, z);
    std::complex<double> df = polynomial_eval(derivative, z);
    if (std::abs(df) > 0.0) {
      std::complex<double> candidate = z - f / df;
      if (std::abs(polynomial_eval(coefficients, candidate)) < std::abs(f)) z = candidate;
    }
    roots.push_back(z);
  }
  return roots;
}

double polynomial_eval(const Vector& coefficients, double x) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) acc = acc * x + coefficients[k];
  return acc;
}

std::complex<double> polynomial_eval(const Vector& coefficients, std::complex<double> x) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) acc = acc * x + coefficients[k];
  return acc;
}

}  // namespace stealthrisk
