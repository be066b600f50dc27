#pragma once

#include <complex>
#include <string_view>
#include <utility>
#include <vector>

#include "stealthrisk/common.hpp"
#include "stealthrisk/netgraph.hpp"

namespace stealthrisk {

enum class Channel { Target, Monitor };

// Single-input, two-output realization (-L, e_a, [e_tau, e_m]^T, 0).
// Vertex indices are 0-based.
class SystemRealization {
 public:
  SystemRealization(Matrix a_matrix, int attack, int target, int monitor);

  static SystemRealization from_laplacian(const Matrix& laplacian, int attack, int target,
                                          int monitor);

  const Matrix& a_matrix() const { return a_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int attack_vertex() const { return attack_; }
  int target_vertex() const { return target_; }
  int monitor_vertex() const { return monitor_; }
  int output_vertex(Channel ch) const { return ch == Channel::Target ? target_ : monitor_; }

  // Same channels, state matrix A - shift * I.
  SystemRealization shifted(double shift) const;

 private:
  Matrix a_;
  int attack_;
  int target_;
  int monitor_;
};

// |C A^k B| below kMarkovTolerance * ||A||^k counts as zero.
inline constexpr double kMarkovTolerance = 1e-9;
// Zeros with real part >= -kStabilityMargin are unstable.
inline constexpr double kStabilityMargin = 1e-9;

int relative_degree(const SystemRealization& sys, Channel output);

struct ZeroReport {
  std::vector<std::complex<double>> finite_zeros;
  int infinite_zero_count = 0;
  bool has_unstable_finite_zero = false;

  double max_real_part() const;
};

ZeroReport invariant_zeros(const SystemRealization& sys, Channel output);

// Zeros of e_output^T (sI - A)^{-1} e_input for an arbitrary square A.
ZeroReport channel_zeros(const Matrix& a, int input, int output);

// Smallest uniform self-loop offset theta0 >= 0 (plus a small pad) that moves
// every monitor-channel zero of the given samples into the open left
// half-plane. Pairs are (attack, monitor), 0-based.
double design_gain_shift(const UncertainNetwork& net, const std::vector<SampledLaplacian>& samples,
                         const std::vector<std::pair<int, int>>& pairs);

enum class Verdict { Feasible, InfeasibleRelativeDegree, InfeasibleUnstableZero };

std::string_view to_string(Verdict v);

Verdict feasibility_verdict(const SystemRealization& sys);

}  // namespace stealthrisk
