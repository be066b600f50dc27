#include "stealthrisk/sysid.hpp"

#include <algorithm>

#include "stealthrisk/polynomial.hpp"

namespace stealthrisk {

namespace {

double scale_of(const Matrix& a) {
  const double s = a.size() > 0 ? a.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  return s > 0.0 ? s : 1.0;
}

}  // namespace

SystemRealization::SystemRealization(Matrix a_matrix, int attack, int target, int monitor)
    : a_(std::move(a_matrix)), attack_(attack), target_(target), monitor_(monitor) {
  const int n = static_cast<int>(a_.rows());
  if (a_.cols() != n) throw Error("state matrix must be square");
  auto in_range = [n](int v) { return v >= 0 && v < n; };
  if (!in_range(attack_) || !in_range(target_) || !in_range(monitor_)) {
    throw Error("realization vertex index out of range");
  }
  if (attack_ == target_) throw Error("attack vertex must differ from the target vertex");
  if (monitor_ == target_) throw Error("monitor vertex must differ from the target vertex");
}

SystemRealization SystemRealization::from_laplacian(const Matrix& laplacian, int attack,
                                                    int target, int monitor) {
  return SystemRealization(-laplacian, attack, target, monitor);
}

SystemRealization SystemRealization::shifted(double shift) const {
  Matrix a = a_;
  a.diagonal().array() -= shift;
  return SystemRealization(std::move(a), attack_, target_, monitor_);
}

int relative_degree(const SystemRealization& sys, Channel output) {
  const Matrix& a = sys.a_matrix();
  const double s = scale_of(a);
  const int out = sys.output_vertex(output);
  Vector v = Vector::Unit(sys.n(), sys.attack_vertex());
  for (int k = 0; k < sys.n(); ++k) {
    if (std::abs(v[out]) > kMarkovTolerance) return k + 1;
    v = (a * v) / s;
  }
  throw DecoupledChannel("no finite relative degree from vertex " +
                         std::to_string(sys.attack_vertex() + 1) + " to vertex " +
                         std::to_string(out + 1));
}

double ZeroReport::max_real_part() const {
  double m = -kUnbounded;
  for (const auto& z : finite_zeros) m = std::max(m, z.real());
  return m;
}

ZeroReport channel_zeros(const Matrix& a, int input, int output) {
  const double s = scale_of(a);
  ResolventExpansion expansion(a / s);
  Vector num = expansion.numerator(input, output);
  Eigen::Index lead = 0;
  while (lead < num.size() && std::abs(num[lead]) <= kMarkovTolerance) ++lead;
  if (lead == num.size()) {
    throw DecoupledChannel("transfer function from vertex " + std::to_string(input + 1) +
                           " to vertex " + std::to_string(output + 1) + " vanishes");
  }
  ZeroReport report;
  report.infinite_zero_count = static_cast<int>(lead) + 1;
  for (const auto& mu : polynomial_roots(num.tail(num.size() - lead))) {
    report.finite_zeros.push_back(mu * s);
  }
  std::sort(report.finite_zeros.begin(), report.finite_zeros.end(),
            [](const auto& x, const auto& y) {
              return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
            });
  report.has_unstable_finite_zero = report.max_real_part() >= -kStabilityMargin;
  return report;
}

ZeroReport invariant_zeros(const SystemRealization& sys, Channel output) {
  return channel_zeros(sys.a_matrix(), sys.attack_vertex(), sys.output_vertex(output));
}

double design_gain_shift(const UncertainNetwork& net, const std::vector<SampledLaplacian>& samples,
                         const std::vector<std::pair<int, int>>& pairs) {
  if (samples.empty()) throw Error("design_gain_shift needs at least one sample");
  const int n = net.n_vertices();
  for (const auto& s : samples) {
    if (s.matrix.rows() != n) throw Error("sample dimension does not match the network");
  }

  auto worst_zero = [&](double theta0) {
    double worst = -kUnbounded;
    for (const auto& s : samples) {
      Matrix a = -s.matrix;
      a.diagonal().array() -= theta0;
      for (const auto& [attack, monitor] : pairs) {
        worst = std::max(worst, channel_zeros(a, attack, monitor).max_real_part());
      }
    }
    return worst;
  };

  const double worst = worst_zero(0.0);
  if (worst < -kStabilityMargin) return 0.0;
  double pad = 1e-6 * std::max(1.0, std::abs(worst));
  for (int attempt = 0; attempt < 60; ++attempt) {
    const double theta0 = worst + pad;
    if (worst_zero(theta0) < -kStabilityMargin) return theta0;
    pad *= 2.0;
  }
  throw SolverFailure("gain shift could not be verified");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible:
      return "Feasible";
    case Verdict::InfeasibleRelativeDegree:
      return "InfeasibleRelativeDegree";
    case Verdict::InfeasibleUnstableZero:
      return "InfeasibleUnstableZero";
  }
  return "?";
}

Verdict feasibility_verdict(const SystemRealization& sys) {
  const int r_target = relative_degree(sys, Channel::Target);
  const int r_monitor = relative_degree(sys, Channel::Monitor);
  if (r_monitor > r_target) return Verdict::InfeasibleRelativeDegree;
  if (invariant_zeros(sys, Channel::Monitor).has_unstable_finite_zero) {
    return Verdict::InfeasibleUnstableZero;
  }
  return Verdict::Feasible;
}

}  // namespace stealthrisk
