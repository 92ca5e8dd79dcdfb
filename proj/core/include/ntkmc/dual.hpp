#pragma once

#include <string>

namespace ntkmc {

/// Degree-1 homogeneous activation. `slope` is only meaningful for
/// LeakyRelu, where phi(x) = max(x, slope * x) with 0 <= slope < 1.
struct Activation {
  enum class Kind { Relu, LeakyRelu, Linear };

  Kind kind = Kind::Relu;
  double slope = 0.0;

  static Activation relu() { return {Kind::Relu, 0.0}; }
  static Activation linear() { return {Kind::Linear, 0.0}; }
  /// Throws DomainError unless 0 <= slope < 1.
  static Activation leaky_relu(double slope);

  /// Parses "relu", "linear", "leaky_relu" or "leaky_relu:0.05".
  static Activation parse(const std::string& text);
  std::string to_string() const;

  /// phi(x) itself (unnormalized), used by finite-width reference networks.
  double apply(double x) const;
  /// phi'(x); at 0 the left branch is used (0 for relu, slope for leaky).
  double derivative(double x) const;
  /// c^2 = 1 / E[phi(u)^2], u ~ N(0, 1).
  double normalization_sq() const;

  friend bool operator==(const Activation&, const Activation&) = default;
};

/// Correlations within this distance outside [-1, 1] are clamped; anything
/// further is a DomainError.
inline constexpr double kCorrelationSlack = 1e-7;

/// Dual activation c^2 E[phi(u) phi(v)] for standard Gaussians with
/// correlation xi. Equals 1 at xi = 1 for every activation.
double dual(const Activation& act, double xi);

/// d/dxi of dual(act, xi) = c^2 E[phi'(u) phi'(v)].
double dual_derivative(const Activation& act, double xi);

/// h-fold composition of dual; h = 0 returns xi (after clamping).
double iterated_dual(const Activation& act, int h, double xi);

/// Depth-d NTK scalar: kappa_0(xi) = xi,
/// kappa_d(xi) = dual^(d)(xi) + kappa_{d-1}(xi) * dual'(dual^(d-1)(xi)).
double kappa(const Activation& act, int d, double xi);

/// Clamp into [-1, 1], throwing if |xi| exceeds 1 + kCorrelationSlack.
double clamp_correlation(double xi);

}  // namespace ntkmc
