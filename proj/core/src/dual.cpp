#include "ntkmc/dual.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ntkmc/errors.hpp"

namespace ntkmc {

namespace {

constexpr double kPi = std::numbers::pi;

double relu_dual(double xi) {
  return (xi * (kPi - std::acos(xi)) + std::sqrt(std::max(0.0, 1.0 - xi * xi))) / kPi;
}

double relu_dual_derivative(double xi) { return (kPi - std::acos(xi)) / kPi; }

}  // namespace

Activation Activation::leaky_relu(double slope) {
  if (!(slope >= 0.0 && slope < 1.0)) {
    std::ostringstream msg;
    msg << "leaky_relu slope must lie in [0, 1), got " << slope;
    throw DomainError(msg.str());
  }
  return {Kind::LeakyRelu, slope};
}

Activation Activation::parse(const std::string& text) {
  if (text == "relu") return relu();
  if (text == "linear") return linear();
  if (text == "leaky_relu") return leaky_relu(0.01);
  const std::string prefix = "leaky_relu:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string rest = text.substr(prefix.size());
      const double slope = std::stod(rest, &used);
      if (used == rest.size()) return leaky_relu(slope);
    } catch (const std::logic_error&) {
    }
  }
  throw DomainError("unknown activation '" + text + "' (expected relu, linear, leaky_relu[:slope])");
}

std::string Activation::to_string() const {
  switch (kind) {
    case Kind::Relu:
      return "relu";
    case Kind::Linear:
      return "linear";
    case Kind::LeakyRelu: {
      // Shortest text that parses back to the same double.
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, slope);
      return "leaky_relu:" + std::string(buf, res.ptr);
    }
  }
  return "relu";
}

double Activation::apply(double x) const {
  switch (kind) {
    case Kind::Relu:
      return x > 0.0 ? x : 0.0;
    case Kind::LeakyRelu:
      return x > 0.0 ? x : slope * x;
    case Kind::Linear:
      return x;
  }
  return x;
}

double Activation::derivative(double x) const {
  switch (kind) {
    case Kind::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Kind::LeakyRelu:
      return x > 0.0 ? 1.0 : slope;
    case Kind::Linear:
      return 1.0;
  }
  return 1.0;
}

double Activation::normalization_sq() const {
  switch (kind) {
    case Kind::Relu:
      return 2.0;
    case Kind::LeakyRelu:
      return 2.0 / (1.0 + slope * slope);
    case Kind::Linear:
      return 1.0;
  }
  return 1.0;
}

double clamp_correlation(double xi) {
  if (!(std::abs(xi) <= 1.0 + kCorrelationSlack)) {
    std::ostringstream msg;
    msg << "correlation " << xi << " lies outside [-1, 1]";
    throw DomainError(msg.str());
  }
  return std::clamp(xi, -1.0, 1.0);
}

// Leaky relu: phi = (1-a) relu + a id. By bilinearity of the Gaussian
// expectation, E[phi(u)phi(v)] = (1-a)^2 relu_dual/2 + a xi, and
// E[phi(u)^2] = (1 + a^2)/2.
double dual(const Activation& act, double xi) {
  xi = clamp_correlation(xi);
  switch (act.kind) {
    case Activation::Kind::Relu:
      return relu_dual(xi);
    case Activation::Kind::Linear:
      return xi;
    case Activation::Kind::LeakyRelu: {
      const double a = act.slope;
      return ((1.0 - a) * (1.0 - a) * relu_dual(xi) + 2.0 * a * xi) / (1.0 + a * a);
    }
  }
  return xi;
}

double dual_derivative(const Activation& act, double xi) {
  xi = clamp_correlation(xi);
  switch (act.kind) {
    case Activation::Kind::Relu:
      return relu_dual_derivative(xi);
    case Activation::Kind::Linear:
      return 1.0;
    case Activation::Kind::LeakyRelu: {
      const double a = act.slope;
      return ((1.0 - a) * (1.0 - a) * relu_dual_derivative(xi) + 2.0 * a) / (1.0 + a * a);
    }
  }
  return 1.0;
}

double iterated_dual(const Activation& act, int h, double xi) {
  if (h < 0) throw DomainError("iterated_dual requires h >= 0");
  xi = clamp_correlation(xi);
  for (int step = 0; step < h; ++step) xi = dual(act, xi);
  return xi;
}

double kappa(const Activation& act, int d, double xi) {
  if (d < 1) throw DomainError("kappa requires depth d >= 1");
  xi = clamp_correlation(xi);
  double value = xi;  // kappa_0
  double inner = xi;  // dual^(h-1)(xi)
  for (int h = 1; h <= d; ++h) {
    const double slope = dual_derivative(act, inner);
    inner = dual(act, inner);
    value = inner + value * slope;
  }
  return value;
}

}  // namespace ntkmc
