#include "ksgd/theory.hpp"

#include "ksgd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ksgd {

namespace {

void require_valid(double alpha, double r) {
  if (!(alpha > 1.0)) throw ConfigError("alpha must exceed 1, got " + std::to_string(alpha));
  if (!(r > 0.0)) throw ConfigError("r must be positive, got " + std::to_string(r));
}

// -2 alpha rho / (2 alpha rho + 1)
double optimal_slope(double alpha, double rho) { return -2.0 * alpha * rho / (2.0 * alpha * rho + 1.0); }

// (-2 alpha rho - 1 + alpha) / (2 alpha rho + 1)
double balanced_exponent(double alpha, double rho) {
  return (-2.0 * alpha * rho - 1.0 + alpha) / (2.0 * alpha * rho + 1.0);
}

}  // namespace

std::string_view to_string(Setting s) {
  return s == Setting::FiniteHorizon ? "fh" : "online";
}

Setting parse_setting(std::string_view text) {
  if (text == "fh" || text == "finite_horizon") return Setting::FiniteHorizon;
  if (text == "online") return Setting::Online;
  throw ConfigError("unknown setting '" + std::string(text) + "' (expected fh|finite_horizon|online)");
}

std::string_view to_string(RegimeClass c) {
  switch (c) {
    case RegimeClass::BiasDominatedConstantStep: return "bias_dominated_constant_step";
    case RegimeClass::OptimalRegion: return "optimal_region";
    case RegimeClass::Saturation: return "saturation";
  }
  return "unknown";
}

double lower_threshold(double alpha) { return (alpha - 1.0) / (2.0 * alpha); }

double saturation_cap(double alpha, Setting setting) {
  return setting == Setting::FiniteHorizon ? 1.0 : (2.0 * alpha - 1.0) / (2.0 * alpha);
}

RegimeClass classify_regime(double alpha, double r, Setting setting) {
  require_valid(alpha, r);
  if (r < lower_threshold(alpha)) return RegimeClass::BiasDominatedConstantStep;
  if (r > saturation_cap(alpha, setting)) return RegimeClass::Saturation;
  return RegimeClass::OptimalRegion;
}

double step_exponent_finite_horizon(double alpha, double r) {
  require_valid(alpha, r);
  if (r < lower_threshold(alpha)) return 0.0;
  return balanced_exponent(alpha, std::min(r, 1.0));
}

double step_exponent_online(double alpha, double r) {
  require_valid(alpha, r);
  if (r < lower_threshold(alpha)) return 0.0;
  if (r > saturation_cap(alpha, Setting::Online)) return -0.5;
  return balanced_exponent(alpha, r);
}

double step_exponent(double alpha, double r, Setting setting) {
  return setting == Setting::FiniteHorizon ? step_exponent_finite_horizon(alpha, r)
                                           : step_exponent_online(alpha, r);
}

double predicted_rate(double alpha, double r, Setting setting) {
  require_valid(alpha, r);
  if (r < lower_threshold(alpha)) return -2.0 * r;
  return optimal_slope(alpha, std::min(r, saturation_cap(alpha, setting)));
}

double competitor_rate(double r) {
  if (!(r > 0.0)) throw ConfigError("r must be positive");
  return -2.0 * r / (2.0 * r + 1.0);
}

double competitor_step_exponent(double r) { return competitor_rate(r); }

void BoundParams::validate() const {
  if (!(alpha > 1.0)) throw ConfigError("BoundParams: alpha must exceed 1");
  if (!(r > 0.0)) throw ConfigError("BoundParams: r must be positive");
  if (!(s_sq > 0.0) || !(R_sq > 0.0)) throw ConfigError("BoundParams: s_sq and R_sq must be positive");
  if (sigma_sq < 0.0 || source_norm_sq < 0.0)
    throw ConfigError("BoundParams: sigma_sq and source_norm_sq must be non-negative");
}

double bound_residual_q(double n, double gamma, const BoundParams& p) {
  if (p.r < 0.5) return 0.0;
  const double base = std::pow(p.R_sq, p.alpha) * std::pow(gamma, 1.0 + p.alpha) * n * p.s_sq;
  return std::pow(base, (2.0 * p.r - 1.0) / p.alpha);
}

double finite_horizon_bound(double n, double gamma, const BoundParams& p) {
  p.validate();
  if (!(n >= 1.0)) throw ConfigError("finite_horizon_bound: n must be >= 1");
  if (!(gamma > 0.0)) throw ConfigError("finite_horizon_bound: gamma must be positive");
  if (gamma * p.R_sq > 0.25 * (1.0 + 1e-12))
    throw ConfigError("finite_horizon_bound: requires gamma * R^2 <= 1/4, got " +
                      std::to_string(gamma * p.R_sq));
  const double variance = 4.0 * p.sigma_sq / n * (1.0 + std::pow(p.s_sq * gamma * n, 1.0 / p.alpha));
  const double q = bound_residual_q(n, gamma, p);
  const double bias = 4.0 * (1.0 + q) * p.source_norm_sq /
                      (std::pow(gamma, 2.0 * p.r) * std::pow(n, 2.0 * std::min(p.r, 1.0)));
  return variance + bias;
}

double spectral_s_sq(int m) {
  if (m < 1) throw ConfigError("spectral_s_sq: m must be >= 1");
  return std::pow(std::numbers::pi, -2.0 * m);
}

double spline_eigenvalue(int m, long i) {
  if (m < 1 || i < 1) throw ConfigError("spline_eigenvalue: need m >= 1 and i >= 1");
  const long frequency = (i + 1) / 2;
  return std::pow(2.0 * std::numbers::pi * static_cast<double>(frequency), -2.0 * m);
}

double source_norm_sq_truncated(int m, int k, double r_eval, long J) {
  if (m < 1 || k < 1) throw ConfigError("source_norm_sq_truncated: need m >= 1 and k >= 1");
  if (!(r_eval > 0.0) || J < 1) throw ConfigError("source_norm_sq_truncated: need r_eval > 0 and J >= 1");
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  const double exponent = 4.0 * m * r_eval - 2.0 * k;
  double sum = 0.0;
  for (long j = J; j >= 1; --j) sum += std::pow(2.0 * std::numbers::pi * static_cast<double>(j), exponent);
  return 2.0 * fact * fact * sum;
}

}  // namespace ksgd
