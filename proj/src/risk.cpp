#include "ksgd/risk.hpp"

#include "ksgd/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace ksgd {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void require_target(int k) {
  // B_k with k >= 1 is zero-mean; the closed form needs B_{2m+k} in the table.
  if (k < 1 || k > kMaxBernoulliDegree) throw ConfigError("target index k = " + std::to_string(k) + " unsupported");
}

// sum_{j > J} j^{-p} for p > 1 by Euler-Maclaurin about J.
double zeta_tail(double p, double J) {
  return std::pow(J, 1.0 - p) / (p - 1.0) - 0.5 * std::pow(J, -p) + p / 12.0 * std::pow(J, -p - 1.0) -
         p * (p + 1.0) * (p + 2.0) / 720.0 * std::pow(J, -p - 3.0);
}

}  // namespace

Rational target_norm_sq_exact(int k) {
  require_target(k);
  const auto& c = bernoulli_polynomial(k).coeffs;
  // int_0^1 x^{i+j} dx = 1/(i+j+1)
  Rational acc = 0;
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) acc += c[i] * c[j] / Rational(i + j + 1);
  return acc;
}

double target_norm_sq(int k) { return target_norm_sq_exact(k).convert_to<double>(); }

TargetFunction::TargetFunction(int k_) : k(k_), norm_sq(target_norm_sq(k_)) {}

SplineRiskEvaluator::SplineRiskEvaluator(int m, int k) : m_(m), k_(k), target_(k), doubled_(2 * m) {
  if (!is_supported_spline_order(m)) throw ConfigError("unsupported spline order m = " + std::to_string(m));
  require_target(2 * m + k);
  const double scale = (m % 2 == 0 ? 1.0 : -1.0) * factorial(k) / factorial(2 * m + k);
  inner_coeffs_ = bernoulli_coefficients(2 * m + k);
  for (double& c : inner_coeffs_) c *= scale;
}

double SplineRiskEvaluator::inner_with_target(double x) const {
  const double u = frac(x);
  double acc = 0.0;
  for (auto it = inner_coeffs_.rbegin(); it != inner_coeffs_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

double SplineRiskEvaluator::excess_risk(const KernelExpansion<double>& g) const {
  const std::vector<double> c = g.effective_coeffs();
  const std::size_t n = c.size();
  // Rows are summed independently and then added in index order.
  double quad = 0.0;
  const double diag = doubled_.sup_sq();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < i; ++j) row += c[j] * doubled_(g.centers[i], g.centers[j]);
    quad += c[i] * (c[i] * diag + 2.0 * row);
  }
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) cross += c[i] * inner_with_target(g.centers[i]);
  return quad - 2.0 * cross + target_.norm_sq;
}

double kernel_target_inner(int m, int k, double x) { return SplineRiskEvaluator(m, k).inner_with_target(x); }

double excess_risk_closed(const KernelExpansion<double>& g, int m, int k) {
  return SplineRiskEvaluator(m, k).excess_risk(g);
}

double excess_risk_fourier(const KernelExpansion<double>& g, int m, int k, long J, FourierTail tail) {
  if (J < 1) throw ConfigError("excess_risk_fourier: J must be >= 1");
  if (m < 1 || k < 1) throw ConfigError("excess_risk_fourier: need m >= 1 and k >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const std::vector<double> c = g.effective_coeffs();
  const std::size_t n = c.size();

  // e^{2 pi i j x} advanced by repeated multiplication, reseeded periodically.
  std::vector<std::complex<double>> rot(n), cur(n);
  for (std::size_t i = 0; i < n; ++i) rot[i] = std::polar(1.0, two_pi * frac(g.centers[i]));

  const double kf = factorial(k);
  const double tc = -std::numbers::sqrt2 * kf * std::cos(k * std::numbers::pi / 2.0);
  const double ts = -std::numbers::sqrt2 * kf * std::sin(k * std::numbers::pi / 2.0);

  double total = 0.0;
  for (long j = 1; j <= J; ++j) {
    if ((j - 1) % 512 == 0) {
      for (std::size_t i = 0; i < n; ++i) cur[i] = std::polar(1.0, two_pi * static_cast<double>(j) * frac(g.centers[i]));
    } else {
      for (std::size_t i = 0; i < n; ++i) cur[i] *= rot[i];
    }
    double sc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sc += c[i] * cur[i].real();
      ss += c[i] * cur[i].imag();
    }
    const double w = two_pi * static_cast<double>(j);
    const double mu = std::pow(w, -2.0 * m);
    const double tk = std::pow(w, -static_cast<double>(k));
    const double da = std::numbers::sqrt2 * mu * sc - tc * tk;
    const double db = std::numbers::sqrt2 * mu * ss - ts * tk;
    total += da * da + db * db;
  }
  if (tail == FourierTail::EulerMaclaurin) {
    const double p = 2.0 * k;
    total += 2.0 * kf * kf * std::pow(two_pi, -p) * zeta_tail(p, static_cast<double>(J));
  }
  return total;
}

double excess_risk_mc(const KernelExpansion<double>& g, int m, int k, long grid_size) {
  if (grid_size < 1000) throw ConfigError("excess_risk_mc: grid_size must be >= 1000");
  const PeriodicSplineKernel kernel(m);
  const auto diff_sq = [&](double x) {
    const double d = evaluate(g, kernel, x) - bernoulli_poly(k, x);
    return d * d;
  };
  const double h = 1.0 / static_cast<double>(grid_size);
  double acc = 0.5 * (diff_sq(0.0) + diff_sq(1.0));
  for (long i = 1; i < grid_size; ++i) acc += diff_sq(static_cast<double>(i) * h);
  return acc * h;
}

double excess_risk_finite_dim(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_star,
                              const Eigen::MatrixXd& covariance) {
  const auto d = theta.size();
  if (theta_star.size() != d || covariance.rows() != d || covariance.cols() != d)
    throw DimensionError("excess_risk_finite_dim: dimension mismatch");
  const Eigen::VectorXd diff = theta - theta_star;
  return diff.dot(covariance * diff);
}

RiskReport assess_risk(const KernelExpansion<double>& g, int m, int k, RiskMethod method, long resolution) {
  double value = 0.0;
  switch (method) {
    case RiskMethod::Closed: value = excess_risk_closed(g, m, k); break;
    case RiskMethod::Fourier: value = excess_risk_fourier(g, m, k, resolution, FourierTail::EulerMaclaurin); break;
    case RiskMethod::MonteCarlo: value = excess_risk_mc(g, m, k, resolution); break;
  }
  if (value < 0.0 && value >= -1e-12) value = 0.0;
  return {value, method};
}

}  // namespace ksgd
