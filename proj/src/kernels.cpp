#include "ksgd/kernels.hpp"

#include "ksgd/bernoulli.hpp"
#include "ksgd/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ksgd {

bool is_supported_spline_order(int m) { return m >= 1 && m <= 4; }

PeriodicSplineKernel::PeriodicSplineKernel(int m) : m_(m) {
  if (m < kMinOrder || m > kMaxOrder)
    throw ConfigError("unsupported spline kernel order m = " + std::to_string(m));
  double fact = 1.0;
  for (int i = 2; i <= 2 * m; ++i) fact *= i;
  const double scale = (m % 2 == 1 ? 1.0 : -1.0) / fact;
  coeffs_ = bernoulli_coefficients(2 * m);
  for (double& c : coeffs_) c *= scale;
}

double PeriodicSplineKernel::operator()(double s, double t) const {
  const double x = frac(s - t);
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

LinearKernel::LinearKernel(int dimension) : d_(dimension) {
  if (dimension < 1) throw ConfigError("linear kernel dimension must be positive");
}

double LinearKernel::operator()(const Point& u, const Point& v) const {
  if (u.size() != d_ || v.size() != d_) throw DimensionError("linear kernel: dimension mismatch");
  return u.dot(v);
}

namespace {

void require_supported(int m) {
  if (!is_supported_spline_order(m))
    throw ConfigError("unsupported spline kernel order m = " + std::to_string(m) + " (expected 1..4)");
}

}  // namespace

double spline_kernel(int m, double s, double t) {
  require_supported(m);
  return PeriodicSplineKernel(m)(s, t);
}

double spline_kernel_series(int m, double s, double t, int J) {
  if (m < 1 || J < 1) throw ConfigError("spline_kernel_series: need m >= 1 and J >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double d = frac(s - t);
  double sum = 0.0;
  for (int j = J; j >= 1; --j) sum += 2.0 * std::cos(two_pi * j * d) / std::pow(two_pi * j, 2 * m);
  return sum;
}

double kernel_sup_sq(int m) {
  require_supported(m);
  return PeriodicSplineKernel(m).sup_sq();
}

EigenCheck eigen_check(int m, int i, double s, int quad_points, FourierBasis basis) {
  if (i < 1) throw ConfigError("eigen_check: frequency index must be >= 1");
  if (quad_points < 1000) throw ConfigError("eigen_check: need at least 1000 quadrature points");
  const PeriodicSplineKernel kernel(m);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto phi = [&](double t) {
    const double arg = two_pi * i * t;
    return std::numbers::sqrt2 * (basis == FourierBasis::Cosine ? std::cos(arg) : std::sin(arg));
  };
  // Periodic trapezoid: the end points coincide, so it is the plain grid mean.
  double acc = 0.0;
  for (int q = 0; q < quad_points; ++q) {
    const double t = static_cast<double>(q) / quad_points;
    acc += kernel(s, t) * phi(t);
  }
  return {acc / quad_points, std::pow(two_pi * i, -2.0 * m) * phi(s)};
}

}  // namespace ksgd
