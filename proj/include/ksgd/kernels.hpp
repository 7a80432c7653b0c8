#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <span>
#include <vector>

namespace ksgd {

/// A positive-definite kernel on points of type K::Point.
template <class K>
concept Kernel = requires(const K& k, const typename K::Point& p) {
  typename K::Point;
  { k(p, p) } -> std::convertible_to<double>;
};

/// Periodic spline kernel of order m on [0, 1):
///   R_m(s, t) = (-1)^{m-1} / (2m)! * B_{2m}(frac(s - t))
///            = sum_j 2 (2 pi j)^{-2m} cos(2 pi j (s - t)).
/// Zero-mean, translation invariant; the covariance operator under the uniform
/// law has eigenvalues (2 pi j)^{-2m}, each with multiplicity two.
class PeriodicSplineKernel {
public:
  using Point = double;

  /// Orders up to 8 are constructible so that the order-doubled kernel
  /// R_{2m} exists for every testbed order m <= 4.
  static constexpr int kMinOrder = 1;
  static constexpr int kMaxOrder = 8;

  explicit PeriodicSplineKernel(int m);

  double operator()(double s, double t) const;

  int order() const noexcept { return m_; }
  /// Eigenvalue decay exponent alpha = 2m.
  int alpha() const noexcept { return 2 * m_; }
  /// R^2 = sup_x K(x, x) = R_m(0, 0).
  double sup_sq() const noexcept { return coeffs_.front(); }

private:
  int m_;
  std::vector<double> coeffs_;  // B_{2m} scaled by (-1)^{m-1}/(2m)!
};

/// Plain dot product on R^d.
class LinearKernel {
public:
  using Point = Eigen::VectorXd;

  explicit LinearKernel(int dimension);

  double operator()(const Point& u, const Point& v) const;

  int dimension() const noexcept { return d_; }
  /// sup K(x, x) over the ball of radius rho.
  static double sup_sq(double rho) { return rho * rho; }

private:
  int d_;
};

/// Orders accepted by the spline testbed: m in {1, 2, 3, 4}.
bool is_supported_spline_order(int m);

double spline_kernel(int m, double s, double t);

/// Truncated series sum_{j=1}^{J} 2/(2 pi j)^{2m} cos(2 pi j (s - t)).
double spline_kernel_series(int m, double s, double t, int J);

double kernel_sup_sq(int m);

template <Kernel K>
Eigen::MatrixXd gram(const K& kernel, std::span<const typename K::Point> xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = kernel(xs[i], xs[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel(xs[i], xs[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

enum class FourierBasis { Cosine, Sine };

struct EigenCheck {
  double lhs;  ///< quadrature of (T phi)(s)
  double rhs;  ///< mu_i phi(s)
};

/// Applies the integral operator of R_m to phi_i = sqrt(2) cos(2 pi i t) (or
/// sine) by periodic trapezoid quadrature and returns it next to
/// (2 pi i)^{-2m} phi_i(s).
EigenCheck eigen_check(int m, int i, double s, int quad_points,
                       FourierBasis basis = FourierBasis::Cosine);

}  // namespace ksgd
