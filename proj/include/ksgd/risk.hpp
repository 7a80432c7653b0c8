#pragma once

#include "ksgd/bernoulli.hpp"
#include "ksgd/estimator.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ksgd {

/// Regression target g = B_k on [0, 1) (delta = 2k).
struct TargetFunction {
  int k;
  double norm_sq;  ///< ||B_k||^2 in L2[0, 1)

  explicit TargetFunction(int k);
  double operator()(double x) const { return bernoulli_poly(k, frac(x)); }
};

/// ||B_k||^2 in L2[0,1), integrating the squared polynomial exactly.
Rational target_norm_sq_exact(int k);
double target_norm_sq(int k);

/// <K_x, B_k> in L2 for the kernel R_m:
///   (-1)^m k!/(2m+k)! B_{2m+k}(frac(x)).
double kernel_target_inner(int m, int k, double x);

/// Evaluates ||g - B_k||^2 for spline expansions using
///   <K_x, K_y> = R_{2m}(x, y),  <K_x, B_k>,  ||B_k||^2.
class SplineRiskEvaluator {
public:
  SplineRiskEvaluator(int m, int k);

  double excess_risk(const KernelExpansion<double>& g) const;
  double inner_with_target(double x) const;

  int m() const noexcept { return m_; }
  int k() const noexcept { return k_; }
  double target_norm_sq() const noexcept { return target_.norm_sq; }

private:
  int m_;
  int k_;
  TargetFunction target_;
  PeriodicSplineKernel doubled_;  // R_{2m}
  std::vector<double> inner_coeffs_;
};

/// Closed-form excess risk of a spline expansion for the target B_k. O(n^2).
double excess_risk_closed(const KernelExpansion<double>& g, int m, int k);

enum class FourierTail {
  None,            ///< plain partial sum over frequencies 1..J
  EulerMaclaurin,  ///< adds the target-only tail sum_{j>J} |B_k coefficient|^2
};

/// Excess risk from the Fourier coordinates of the expansion and of B_k on the
/// orthonormal basis sqrt(2) cos / sqrt(2) sin, frequencies 1..J.
double excess_risk_fourier(const KernelExpansion<double>& g, int m, int k, long J,
                           FourierTail tail = FourierTail::None);

/// Trapezoid quadrature of (g(x) - B_k(x))^2 on a uniform grid of [0, 1].
double excess_risk_mc(const KernelExpansion<double>& g, int m, int k, long grid_size);

/// (theta - theta_star)^T Sigma (theta - theta_star).
double excess_risk_finite_dim(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_star,
                              const Eigen::MatrixXd& covariance);

enum class RiskMethod { Closed, Fourier, MonteCarlo };

struct RiskReport {
  double excess_risk;
  RiskMethod method;
};

/// Tiny negative round-off (>= -1e-12) is clamped to zero.
RiskReport assess_risk(const KernelExpansion<double>& g, int m, int k, RiskMethod method,
                       long resolution = 100000);

}  // namespace ksgd
