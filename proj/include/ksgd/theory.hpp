#pragma once

#include <string_view>

namespace ksgd {

/// How the step sizes relate to the sample count.
enum class Setting {
  FiniteHorizon,  ///< constant step chosen from the known horizon n
  Online,         ///< gamma_i = gamma0 * i^{-zeta}, horizon-free
};

std::string_view to_string(Setting s);
/// Accepts "fh"/"finite_horizon" and "online". Throws ConfigError.
Setting parse_setting(std::string_view text);

enum class RegimeClass {
  BiasDominatedConstantStep,  ///< r < (alpha-1)/(2 alpha): constant step, rate n^{-2r}
  OptimalRegion,              ///< minimax-optimal rate n^{-2 alpha r/(2 alpha r + 1)}
  Saturation,                 ///< r beyond the cap: rate frozen at the cap value
};

std::string_view to_string(RegimeClass c);

/// Lower edge of the optimal region, (alpha - 1)/(2 alpha).
double lower_threshold(double alpha);
/// Upper edge: 1 for the finite horizon, (2 alpha - 1)/(2 alpha) online.
double saturation_cap(double alpha, Setting setting);

RegimeClass classify_regime(double alpha, double r, Setting setting);

/// Exponent e of the optimal constant step Gamma(n) = gamma0 * n^e.
double step_exponent_finite_horizon(double alpha, double r);
/// Exponent e of the optimal decreasing step gamma_n = gamma0 * n^e.
double step_exponent_online(double alpha, double r);
double step_exponent(double alpha, double r, Setting setting);

/// Predicted log-log slope of the expected excess risk of the averaged iterate.
double predicted_rate(double alpha, double r, Setting setting);

/// Slope -2r/(2r+1) shared by the unregularized and regularized competitors.
double competitor_rate(double r);
/// Step exponent -2r/(2r+1) used by the competitors.
double competitor_step_exponent(double r);

/// Constants entering the finite-horizon error bound.
struct BoundParams {
  double alpha;           ///< eigenvalue decay: mu_i <= s_sq / i^alpha
  double r;               ///< source exponent: g in T^r(L2)
  double s_sq;
  double sigma_sq;        ///< noise level
  double R_sq;            ///< sup_x K(x, x)
  double source_norm_sq;  ///< ||T^{-r} g||^2 in L2

  void validate() const;
};

/// Residual factor q_{n,gamma,s,r}; zero for r < 1/2.
double bound_residual_q(double n, double gamma, const BoundParams& p);

/// Upper bound on E||g_bar_n - g||^2 for a constant step gamma over n samples:
///   4 sigma^2/n (1 + (s^2 gamma n)^{1/alpha})
///     + 4 (1 + q) ||T^{-r} g||^2 / (gamma^{2r} n^{2 min(r, 1)}).
/// Requires gamma * R_sq <= 1/4.
double finite_horizon_bound(double n, double gamma, const BoundParams& p);

/// Tight constant s^2 for the spline kernel R_m: with the doubled eigenvalues
/// sorted, sup_i i^{2m} mu_i = pi^{-2m}.
double spectral_s_sq(int m);

/// Eigenvalue number i (1-based, non-increasing order) of the covariance
/// operator of R_m under the uniform law.
double spline_eigenvalue(int m, long i);

/// Partial sum over frequencies 1..J of ||T^{-r} B_k||^2 for the kernel R_m:
///   sum_j 2 (k!)^2 (2 pi j)^{4 m r - 2k}.
/// Converges as J -> infinity iff 2k - 4 m r > 1.
double source_norm_sq_truncated(int m, int k, double r_eval, long J);

}  // namespace ksgd
