#include "ksgd/selfcheck.hpp"

#include "ksgd/bernoulli.hpp"
#include "ksgd/estimator.hpp"
#include "ksgd/kernels.hpp"
#include "ksgd/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ksgd {

namespace {

CheckResult make(std::string name, double worst, double tol) { return {std::move(name), worst <= tol, worst, tol}; }

KernelExpansion<double> random_expansion(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0), coef(-1.0, 1.0);
  KernelExpansion<double> g;
  for (std::size_t i = 0; i < n; ++i) {
    g.centers.push_back(unit(rng));
    g.coeffs.push_back(coef(rng));
  }
  return g;
}

// <K_x, B_k> from the cosine expansions of R_m and B_k.
double fourier_inner(int m, int k, double x, int J) {
  double kf = 1.0;
  for (int i = 2; i <= k; ++i) kf *= i;
  double sum = 0.0;
  for (int j = J; j >= 1; --j) {
    const double w = 2.0 * std::numbers::pi * j;
    sum += std::cos(w * x - k * std::numbers::pi / 2.0) / std::pow(w, 2 * m + k);
  }
  return -2.0 * kf * sum;
}

}  // namespace

std::vector<CheckResult> run_selfcheck() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(7);

  {
    double worst = 0;
    for (int k = 2; k <= 8; ++k)
      for (int i = 0; i < 21; ++i) {
        const double x = i / 21.0;
        worst = std::max(worst, std::abs(bernoulli_fourier_eval(k, x, 20000) - bernoulli_poly(k, x)));
      }
    out.push_back(make("bernoulli_fourier", worst, 1e-5));
  }
  {
    // Discrepancy relative to the absolute tail bound sum_{j>J} 2 (2 pi j)^{-2m}.
    constexpr int J = 20000;
    double worst = 0;
    for (int m = 1; m <= 2; ++m) {
      const double p = 2.0 * m;
      const double tail = 2.0 * std::pow(2.0 * std::numbers::pi, -p) * std::pow(J, 1.0 - p) / (p - 1.0);
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double s = i / 10.0, t = j / 10.0;
          worst = std::max(worst, std::abs(spline_kernel(m, s, t) - spline_kernel_series(m, s, t, J)) / tail);
        }
    }
    out.push_back(make("spline_kernel_series", worst, 1.0));
  }
  {
    double worst = 0;
    for (int m = 1; m <= 2; ++m)
      for (int i = 1; i <= 5; ++i) {
        const auto e = eigen_check(m, i, 0.13, 10000);
        worst = std::max(worst, std::abs(e.lhs - e.rhs) / std::abs(e.rhs));
      }
    out.push_back(make("covariance_eigenpairs", worst, 1e-6));
  }
  {
    double worst = 0;
    for (int m = 1; m <= 2; ++m)
      for (int k = 1; k <= 3; ++k)
        for (int i = 0; i < 7; ++i) {
          const double x = i / 7.0 + 0.01;
          worst = std::max(worst, std::abs(fourier_inner(m, k, x, 20000) - kernel_target_inner(m, k, x)));
        }
    out.push_back(make("kernel_target_inner", worst, 1e-9));
  }
  {
    double worst = 0;
    for (int k = 1; k <= 3; ++k)
      worst = std::max(worst, std::abs(target_norm_sq(k) - excess_risk_fourier({}, 1, k, 20000, FourierTail::EulerMaclaurin)));
    out.push_back(make("target_norm_parseval", worst, 1e-12));
  }
  {
    double worst_fourier = 0, worst_quad = 0;
    for (int trial = 0; trial < 6; ++trial) {
      const int m = 1 + trial % 2, k = 1 + trial % 3;
      auto g = random_expansion(rng, 8);
      const double closed = excess_risk_closed(g, m, k);
      worst_fourier = std::max(worst_fourier,
                               std::abs(closed - excess_risk_fourier(g, m, k, 20000, FourierTail::EulerMaclaurin)));
      worst_quad = std::max(worst_quad, std::abs(closed - excess_risk_mc(g, m, k, 20000)));
    }
    out.push_back(make("risk_closed_vs_fourier", worst_fourier, 1e-8));
    out.push_back(make("risk_closed_vs_quadrature", worst_quad, 1e-5));
  }
  {
    // Averaged snapshot against the explicit mean of materialized iterates.
    double worst = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Sample<double>> stream;
    for (int i = 0; i < 40; ++i) {
      const double x = unit(rng);
      stream.push_back({x, bernoulli_poly(2, x)});
    }
    const PeriodicSplineKernel kernel(1);
    for (auto algo : {AlgorithmName::Ours, AlgorithmName::TarresYao}) {
      const auto spec = make_algorithm(algo, 2.0, 0.75, Setting::Online, 40, 12.0);
      std::vector<std::size_t> cps(40);
      for (std::size_t i = 0; i < cps.size(); ++i) cps[i] = i + 1;
      const auto snaps = sgd_run(kernel, std::span<const Sample<double>>(stream), spec, cps);
      std::vector<double> sum(40, 0.0);
      for (const auto& s : snaps) {
        const auto eff = s.last.effective_coeffs();
        for (std::size_t i = 0; i < eff.size(); ++i) sum[i] += eff[i];
      }
      for (std::size_t i = 0; i < 40; ++i)
        worst = std::max(worst, std::abs(sum[i] / 41.0 - snaps.back().averaged.coeffs[i]));
    }
    out.push_back(make("averaging_oracle", worst, 1e-12));
  }
  return out;
}

}  // namespace ksgd
