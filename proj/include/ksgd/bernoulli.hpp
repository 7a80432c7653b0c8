#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace ksgd {

using Rational = boost::multiprecision::cpp_rational;

/// Highest polynomial degree kept in the cached table.
inline constexpr int kMaxBernoulliDegree = 16;

/// Bernoulli numbers b_0..b_max_n (convention b_1 = -1/2), exact.
std::vector<Rational> bernoulli_numbers(int max_n);

/// Bernoulli polynomial B_n with exact coefficients; coeffs[j] multiplies x^j.
struct BernoulliPoly {
  int degree = 0;
  std::vector<Rational> coeffs;

  Rational eval_exact(const Rational& x) const;
  double operator()(double x) const;
};

/// Cached B_k for 0 <= k <= kMaxBernoulliDegree. Throws ConfigError otherwise.
const BernoulliPoly& bernoulli_polynomial(int k);

/// Double-precision coefficients of B_k, lowest degree first.
const std::vector<double>& bernoulli_coefficients(int k);

/// B_k(x) evaluated as a polynomial (no periodization).
double bernoulli_poly(int k, double x);

/// Fractional part x - floor(x), always in [0, 1).
double frac(double x);

/// Partial Fourier sum, frequencies 1..J, of the 1-periodic extension of B_k:
/// -2 k! sum_j cos(2 pi j x - k pi / 2) / (2 pi j)^k.
double bernoulli_fourier_eval(int k, double x, int J);

}  // namespace ksgd
