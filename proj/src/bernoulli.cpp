#include "ksgd/bernoulli.hpp"

#include "ksgd/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace ksgd {

namespace {

Rational binomial(int n, int k) {
  Rational c = 1;
  for (int i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

struct Table {
  std::array<BernoulliPoly, kMaxBernoulliDegree + 1> polys;
  std::array<std::vector<double>, kMaxBernoulliDegree + 1> doubles;

  Table() {
    const auto b = bernoulli_numbers(kMaxBernoulliDegree);
    for (int n = 0; n <= kMaxBernoulliDegree; ++n) {
      BernoulliPoly& p = polys[n];
      p.degree = n;
      p.coeffs.assign(n + 1, Rational(0));
      // B_n(x) = sum_j C(n, j) b_j x^{n-j}
      for (int j = 0; j <= n; ++j) p.coeffs[n - j] = binomial(n, j) * b[j];
      doubles[n].reserve(n + 1);
      for (const auto& c : p.coeffs) doubles[n].push_back(c.convert_to<double>());
    }
  }
};

const Table& table() {
  static const Table t;
  return t;
}

void check_degree(int k) {
  if (k < 0 || k > kMaxBernoulliDegree)
    throw ConfigError("Bernoulli degree " + std::to_string(k) + " outside [0, " +
                      std::to_string(kMaxBernoulliDegree) + "]");
}

}  // namespace

std::vector<Rational> bernoulli_numbers(int max_n) {
  if (max_n < 0) throw ConfigError("bernoulli_numbers: max_n must be non-negative");
  std::vector<Rational> b(max_n + 1);
  b[0] = 1;
  // sum_{j=0}^{n} C(n+1, j) b_j = 0, solved for b_n.
  for (int n = 1; n <= max_n; ++n) {
    Rational acc = 0;
    for (int j = 0; j < n; ++j) acc += binomial(n + 1, j) * b[j];
    b[n] = -acc / (n + 1);
  }
  return b;
}

Rational BernoulliPoly::eval_exact(const Rational& x) const {
  Rational acc = 0;
  for (int j = degree; j >= 0; --j) acc = acc * x + coeffs[j];
  return acc;
}

double BernoulliPoly::operator()(double x) const { return bernoulli_poly(degree, x); }

const BernoulliPoly& bernoulli_polynomial(int k) {
  check_degree(k);
  return table().polys[k];
}

const std::vector<double>& bernoulli_coefficients(int k) {
  check_degree(k);
  return table().doubles[k];
}

double bernoulli_poly(int k, double x) {
  const auto& c = bernoulli_coefficients(k);
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double frac(double x) {
  const double f = x - std::floor(x);
  // x slightly below an integer rounds up to exactly 1.0
  return f >= 1.0 ? 0.0 : f;
}

double bernoulli_fourier_eval(int k, double x, int J) {
  if (k < 1 || J < 1) throw ConfigError("bernoulli_fourier_eval: need k >= 1 and J >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double phase = k * std::numbers::pi / 2.0;
  const double xf = frac(x);
  double factorial = 1.0;
  for (int i = 2; i <= k; ++i) factorial *= i;
  double sum = 0.0;
  // Smallest terms first.
  for (int j = J; j >= 1; --j) {
    const double w = two_pi * j;
    sum += std::cos(w * xf - phase) / std::pow(w, k);
  }
  return -2.0 * factorial * sum;
}

}  // namespace ksgd
