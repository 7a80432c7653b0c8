#pragma once

#include "ksgd/errors.hpp"
#include "ksgd/kernels.hpp"
#include "ksgd/theory.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ksgd {

template <class P>
struct Sample {
  P x;
  double y;
};

/// g(x) = scale * sum_i coeffs[i] K(centers[i], x).
///
/// Averaged snapshots always carry scale == 1 with any shrinkage already folded
/// into the coefficients.
template <class P>
struct KernelExpansion {
  std::vector<P> centers;
  std::vector<double> coeffs;
  double scale = 1.0;

  std::size_t size() const noexcept { return centers.size(); }
  bool empty() const noexcept { return centers.empty(); }

  /// Coefficients with the global scale multiplied in.
  std::vector<double> effective_coeffs() const {
    std::vector<double> out(coeffs);
    for (double& c : out) c *= scale;
    return out;
  }
};

template <Kernel K>
double evaluate(const KernelExpansion<typename K::Point>& g, const K& kernel,
                const typename K::Point& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.coeffs[i] * kernel(g.centers[i], x);
  return g.scale * acc;
}

// ---------------------------------------------------------------------------
// Schedules

struct FiniteHorizonStep {
  double gamma;
};

/// gamma_i = gamma0 * (i + offset)^{-zeta}
struct OnlineStep {
  double gamma0;
  double zeta;
  double offset = 0.0;
};

class StepSchedule {
public:
  static StepSchedule finite_horizon(double gamma);
  static StepSchedule online(double gamma0, double zeta, double offset = 0.0);

  /// Step used for sample i (1-based).
  double at(std::size_t i) const;
  bool is_constant() const noexcept { return std::holds_alternative<FiniteHorizonStep>(rule_); }
  const std::variant<FiniteHorizonStep, OnlineStep>& rule() const noexcept { return rule_; }

private:
  explicit StepSchedule(std::variant<FiniteHorizonStep, OnlineStep> rule) : rule_(rule) {}
  std::variant<FiniteHorizonStep, OnlineStep> rule_;
};

struct NoRegularization {};

/// lambda_i = (1/a) (n0 + i)^{-1/(2r+1)}, paired with the step
/// a (n0 + i)^{-2r/(2r+1)}. With a horizon set, i is frozen to it.
struct TarresYaoRegularization {
  double a = 4.0;
  std::size_t n0 = 1;
  double r = 0.5;
  std::optional<std::size_t> horizon;

  double lambda(std::size_t i) const;
  double paired_step(std::size_t i) const;
};

class RegularizationSchedule {
public:
  RegularizationSchedule() = default;
  RegularizationSchedule(TarresYaoRegularization ty) : rule_(ty) {}

  double at(std::size_t i) const;
  bool is_none() const noexcept { return std::holds_alternative<NoRegularization>(rule_); }

private:
  std::variant<NoRegularization, TarresYaoRegularization> rule_;
};

enum class AlgorithmName { Ours, Zhang, YingPontil, TarresYao };

std::string_view to_string(AlgorithmName a);
AlgorithmName parse_algorithm(std::string_view text);

struct AlgorithmSpec {
  AlgorithmName name = AlgorithmName::Ours;
  bool averaged = true;
  StepSchedule step = StepSchedule::finite_horizon(1.0);
  RegularizationSchedule reg;
};

/// Builds the configuration of one of the four studied algorithms.
///
/// ours: step exponent from the optimal-step corollaries (or `step_override`);
/// zhang / ying_pontil: exponent -2r/(2r+1) with gamma0; tarres_yao: a = 4
/// paired step and regularization, gamma0 unused. In the finite-horizon
/// setting every schedule is evaluated at `horizon` and held constant.
AlgorithmSpec make_algorithm(AlgorithmName name, double alpha, double r, Setting setting,
                             std::size_t horizon, double gamma0,
                             std::optional<double> step_override = std::nullopt);

// ---------------------------------------------------------------------------
// Averaging

/// Coefficients of (1/(n+1)) sum_{k=0}^{n} g_k for iterates built from the
/// born coefficients a_i, where every later step k multiplies the existing
/// expansion by shrink[k]. With unit shrink this is ((n+1-i)/(n+1)) a_i.
std::vector<double> averaged_coefficients(std::span<const double> born, std::span<const double> shrink);

inline constexpr double kDivergenceThreshold = 1e12;

// ---------------------------------------------------------------------------
// Stochastic recursion

/// Single-pass least-mean-squares recursion in coefficient form:
///   g_n = c_n g_{n-1} + a_n K_{x_n},  a_n = -gamma_n (g_{n-1}(x_n) - y_n),
/// with c_n = 1 - gamma_n lambda_n. The shrink is kept in a global scale so a
/// step costs one pass over the existing centers.
template <Kernel K>
class SgdRecursion {
public:
  using Point = typename K::Point;

  SgdRecursion(K kernel, AlgorithmSpec spec) : kernel_(std::move(kernel)), spec_(std::move(spec)) {}

  void step(const Point& x, double y) {
    const std::size_t n = centers_.size() + 1;
    double pred = 0.0;
    for (std::size_t i = 0; i < centers_.size(); ++i) pred += stored_[i] * kernel_(centers_[i], x);
    pred *= scale_;

    const double gamma = spec_.step.at(n);
    const double shrink = 1.0 - gamma * spec_.reg.at(n);
    if (!(shrink > 0.0))
      throw ConfigError("regularized step " + std::to_string(n) + " has gamma*lambda >= 1");
    const double a = -gamma * (pred - y);
    if (!std::isfinite(a) || std::abs(a) > kDivergenceThreshold)
      throw DivergenceError(n, "coefficient " + std::to_string(a));

    scale_ *= shrink;
    centers_.push_back(x);
    stored_.push_back(a / scale_);
    born_.push_back(a);
    shrink_.push_back(shrink);
  }

  std::size_t size() const noexcept { return centers_.size(); }

  KernelExpansion<Point> last_iterate() const { return {centers_, stored_, scale_}; }

  KernelExpansion<Point> averaged_iterate() const {
    return {centers_, averaged_coefficients(born_, shrink_), 1.0};
  }

  std::span<const double> born_coefficients() const noexcept { return born_; }
  std::span<const double> shrink_factors() const noexcept { return shrink_; }

private:
  K kernel_;
  AlgorithmSpec spec_;
  std::vector<Point> centers_;
  std::vector<double> stored_;  // true coefficient = stored * scale
  std::vector<double> born_;
  std::vector<double> shrink_;
  double scale_ = 1.0;
};

template <class P>
struct Snapshot {
  std::size_t n = 0;
  KernelExpansion<P> last;
  KernelExpansion<P> averaged;

  const KernelExpansion<P>& output(bool use_average) const { return use_average ? averaged : last; }
};

/// Runs the recursion over the stream prefix up to the last checkpoint and
/// records the last and averaged iterates after each checkpoint n.
template <Kernel K>
std::vector<Snapshot<typename K::Point>> sgd_run(const K& kernel,
                                                 std::span<const Sample<typename K::Point>> stream,
                                                 const AlgorithmSpec& spec,
                                                 std::span<const std::size_t> checkpoints) {
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    if (checkpoints[c] < 1 || checkpoints[c] > stream.size())
      throw ConfigError("checkpoint " + std::to_string(checkpoints[c]) + " outside 1.." +
                        std::to_string(stream.size()));
    if (c > 0 && checkpoints[c] <= checkpoints[c - 1]) throw ConfigError("checkpoints must be increasing");
  }
  std::vector<Snapshot<typename K::Point>> out;
  out.reserve(checkpoints.size());
  SgdRecursion<K> run(kernel, spec);
  for (std::size_t checkpoint : checkpoints) {
    while (run.size() < checkpoint) {
      const auto& s = stream[run.size()];
      run.step(s.x, s.y);
    }
    out.push_back({checkpoint, run.last_iterate(), run.averaged_iterate()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch ridge regression

/// Solves (G + lambda I) a = y. lambda == 0 requires G numerically invertible.
Eigen::VectorXd solve_regularized_system(const Eigen::MatrixXd& gram_matrix, std::span<const double> ys,
                                         double lambda);

template <Kernel K>
KernelExpansion<typename K::Point> ridge_solve(const K& kernel, std::span<const typename K::Point> xs,
                                               std::span<const double> ys, double lambda) {
  if (xs.size() != ys.size()) throw DimensionError("ridge_solve: xs and ys differ in length");
  if (xs.empty()) throw ConfigError("ridge_solve: no samples");
  const Eigen::VectorXd a = solve_regularized_system(gram(kernel, xs), ys, lambda);
  return {std::vector<typename K::Point>(xs.begin(), xs.end()), std::vector<double>(a.data(), a.data() + a.size()),
          1.0};
}

// ---------------------------------------------------------------------------
// Finite-dimensional recursion

struct FiniteDimResult {
  Eigen::VectorXd last;
  Eigen::VectorXd averaged;  ///< mean of theta_0..theta_n with theta_0 = 0
};

/// The same recursion with the linear kernel, kept as a dense weight vector:
///   theta_n = theta_{n-1} - gamma (<theta_{n-1}, x_n> - y_n) x_n.
FiniteDimResult finite_dim_sgd(std::span<const Sample<Eigen::VectorXd>> stream, double gamma);

}  // namespace ksgd
