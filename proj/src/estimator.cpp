#include "ksgd/estimator.hpp"

#include <cmath>

namespace ksgd {

StepSchedule StepSchedule::finite_horizon(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("step size must be positive and finite");
  return StepSchedule(FiniteHorizonStep{gamma});
}

StepSchedule StepSchedule::online(double gamma0, double zeta, double offset) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw ConfigError("gamma0 must be positive and finite");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw ConfigError("online step decay zeta must lie in [0, 1)");
  if (offset < 0.0) throw ConfigError("online step offset must be non-negative");
  return StepSchedule(OnlineStep{gamma0, zeta, offset});
}

double StepSchedule::at(std::size_t i) const {
  if (const auto* fh = std::get_if<FiniteHorizonStep>(&rule_)) return fh->gamma;
  const auto& on = std::get<OnlineStep>(rule_);
  return on.gamma0 * std::pow(static_cast<double>(i) + on.offset, -on.zeta);
}

double TarresYaoRegularization::lambda(std::size_t i) const {
  const double idx = static_cast<double>(n0 + horizon.value_or(i));
  return std::pow(idx, -1.0 / (2.0 * r + 1.0)) / a;
}

double TarresYaoRegularization::paired_step(std::size_t i) const {
  const double idx = static_cast<double>(n0 + horizon.value_or(i));
  return a * std::pow(idx, -2.0 * r / (2.0 * r + 1.0));
}

double RegularizationSchedule::at(std::size_t i) const {
  if (const auto* ty = std::get_if<TarresYaoRegularization>(&rule_)) return ty->lambda(i);
  return 0.0;
}

std::string_view to_string(AlgorithmName a) {
  switch (a) {
    case AlgorithmName::Ours: return "ours";
    case AlgorithmName::Zhang: return "zhang";
    case AlgorithmName::YingPontil: return "ying_pontil";
    case AlgorithmName::TarresYao: return "tarres_yao";
  }
  return "unknown";
}

AlgorithmName parse_algorithm(std::string_view text) {
  for (auto a : {AlgorithmName::Ours, AlgorithmName::Zhang, AlgorithmName::YingPontil, AlgorithmName::TarresYao})
    if (text == to_string(a)) return a;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (expected ours|zhang|ying_pontil|tarres_yao)");
}

AlgorithmSpec make_algorithm(AlgorithmName name, double alpha, double r, Setting setting, std::size_t horizon,
                             double gamma0, std::optional<double> step_override) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  const double n = static_cast<double>(horizon);
  const auto schedule = [&](double exponent) {
    if (setting == Setting::FiniteHorizon) return StepSchedule::finite_horizon(gamma0 * std::pow(n, exponent));
    return StepSchedule::online(gamma0, -exponent);
  };

  AlgorithmSpec spec;
  spec.name = name;
  switch (name) {
    case AlgorithmName::Ours:
      spec.averaged = true;
      spec.step = schedule(step_override.value_or(step_exponent(alpha, r, setting)));
      break;
    case AlgorithmName::Zhang:
      spec.averaged = true;
      spec.step = schedule(competitor_step_exponent(r));
      break;
    case AlgorithmName::YingPontil:
      spec.averaged = false;
      spec.step = schedule(competitor_step_exponent(r));
      break;
    case AlgorithmName::TarresYao: {
      TarresYaoRegularization ty;
      ty.r = r;
      if (setting == Setting::FiniteHorizon) ty.horizon = horizon;
      spec.averaged = false;
      spec.step = setting == Setting::FiniteHorizon
                      ? StepSchedule::finite_horizon(ty.paired_step(horizon))
                      : StepSchedule::online(ty.a, 2.0 * r / (2.0 * r + 1.0), static_cast<double>(ty.n0));
      spec.reg = ty;
      break;
    }
  }
  return spec;
}

std::vector<double> averaged_coefficients(std::span<const double> born, std::span<const double> shrink) {
  if (born.size() != shrink.size()) throw DimensionError("averaged_coefficients: length mismatch");
  const std::size_t n = born.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  // weight_i = sum_{k=i}^{n} prod_{j=i+1}^{k} shrink_j, built from the back.
  double weight = 1.0;
  const double denom = static_cast<double>(n + 1);
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) weight = 1.0 + shrink[i + 1] * weight;
    out[i] = born[i] * weight / denom;
  }
  return out;
}

Eigen::VectorXd solve_regularized_system(const Eigen::MatrixXd& gram_matrix, std::span<const double> ys,
                                         double lambda) {
  const auto n = gram_matrix.rows();
  if (gram_matrix.cols() != n || static_cast<Eigen::Index>(ys.size()) != n)
    throw DimensionError("ridge system: dimension mismatch");
  if (lambda < 0.0) throw ConfigError("ridge regularization must be non-negative");
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  Eigen::MatrixXd system = gram_matrix;
  system.diagonal().array() += lambda;

  if (lambda > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() == Eigen::Success) return llt.solve(y);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
  qr.setThreshold(1e-12);
  if (qr.rank() < n)
    throw NumericalRankError("ridge system is singular (rank " + std::to_string(qr.rank()) + " < " +
                             std::to_string(n) + ")");
  return qr.solve(y);
}

FiniteDimResult finite_dim_sgd(std::span<const Sample<Eigen::VectorXd>> stream, double gamma) {
  if (stream.empty()) throw ConfigError("finite_dim_sgd: empty stream");
  if (!(gamma > 0.0)) throw ConfigError("finite_dim_sgd: gamma must be positive");
  const auto d = stream.front().x.size();
  if (d < 1) throw DimensionError("finite_dim_sgd: zero-dimensional inputs");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);  // theta_0 = 0 contributes nothing
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& s = stream[i];
    if (s.x.size() != d) throw DimensionError("finite_dim_sgd: inconsistent input dimension");
    const double residual = theta.dot(s.x) - s.y;
    theta.noalias() -= gamma * residual * s.x;
    const double norm = theta.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm) || norm > kDivergenceThreshold)
      throw DivergenceError(i + 1, "weight norm " + std::to_string(norm));
    sum += theta;
  }
  return {theta, sum / static_cast<double>(stream.size() + 1)};
}

}  // namespace ksgd
