#include "ksgd/harness.hpp"

#include "ksgd/errors.hpp"
#include "ksgd/kernels.hpp"
#include "ksgd/risk.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstring>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace ksgd {

// ---------------------------------------------------------------------------
// Problem and configuration

double ProblemSpec::R_sq() const { return kernel_sup_sq(m); }

void ProblemSpec::validate() const {
  if (!is_supported_spline_order(m)) throw ConfigError("kernel_order_m must be in 1..4");
  if (k < 1 || k > 8) throw ConfigError("target_index_k must be in 1..8");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise_sigma must be a non-negative number");
}

ProblemSpec table_point(int point, double sigma) {
  switch (point) {
    case 1: return {1, 2, sigma};  // alpha 2, r 0.75
    case 2: return {2, 2, sigma};  // alpha 4, r 0.375
    case 3: return {1, 3, sigma};  // alpha 2, r 1.25
    case 4: return {2, 1, sigma};  // alpha 4, r 0.125
    default: throw ConfigError("comparison point must be 1, 2, 3 or 4");
  }
}

double ExperimentConfig::effective_gamma0() const { return gamma0.value_or(1.0 / problem().R_sq()); }

void ExperimentConfig::validate() const {
  problem().validate();
  if (gamma0 && (!(*gamma0 > 0.0) || !std::isfinite(*gamma0))) throw ConfigError("gamma0 must be positive");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (n_checkpoints < 1) throw ConfigError("n_checkpoints must be >= 1");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (seen[key]) throw ConfigError("duplicate key '" + key + "'");
    seen[key] = true;

    if (key == "kernel_order_m") c.kernel_order_m = parse_number<int>(key, value);
    else if (key == "target_index_k") c.target_index_k = parse_number<int>(key, value);
    else if (key == "noise_sigma") c.noise_sigma = parse_number<double>(key, value);
    else if (key == "algorithm") c.algorithm = parse_algorithm(value);
    else if (key == "setting") c.setting = parse_setting(value);
    else if (key == "gamma0") c.gamma0 = parse_number<double>(key, value);
    else if (key == "n_max") c.n_max = parse_number<std::size_t>(key, value);
    else if (key == "n_checkpoints") c.n_checkpoints = parse_number<std::size_t>(key, value);
    else if (key == "replicates") c.replicates = parse_number<std::size_t>(key, value);
    else if (key == "master_seed") c.master_seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Randomness

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t problem_digest(const ProblemSpec& p) {
  std::uint64_t sigma_bits = 0;
  static_assert(sizeof(sigma_bits) == sizeof(p.sigma));
  std::memcpy(&sigma_bits, &p.sigma, sizeof sigma_bits);
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(p.m));
  h = splitmix64(h ^ static_cast<std::uint64_t>(p.k));
  return splitmix64(h ^ sigma_bits);
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate, std::uint64_t digest) {
  return splitmix64(splitmix64(master_seed ^ digest) + static_cast<std::uint64_t>(replicate));
}

std::vector<Sample<double>> sample_stream(std::uint64_t seed, int k, double sigma, std::size_t n) {
  if (n < 1) throw ConfigError("sample_stream: n must be >= 1");
  std::mt19937_64 x_engine(splitmix64(seed ^ 0x78ULL));
  std::mt19937_64 noise_engine(splitmix64(seed ^ 0x6e6f697365ULL));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Sample<double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(x_engine() >> 11) * 0x1.0p-53;  // [0, 1)
    const double noise = sigma > 0.0 ? sigma * gauss(noise_engine) : 0.0;
    out.push_back({x, bernoulli_poly(k, x) + noise});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

std::vector<std::size_t> log_spaced(std::size_t lo, std::size_t hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 1) throw ConfigError("log_spaced: need 1 <= lo <= hi and count >= 1");
  std::vector<std::size_t> out;
  if (count == 1 || lo == hi) return {hi};
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    auto v = static_cast<std::size_t>(std::llround(std::pow(10.0, a + t * (b - a))));
    v = std::clamp(v, lo, hi);
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  out.back() = hi;
  return out;
}

std::vector<std::size_t> default_checkpoints(const ExperimentConfig& config) {
  const std::size_t lo = std::min<std::size_t>(10, config.n_max);
  return log_spaced(lo, config.n_max, config.n_checkpoints);
}

std::vector<double> ordered_mean(const std::vector<std::vector<double>>& rows) {
  std::vector<double> mean;
  std::size_t used = 0;
  for (const auto& row : rows) {
    if (row.empty()) continue;
    if (mean.empty()) mean.assign(row.size(), 0.0);
    for (std::size_t c = 0; c < row.size(); ++c) mean[c] += row[c];
    ++used;
  }
  for (double& v : mean) v /= static_cast<double>(used);
  return mean;
}

std::vector<double> run_single_replicate(const ExperimentConfig& config, std::size_t replicate,
                                         std::span<const std::size_t> checkpoints, const RunOptions& options) {
  const ProblemSpec p = config.problem();
  if (checkpoints.empty()) throw ConfigError("no checkpoints");
  const std::size_t horizon = checkpoints.back();
  const auto stream =
      sample_stream(replicate_seed(config.master_seed, replicate, problem_digest(p)), p.k, p.sigma, horizon);
  const PeriodicSplineKernel kernel(p.m);
  const SplineRiskEvaluator evaluator(p.m, p.k);
  const double gamma0 = config.effective_gamma0();
  const auto spec_for = [&](std::size_t n) {
    return make_algorithm(config.algorithm, p.alpha(), p.r(), config.setting, n, gamma0, options.step_override);
  };

  std::vector<double> risk;
  risk.reserve(checkpoints.size());
  const auto record = [&](const auto& snapshots, bool averaged) {
    for (const auto& s : snapshots) risk.push_back(evaluator.excess_risk(s.output(averaged)));
  };

  if (config.setting == Setting::Online) {
    const auto spec = spec_for(horizon);
    record(sgd_run(kernel, std::span(stream), spec, checkpoints), spec.averaged);
    return risk;
  }

  // Finite horizon: one run per horizon, unless the schedule ignores it.
  bool invariant = true;
  const auto first = spec_for(checkpoints.front());
  for (std::size_t n : checkpoints) {
    const auto s = spec_for(n);
    if (!s.reg.is_none() || s.step.at(1) != first.step.at(1)) invariant = false;
  }
  if (invariant) {
    record(sgd_run(kernel, std::span(stream), first, checkpoints), first.averaged);
    return risk;
  }
  for (std::size_t n : checkpoints) {
    const auto spec = spec_for(n);
    const std::size_t one[] = {n};
    record(sgd_run(kernel, std::span(stream).first(n), spec, std::span<const std::size_t>(one)), spec.averaged);
  }
  return risk;
}

ReplicateResult run_replicates(const ExperimentConfig& config, const RunOptions& options) {
  const auto checkpoints = default_checkpoints(config);
  return run_replicates(config, checkpoints, options);
}

ReplicateResult run_replicates(const ExperimentConfig& config, std::span<const std::size_t> checkpoints,
                               const RunOptions& options) {
  config.validate();
  ReplicateResult result;
  result.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  result.risk.assign(config.replicates, {});
  std::vector<std::optional<ReplicateFailure>> failures(config.replicates);

  parallel_for(config.replicates, options.threads, [&](std::size_t j) {
    try {
      result.risk[j] = run_single_replicate(config, j, checkpoints, options);
    } catch (const DivergenceError& e) {
      failures[j] = ReplicateFailure{j, e.step(), e.what()};
    }
  });
  for (auto& f : failures)
    if (f) result.failures.push_back(*f);
  result.mean = ordered_mean(result.risk);
  return result;
}

// ---------------------------------------------------------------------------
// Step-size sweep

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw ConfigError("log_grid: need 0 < lo <= hi and points >= 1");
  if (points == 1) return {lo};
  std::vector<double> g(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  return g;
}

std::vector<double> default_sweep_grid(const ProblemSpec& p) {
  const double inv = 1.0 / p.R_sq();
  const double lo = 1e-3 * inv, hi = 0.25 * inv;
  const auto points = static_cast<std::size_t>(std::llround(25.0 * std::log10(hi / lo))) + 1;
  return log_grid(lo, hi, points);
}

SweepResult gamma_sweep(const ExperimentConfig& config, std::span<const double> grid,
                        std::span<const std::size_t> n_values, const RunOptions& options) {
  config.validate();
  if (grid.empty()) throw ConfigError("gamma_sweep: empty grid");
  if (n_values.empty()) throw ConfigError("gamma_sweep: no n values");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw ConfigError("gamma_sweep: grid must be positive");
    if (i > 0 && grid[i] < grid[i - 1]) throw ConfigError("gamma_sweep: grid must be sorted");
  }
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1]) throw ConfigError("gamma_sweep: n values must be increasing");

  const ProblemSpec p = config.problem();
  const std::size_t reps = config.replicates;
  const std::size_t horizon = n_values.back();
  const PeriodicSplineKernel kernel(p.m);
  const SplineRiskEvaluator evaluator(p.m, p.k);
  const bool averaged = config.algorithm == AlgorithmName::Ours || config.algorithm == AlgorithmName::Zhang;

  // [grid * reps + rep][n]
  std::vector<std::vector<double>> cell(grid.size() * reps);
  parallel_for(cell.size(), options.threads, [&](std::size_t unit) {
    const std::size_t g = unit / reps, rep = unit % reps;
    const auto stream =
        sample_stream(replicate_seed(config.master_seed, rep, problem_digest(p)), p.k, p.sigma, horizon);
    AlgorithmSpec spec;
    spec.name = config.algorithm;
    spec.averaged = averaged;
    spec.step = StepSchedule::finite_horizon(grid[g]);
    SgdRecursion<PeriodicSplineKernel> run(kernel, spec);
    auto& out = cell[unit];
    out.assign(n_values.size(), std::numeric_limits<double>::infinity());
    try {
      for (std::size_t c = 0; c < n_values.size(); ++c) {
        while (run.size() < n_values[c]) run.step(stream[run.size()].x, stream[run.size()].y);
        out[c] = evaluator.excess_risk(averaged ? run.averaged_iterate() : run.last_iterate());
      }
    } catch (const DivergenceError&) {
      // this constant is unusable from here on; the remaining entries stay +inf
    }
  });

  SweepResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.n_values.assign(n_values.begin(), n_values.end());
  result.mean_risk.assign(grid.size(), std::vector<double>(n_values.size(), 0.0));
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t rep = 0; rep < reps; ++rep)
      for (std::size_t c = 0; c < n_values.size(); ++c) result.mean_risk[g][c] += cell[g * reps + rep][c];
  for (auto& row : result.mean_risk)
    for (double& v : row) v /= static_cast<double>(reps);

  for (std::size_t c = 0; c < n_values.size(); ++c) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
      if (result.mean_risk[g][c] < result.mean_risk[best][c]) best = g;
    result.best.push_back({n_values[c], grid[best], result.mean_risk[best][c]});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Rate fitting and comparison

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 4) throw ConfigError("fit_rate: need at least 4 points");
  const std::size_t begin = points.size() / 2, end = points.size();
  const double count = static_cast<double>(end - begin);
  double sx = 0, sy = 0;
  std::vector<double> lx, ly;
  for (std::size_t i = begin; i < end; ++i) {
    const auto [n, v] = points[i];
    if (!(v > 0.0) || !(n > 0.0) || !std::isfinite(v))
      throw ConfigError("fit_rate: non-positive value at point " + std::to_string(i));
    lx.push_back(std::log10(n));
    ly.push_back(std::log10(v));
    sx += lx.back();
    sy += ly.back();
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_rate: abscissae in the window are all equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    ss += r * r;
  }
  return {slope, intercept, begin, end, std::sqrt(ss / count)};
}

std::vector<ComparisonRow> compare_algorithms(int point, std::size_t n_max, std::size_t replicates,
                                              const RunOptions& options, double sigma, std::uint64_t master_seed) {
  const ProblemSpec p = table_point(point, sigma);
  std::vector<ComparisonRow> rows;
  for (auto algo : {AlgorithmName::Ours, AlgorithmName::YingPontil, AlgorithmName::TarresYao, AlgorithmName::Zhang}) {
    ExperimentConfig c;
    c.kernel_order_m = p.m;
    c.target_index_k = p.k;
    c.noise_sigma = p.sigma;
    c.algorithm = algo;
    c.setting = Setting::FiniteHorizon;
    c.n_max = n_max;
    c.replicates = replicates;
    c.master_seed = master_seed;
    const auto result = run_replicates(c, options);

    ComparisonRow row;
    row.algorithm = algo;
    row.predicted_slope = algo == AlgorithmName::Ours ? predicted_rate(p.alpha(), p.r(), Setting::FiniteHorizon)
                                                      : competitor_rate(p.r());
    row.failures = result.failures;
    row.effective_slope = std::numeric_limits<double>::quiet_NaN();
    row.residual_rms = std::numeric_limits<double>::quiet_NaN();
    if (!result.mean.empty()) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < result.checkpoints.size(); ++i)
        pts.emplace_back(static_cast<double>(result.checkpoints[i]), result.mean[i]);
      const auto fit = fit_rate(pts);
      row.effective_slope = fit.slope;
      row.residual_rms = fit.residual_rms;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_simulate_csv(std::ostream& out, const ReplicateResult& result) {
  out << "n,replicate,excess_risk\n";
  for (std::size_t j = 0; j < result.risk.size(); ++j)
    for (std::size_t c = 0; c < result.risk[j].size(); ++c)
      out << result.checkpoints[c] << ',' << j << ',' << format_double(result.risk[j][c]) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "n,best_gamma,mean_excess_risk\n";
  for (const auto& b : result.best)
    out << b.n << ',' << format_double(b.best_gamma) << ',' << format_double(b.mean_excess_risk) << '\n';
}

void write_compare_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "algorithm,predicted_slope,effective_slope,residual_rms\n";
  for (const auto& r : rows)
    out << to_string(r.algorithm) << ',' << format_double(r.predicted_slope) << ','
        << format_double(r.effective_slope) << ',' << format_double(r.residual_rms) << '\n';
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(s);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    return fields;
  };
  if (!std::getline(in, line)) return t;
  t.header = split(trim(line));
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != t.header.size()) throw ConfigError("csv row has " + std::to_string(fields.size()) + " fields");
    t.rows.push_back(std::move(fields));
  }
  return t;
}

}  // namespace ksgd
