#pragma once

#include "ksgd/estimator.hpp"
#include "ksgd/theory.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ksgd {

/// Spline testbed: kernel R_m, target B_k, additive Gaussian noise sigma.
struct ProblemSpec {
  int m = 1;
  int k = 2;
  double sigma = 0.1;

  double alpha() const { return 2.0 * m; }
  double delta() const { return 2.0 * k; }
  /// Source exponent r = (delta - 1)/(2 alpha).
  double r() const { return (delta() - 1.0) / (2.0 * alpha()); }
  double R_sq() const;

  void validate() const;
};

/// The four (kernel, target) pairs used in the rate comparison.
ProblemSpec table_point(int point, double sigma = 0.1);

struct ExperimentConfig {
  int kernel_order_m = 1;
  int target_index_k = 2;
  double noise_sigma = 0.1;
  AlgorithmName algorithm = AlgorithmName::Ours;
  Setting setting = Setting::FiniteHorizon;
  std::optional<double> gamma0;  ///< defaults to 1/R^2
  std::size_t n_max = 3162;
  std::size_t n_checkpoints = 20;
  std::size_t replicates = 15;
  std::uint64_t master_seed = 20140101;

  ProblemSpec problem() const { return {kernel_order_m, target_index_k, noise_sigma}; }
  double effective_gamma0() const;
  void validate() const;
};

/// Parses flat "key = value" text. Blank lines and '#' comments are skipped;
/// unknown or repeated keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Knobs that are not part of the experiment definition.
struct RunOptions {
  unsigned threads = 0;                  ///< 0: hardware concurrency
  std::optional<double> step_override;   ///< replaces the step exponent of `ours`
};

// ---------------------------------------------------------------------------
// Randomness

std::uint64_t splitmix64(std::uint64_t x);
/// Digest of the data-generating problem, so every algorithm sees the same streams.
std::uint64_t problem_digest(const ProblemSpec& p);
std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t replicate, std::uint64_t digest);

/// x_i ~ U[0, 1), y_i = B_k(x_i) + sigma eps_i with eps_i ~ N(0, 1).
/// Inputs and noise use separate engines, so x does not depend on sigma.
std::vector<Sample<double>> sample_stream(std::uint64_t seed, int k, double sigma, std::size_t n);

// ---------------------------------------------------------------------------
// Execution

/// Runs fn(0..count-1) on up to `threads` workers. The first exception (lowest
/// index) is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Sorted distinct integers log-spaced between lo and hi inclusive.
std::vector<std::size_t> log_spaced(std::size_t lo, std::size_t hi, std::size_t count);

std::vector<std::size_t> default_checkpoints(const ExperimentConfig& config);

struct ReplicateFailure {
  std::size_t replicate;
  std::size_t step;
  std::string message;
};

struct ReplicateResult {
  std::vector<std::size_t> checkpoints;
  std::vector<std::vector<double>> risk;  ///< [replicate][checkpoint]; empty for failed replicates
  std::vector<double> mean;               ///< over successful replicates, in index order
  std::vector<ReplicateFailure> failures;
};

/// Excess risk of the designated output (averaged for ours/zhang, last
/// iterate otherwise) of replicate j at every checkpoint. Throws
/// DivergenceError on divergence.
std::vector<double> run_single_replicate(const ExperimentConfig& config, std::size_t replicate,
                                         std::span<const std::size_t> checkpoints, const RunOptions& options = {});

ReplicateResult run_replicates(const ExperimentConfig& config, const RunOptions& options = {});
ReplicateResult run_replicates(const ExperimentConfig& config, std::span<const std::size_t> checkpoints,
                               const RunOptions& options = {});

/// Mean of per-replicate rows, reduced in replicate order.
std::vector<double> ordered_mean(const std::vector<std::vector<double>>& rows);

// ---------------------------------------------------------------------------
// Step-size sweep

struct SweepPoint {
  std::size_t n;
  double best_gamma;
  double mean_excess_risk;
};

struct SweepResult {
  std::vector<double> grid;
  std::vector<std::size_t> n_values;
  std::vector<std::vector<double>> mean_risk;  ///< [grid][n]; +inf where a replicate diverged
  std::vector<SweepPoint> best;
};

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// Default sweep grid: 25 points per decade over [1e-3/R^2, 1/(4 R^2)].
std::vector<double> default_sweep_grid(const ProblemSpec& p);

/// For each n, the constant step minimizing the replicate-mean excess risk of
/// the averaged iterate after n samples.
SweepResult gamma_sweep(const ExperimentConfig& config, std::span<const double> grid,
                        std::span<const std::size_t> n_values, const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Rate fitting and comparison

struct RateFit {
  double slope;
  double intercept;
  std::size_t window_begin;  ///< first point index used
  std::size_t window_end;    ///< one past the last
  double residual_rms;
};

/// Least squares of log10(value) on log10(n) over the second half of the points.
RateFit fit_rate(std::span<const std::pair<double, double>> points);

struct ComparisonRow {
  AlgorithmName algorithm;
  double predicted_slope;
  double effective_slope;
  double residual_rms;
  std::vector<ReplicateFailure> failures;
};

std::vector<ComparisonRow> compare_algorithms(int point, std::size_t n_max, std::size_t replicates,
                                              const RunOptions& options = {}, double sigma = 0.1,
                                              std::uint64_t master_seed = ExperimentConfig{}.master_seed);

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip formatting (17 significant digits).
std::string format_double(double v);

void write_simulate_csv(std::ostream& out, const ReplicateResult& result);
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_compare_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);

}  // namespace ksgd
