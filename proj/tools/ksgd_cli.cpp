// Command-line front end: theory tables, simulations, step-size sweeps,
// algorithm comparison and oracle self-checks.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical divergence,
// 4 selfcheck failure.

#include "ksgd/bernoulli.hpp"
#include "ksgd/errors.hpp"
#include "ksgd/harness.hpp"
#include "ksgd/selfcheck.hpp"
#include "ksgd/theory.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitSelfcheck = 4;

template <class Writer>
void emit_csv(const std::string& path, Writer&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ksgd::ConfigError("cannot write '" + path + "'");
  write(out);
}

int cmd_theory(double alpha, double r, const std::string& setting_text) {
  using namespace ksgd;
  const Setting setting = parse_setting(setting_text);
  std::cout << std::setprecision(12);
  std::cout << "alpha            " << alpha << "\n"
            << "r                " << r << "\n"
            << "setting          " << to_string(setting) << "\n"
            << "regime           " << to_string(classify_regime(alpha, r, setting)) << "\n"
            << "step_exponent    " << step_exponent(alpha, r, setting) << "\n"
            << "predicted_rate   " << predicted_rate(alpha, r, setting) << "\n"
            << "competitor_rate  " << competitor_rate(r) << "\n"
            << "competitor_step  " << competitor_step_exponent(r) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, const ksgd::RunOptions& opts) {
  using namespace ksgd;
  const auto config = load_config(config_path);
  const auto result = run_replicates(config, opts);
  emit_csv(out_path, [&](std::ostream& os) { write_simulate_csv(os, result); });
  for (const auto& f : result.failures) std::cerr << "replicate " << f.replicate << ": " << f.message << "\n";
  if (!out_path.empty()) {
    std::cerr << std::setprecision(6);
    for (std::size_t i = 0; i < result.checkpoints.size() && !result.mean.empty(); ++i)
      std::cerr << "n=" << result.checkpoints[i] << "  mean_excess_risk=" << result.mean[i] << "\n";
  }
  return result.failures.empty() ? 0 : kExitDivergence;
}

int cmd_sweep(const std::string& config_path, std::optional<double> grid_min, std::optional<double> grid_max,
              std::optional<std::size_t> grid_points, const std::string& out_path, const ksgd::RunOptions& opts) {
  using namespace ksgd;
  const auto config = load_config(config_path);
  std::vector<double> grid = default_sweep_grid(config.problem());
  if (grid_min || grid_max || grid_points)
    grid = log_grid(grid_min.value_or(grid.front()), grid_max.value_or(grid.back()), grid_points.value_or(grid.size()));
  const auto n_values = log_spaced(1, config.n_max, config.n_checkpoints);
  const auto result = gamma_sweep(config, grid, n_values, opts);
  emit_csv(out_path, [&](std::ostream& os) { write_sweep_csv(os, result); });

  std::vector<std::pair<double, double>> pts;
  for (const auto& b : result.best) pts.emplace_back(static_cast<double>(b.n), b.best_gamma);
  if (pts.size() >= 4) {
    const auto fit = fit_rate(pts);
    std::cerr << "best-gamma slope (second half): " << fit.slope << "\n";
  }
  return 0;
}

int cmd_compare(int point, std::size_t n_max, std::size_t replicates, double sigma, std::uint64_t seed,
                const std::string& out_path, const ksgd::RunOptions& opts) {
  using namespace ksgd;
  const auto rows = compare_algorithms(point, n_max, replicates, opts, sigma, seed);
  emit_csv(out_path, [&](std::ostream& os) { write_compare_csv(os, rows); });
  bool diverged = false;
  for (const auto& r : rows)
    for (const auto& f : r.failures) {
      diverged = true;
      std::cerr << to_string(r.algorithm) << " replicate " << f.replicate << ": " << f.message << "\n";
    }
  return diverged ? kExitDivergence : 0;
}

int cmd_selfcheck() {
  bool ok = true;
  for (const auto& c : ksgd::run_selfcheck()) {
    std::printf("%-28s %s  worst=%.3e  tol=%.1e\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.worst, c.tolerance);
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitSelfcheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Averaged kernel least-mean-squares: theory, simulation and rate experiments"};
  app.require_subcommand(1);

  ksgd::RunOptions opts;
  std::optional<double> step_override;
  const auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--threads", opts.threads, "worker threads (0: all cores)");
    sub->add_option("--step-override", step_override, "step exponent for ours, e.g. -0.428571 for the tabulated value");
  };

  double alpha = 2, r = 0.75;
  std::string setting = "fh";
  auto* theory = app.add_subcommand("theory", "step exponents, predicted rates and regime");
  theory->add_option("--alpha", alpha)->required();
  theory->add_option("--r", r)->required();
  theory->add_option("--setting", setting)->check(CLI::IsMember({"fh", "online", "finite_horizon"}));

  std::string config_path, out_path;
  auto* simulate = app.add_subcommand("simulate", "replicated runs, per-checkpoint excess risk");
  simulate->add_option("--config", config_path)->required();
  simulate->add_option("--out", out_path, "CSV path (default stdout)");
  add_run_options(simulate);

  std::optional<double> grid_min, grid_max;
  std::optional<std::size_t> grid_points;
  auto* sweep = app.add_subcommand("gamma-sweep", "best constant step per horizon");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--grid-min", grid_min);
  sweep->add_option("--grid-max", grid_max);
  sweep->add_option("--grid-points", grid_points);
  sweep->add_option("--out", out_path);
  add_run_options(sweep);

  int point = 1;
  std::size_t n_max = 3162, replicates = 15;
  double sigma = 0.1;
  std::uint64_t seed = ksgd::ExperimentConfig{}.master_seed;
  auto* compare = app.add_subcommand("compare", "fitted rates of the four algorithms");
  compare->add_option("--point", point)->required()->check(CLI::Range(1, 4));
  compare->add_option("--n-max", n_max);
  compare->add_option("--replicates", replicates);
  compare->add_option("--sigma", sigma);
  compare->add_option("--seed", seed);
  compare->add_option("--out", out_path);
  add_run_options(compare);

  auto* selfcheck = app.add_subcommand("selfcheck", "run the oracle-equivalence checks");

  int k = 1;
  double x = 0;
  auto* bern = app.add_subcommand("bernoulli", "print B_k(x)");
  bern->add_option("--k", k)->required();
  bern->add_option("--x", x)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    opts.step_override = step_override;
    if (*theory) return cmd_theory(alpha, r, setting);
    if (*simulate) return cmd_simulate(config_path, out_path, opts);
    if (*sweep) return cmd_sweep(config_path, grid_min, grid_max, grid_points, out_path, opts);
    if (*compare) return cmd_compare(point, n_max, replicates, sigma, seed, out_path, opts);
    if (*selfcheck) return cmd_selfcheck();
    if (*bern) {
      std::cout << std::setprecision(17) << ksgd::bernoulli_poly(k, x) << "\n";
      return 0;
    }
  } catch (const ksgd::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ksgd::DimensionError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ksgd::DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return kExitDivergence;
  }
  return 0;
}
