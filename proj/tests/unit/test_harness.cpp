#include <catch_amalgamated.hpp>

#include "ksgd/bernoulli.hpp"
#include "ksgd/errors.hpp"
#include "ksgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

using namespace ksgd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n_max = 200;
  c.n_checkpoints = 6;
  c.replicates = 4;
  c.master_seed = 42;
  return c;
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST_CASE("problem specs", "[harness]") {
  const auto p = table_point(1);
  CHECK(p.m == 1);
  CHECK(p.k == 2);
  CHECK(p.alpha() == 2.0);
  CHECK(p.delta() == 4.0);
  CHECK(p.r() == 0.75);
  CHECK_THAT(p.R_sq(), WithinRel(1.0 / 12.0, 1e-15));
  CHECK(table_point(2).r() == 0.375);
  CHECK(table_point(3).r() == 1.25);
  CHECK(table_point(4).r() == 0.125);
  CHECK(table_point(4, 0.3).sigma == 0.3);
  CHECK_THROWS_AS(table_point(5), ConfigError);
  CHECK_THROWS_AS((ProblemSpec{5, 2, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((ProblemSpec{1, 0, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((ProblemSpec{1, 2, -0.1}.validate()), ConfigError);
}

TEST_CASE("config defaults", "[harness]") {
  const ExperimentConfig c;
  CHECK(c.n_max == 3162);
  CHECK(c.n_checkpoints == 20);
  CHECK(c.replicates == 15);
  CHECK(c.noise_sigma == 0.1);
  CHECK_THAT(c.effective_gamma0(), WithinRel(12.0, 1e-14));
  ExperimentConfig d = c;
  d.kernel_order_m = 2;
  CHECK_THAT(d.effective_gamma0(), WithinRel(720.0, 1e-14));
  d.gamma0 = 3.0;
  CHECK(d.effective_gamma0() == 3.0);
}

TEST_CASE("config parsing", "[harness]") {
  const auto c = parse(
      "# experiment\n"
      "kernel_order_m = 2\n"
      "  target_index_k=1  \n"
      "\n"
      "noise_sigma = 0.25   # trailing comment\n"
      "algorithm = tarres_yao\n"
      "setting = online\n"
      "gamma0 = 5e2\n"
      "n_max = 1000\n"
      "n_checkpoints = 7\n"
      "replicates = 3\n"
      "master_seed = 18446744073709551615\n");
  CHECK(c.kernel_order_m == 2);
  CHECK(c.target_index_k == 1);
  CHECK(c.noise_sigma == 0.25);
  CHECK(c.algorithm == AlgorithmName::TarresYao);
  CHECK(c.setting == Setting::Online);
  CHECK(c.gamma0 == 500.0);
  CHECK(c.n_max == 1000);
  CHECK(c.n_checkpoints == 7);
  CHECK(c.replicates == 3);
  CHECK(c.master_seed == 18446744073709551615ULL);

  const auto empty = parse("");
  CHECK(empty.kernel_order_m == 1);
  CHECK_FALSE(empty.gamma0.has_value());
}

TEST_CASE("config errors", "[harness]") {
  CHECK_THROWS_AS(parse("step_size = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_max = 10\nn_max = 20\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_max = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_max = 10.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("noise_sigma\n"), ConfigError);
  CHECK_THROWS_AS(parse("algorithm = adam\n"), ConfigError);
  CHECK_THROWS_AS(parse("setting = batch\n"), ConfigError);
  CHECK_THROWS_AS(parse("kernel_order_m = 7\n"), ConfigError);
  CHECK_THROWS_AS(parse("replicates = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("gamma0 = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse("noise_sigma = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path/config.cfg"), ConfigError);
}

TEST_CASE("seeding", "[harness]") {
  // Reference output of the splitmix64 generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);

  const auto d1 = problem_digest(table_point(1));
  CHECK(d1 == problem_digest(table_point(1)));
  CHECK(d1 != problem_digest(table_point(2)));
  CHECK(d1 != problem_digest(table_point(1, 0.2)));

  std::vector<std::uint64_t> seeds;
  for (std::size_t j = 0; j < 100; ++j) seeds.push_back(replicate_seed(7, j, d1));
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
  CHECK(replicate_seed(7, 0, d1) != replicate_seed(8, 0, d1));
}

TEST_CASE("sample streams", "[harness]") {
  SECTION("noiseless responses are the target") {
    const auto s = sample_stream(1, 3, 0.0, 500);
    for (const auto& p : s) {
      CHECK(p.x >= 0.0);
      CHECK(p.x < 1.0);
      CHECK(p.y == bernoulli_poly(3, p.x));
    }
  }
  SECTION("same seed, same stream") {
    const auto a = sample_stream(99, 2, 0.1, 300);
    const auto b = sample_stream(99, 2, 0.1, 300);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x == b[i].x);
      CHECK(a[i].y == b[i].y);
    }
    const auto c = sample_stream(100, 2, 0.1, 300);
    CHECK(a[0].x != c[0].x);
  }
  SECTION("inputs do not depend on the noise level") {
    const auto a = sample_stream(5, 2, 0.1, 100);
    const auto b = sample_stream(5, 2, 0.7, 100);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);
  }
  SECTION("noise variance") {
    const auto s = sample_stream(2024, 2, 0.1, 10000);
    double mean = 0.0;
    for (const auto& p : s) mean += p.y - bernoulli_poly(2, p.x);
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (const auto& p : s) {
      const double e = p.y - bernoulli_poly(2, p.x) - mean;
      var += e * e;
    }
    var /= static_cast<double>(s.size() - 1);
    CHECK_THAT(var, WithinRel(0.01, 0.05));
  }
  CHECK_THROWS_AS(sample_stream(1, 2, 0.1, 0), ConfigError);
}

TEST_CASE("parallel_for", "[harness]") {
  for (unsigned threads : {1u, 2u, 4u}) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  for (unsigned threads : {1u, 3u}) {
    try {
      parallel_for(20, threads, [](std::size_t i) {
        if (i == 5 || i == 13) throw std::runtime_error("boom " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "boom 5");
    }
  }
  CHECK_NOTHROW(parallel_for(0, 2, [](std::size_t) { throw std::runtime_error("never"); }));
}

TEST_CASE("log spacing", "[harness]") {
  const auto v = log_spaced(10, 3162, 20);
  CHECK(v.front() == 10);
  CHECK(v.back() == 3162);
  CHECK(v.size() == 20);
  CHECK(std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return a >= b; }) == v.end());

  const auto dense = log_spaced(1, 10, 20);
  CHECK(dense.front() == 1);
  CHECK(dense.back() == 10);
  CHECK(dense.size() <= 10);

  CHECK(log_spaced(5, 5, 3) == std::vector<std::size_t>{5});
  CHECK(default_checkpoints(ExperimentConfig{}) == v);
  CHECK_THROWS_AS(log_spaced(0, 10, 3), ConfigError);
  CHECK_THROWS_AS(log_spaced(10, 5, 3), ConfigError);

  const auto g = log_grid(1e-3, 1.0, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == 1e-3);
  CHECK_THAT(g[1], WithinRel(1e-2, 1e-12));
  CHECK(g.back() == 1.0);
  CHECK(log_grid(0.5, 2.0, 1) == std::vector<double>{0.5});
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), ConfigError);

  const auto dg = default_sweep_grid(table_point(1));
  CHECK_THAT(dg.front(), WithinRel(12e-3, 1e-12));
  CHECK_THAT(dg.back(), WithinRel(3.0, 1e-12));
}

TEST_CASE("replicate runs", "[harness]") {
  SECTION("one replicate equals the single run") {
    auto c = small_config();
    c.replicates = 1;
    const auto cps = default_checkpoints(c);
    const auto res = run_replicates(c);
    const auto single = run_single_replicate(c, 0, cps);
    REQUIRE(res.mean.size() == single.size());
    for (std::size_t i = 0; i < single.size(); ++i) CHECK(res.mean[i] == single[i]);
    CHECK(res.failures.empty());
    CHECK(res.checkpoints == cps);
  }
  SECTION("thread count and execution order do not change results") {
    const auto c = small_config();
    const auto cps = default_checkpoints(c);
    const auto one = run_replicates(c, RunOptions{1, std::nullopt});
    const auto four = run_replicates(c, RunOptions{4, std::nullopt});
    CHECK(one.mean == four.mean);
    CHECK(one.risk == four.risk);

    std::vector<std::vector<double>> rows(c.replicates);
    for (std::size_t j = c.replicates; j-- > 0;) rows[j] = run_single_replicate(c, j, cps);
    const auto reversed = ordered_mean(rows);
    for (std::size_t i = 0; i < reversed.size(); ++i) CHECK_THAT(reversed[i], WithinAbs(one.mean[i], 1e-12));
  }
  SECTION("noiseless sawtooth target is learned") {
    auto c = small_config();
    c.target_index_k = 1;
    c.noise_sigma = 0.0;
    c.n_max = 1000;
    c.replicates = 2;
    const std::vector<std::size_t> cps{10, 1000};
    const auto res = run_replicates(c, cps);
    CHECK(res.mean[1] < res.mean[0]);
  }
  SECTION("every algorithm and setting runs") {
    for (auto a : {AlgorithmName::Ours, AlgorithmName::Zhang, AlgorithmName::YingPontil, AlgorithmName::TarresYao}) {
      for (auto s : {Setting::FiniteHorizon, Setting::Online}) {
        auto c = small_config();
        c.algorithm = a;
        c.setting = s;
        c.replicates = 2;
        const auto res = run_replicates(c);
        CHECK(res.failures.empty());
        for (double v : res.mean) {
          CHECK(std::isfinite(v));
          CHECK(v >= 0.0);
        }
      }
    }
  }
  SECTION("divergent replicates are reported, not thrown") {
    auto c = small_config();
    c.setting = Setting::Online;
    c.gamma0 = 500.0;
    c.replicates = 3;
    const auto res = run_replicates(c);
    CHECK(res.failures.size() == 3);
    for (const auto& f : res.failures) CHECK(f.step >= 1);
    CHECK(res.mean.empty());
    CHECK_THROWS_AS(run_single_replicate(c, 0, default_checkpoints(c)), DivergenceError);
  }
  SECTION("bias-dominated noiseless risk decreases along checkpoints") {
    ExperimentConfig c;
    c.kernel_order_m = 2;
    c.target_index_k = 1;
    c.noise_sigma = 0.0;
    c.n_max = 1000;
    c.n_checkpoints = 10;
    c.replicates = 3;
    const auto res = run_replicates(c);
    for (std::size_t i = 1; i < res.mean.size(); ++i) CHECK(res.mean[i] <= res.mean[i - 1] * 1.05);
  }
}

TEST_CASE("gamma sweep", "[harness]") {
  auto c = small_config();
  c.replicates = 2;
  const std::vector<std::size_t> ns{1, 10, 100, 200};

  SECTION("single-element grid") {
    const std::vector<double> grid{0.7};
    const auto res = gamma_sweep(c, grid, ns);
    REQUIRE(res.best.size() == ns.size());
    for (const auto& b : res.best) CHECK(b.best_gamma == 0.7);
  }
  SECTION("noiseless problems prefer the largest step") {
    c.noise_sigma = 0.0;
    const auto grid = log_grid(0.012, 3.0, 13);
    const auto res = gamma_sweep(c, grid, ns);
    for (const auto& b : res.best) CHECK(b.best_gamma == grid.back());
  }
  SECTION("divergent grid points are marked infinite") {
    const std::vector<double> grid{1.0, 1e4};
    const auto res = gamma_sweep(c, grid, ns);
    CHECK(std::isinf(res.mean_risk[1].back()));
    CHECK(res.best.back().best_gamma == 1.0);
  }
  SECTION("input checks") {
    const std::vector<double> unsorted{1.0, 0.5};
    const std::vector<std::size_t> bad_ns{10, 10};
    const std::vector<double> grid{1.0};
    CHECK_THROWS_AS(gamma_sweep(c, unsorted, ns), ConfigError);
    CHECK_THROWS_AS(gamma_sweep(c, grid, bad_ns), ConfigError);
    CHECK_THROWS_AS(gamma_sweep(c, std::vector<double>{}, ns), ConfigError);
  }
}

TEST_CASE("rate fitting", "[harness]") {
  std::vector<std::pair<double, double>> line, flat, noisy;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : log_spaced(10, 3162, 20)) {
    const double x = static_cast<double>(n);
    line.emplace_back(x, std::pow(x, -0.5));
    flat.emplace_back(x, 0.3);
    noisy.emplace_back(x, std::pow(x, -0.75) * (1.0 + 0.1 * u(rng)));
  }
  const auto fl = fit_rate(line);
  CHECK_THAT(fl.slope, WithinAbs(-0.5, 1e-12));
  CHECK(fl.window_begin == 10);
  CHECK(fl.window_end == 20);
  CHECK(fl.residual_rms < 1e-12);
  CHECK_THAT(fit_rate(flat).slope, WithinAbs(0.0, 1e-12));
  CHECK_THAT(fit_rate(noisy).slope, WithinAbs(-0.75, 0.05));

  // Least squares: perturbing the fitted line only increases the residual.
  const auto fn = fit_rate(noisy);
  double sse = 0.0, sse_shift = 0.0;
  for (std::size_t i = fn.window_begin; i < fn.window_end; ++i) {
    const double lx = std::log10(noisy[i].first), ly = std::log10(noisy[i].second);
    const double r = ly - (fn.intercept + fn.slope * lx);
    const double rs = ly - (fn.intercept + (fn.slope + 0.01) * lx);
    sse += r * r;
    sse_shift += rs * rs;
  }
  CHECK(sse < sse_shift);

  const std::vector<std::pair<double, double>> few{{1, 1}, {2, 1}, {3, 1}};
  CHECK_THROWS_AS(fit_rate(few), ConfigError);
  auto bad = line;
  bad.back().second = 0.0;
  CHECK_THROWS_AS(fit_rate(bad), ConfigError);
}

TEST_CASE("algorithm comparison", "[harness]") {
  const auto rows = compare_algorithms(1, 300, 2, RunOptions{1, std::nullopt});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].algorithm == AlgorithmName::Ours);
  CHECK_THAT(rows[0].predicted_slope, WithinAbs(-0.75, 1e-15));
  CHECK_THAT(rows[1].predicted_slope, WithinAbs(-0.6, 1e-15));
  for (const auto& r : rows) CHECK(std::isfinite(r.effective_slope));

  const auto sat = compare_algorithms(3, 300, 1, RunOptions{1, std::nullopt});
  CHECK_THAT(sat[0].predicted_slope, WithinAbs(-0.8, 1e-15));
  for (const auto& r : sat)
    if (r.algorithm == AlgorithmName::YingPontil) CHECK_THAT(r.predicted_slope, WithinAbs(-5.0 / 7.0, 1e-15));

  // Byte-identical output across thread counts.
  std::ostringstream a, b;
  write_compare_csv(a, rows);
  write_compare_csv(b, compare_algorithms(1, 300, 2, RunOptions{3, std::nullopt}));
  CHECK(a.str() == b.str());

  CHECK_THROWS_AS(compare_algorithms(0, 300, 2), ConfigError);
}

TEST_CASE("csv output", "[harness]") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

  const auto c = small_config();
  const auto res = run_replicates(c);
  std::stringstream sim;
  write_simulate_csv(sim, res);
  const auto table = read_csv(sim);
  CHECK(table.header == std::vector<std::string>{"n", "replicate", "excess_risk"});
  REQUIRE(table.rows.size() == c.replicates * res.checkpoints.size());
  for (const auto& row : table.rows) {
    const auto n = std::stoul(row[0]);
    const auto j = std::stoul(row[1]);
    const auto idx = static_cast<std::size_t>(
        std::find(res.checkpoints.begin(), res.checkpoints.end(), n) - res.checkpoints.begin());
    REQUIRE(idx < res.checkpoints.size());
    const double orig = res.risk[j][idx];
    CHECK(std::abs(std::stod(row[2]) - orig) <= 1e-12 * std::abs(orig));
  }

  SweepResult sweep;
  sweep.best = {{10, 0.5, 1e-3}, {100, 0.25, 2e-4}};
  std::stringstream sw;
  write_sweep_csv(sw, sweep);
  const auto st = read_csv(sw);
  CHECK(st.header == std::vector<std::string>{"n", "best_gamma", "mean_excess_risk"});
  REQUIRE(st.rows.size() == 2);
  CHECK(std::stod(st.rows[1][1]) == 0.25);
  CHECK(std::stod(st.rows[1][2]) == 2e-4);

  std::vector<ComparisonRow> rows{{AlgorithmName::Zhang, -0.6, -0.55, 0.01, {}}};
  std::stringstream cmp;
  write_compare_csv(cmp, rows);
  const auto ct = read_csv(cmp);
  CHECK(ct.header == std::vector<std::string>{"algorithm", "predicted_slope", "effective_slope", "residual_rms"});
  CHECK(ct.rows[0][0] == "zhang");
  CHECK(std::stod(ct.rows[0][2]) == -0.55);

  std::istringstream broken("a,b\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(broken), ConfigError);
}
