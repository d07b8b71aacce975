#include "msw/error.hpp"
#include "msw/harness.hpp"
#include "msw/maxsliced.hpp"
#include "msw/measures.hpp"
#include "msw/ratio.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <set>

using namespace msw;
using namespace msw::harness;

namespace {

const std::string kTmp = MSW_TEST_TMP;

RateCurve curve(std::initializer_list<std::pair<double, double>> points) {
  RateCurve c;
  for (const auto& [n, mean] : points) c.rows.push_back(RateRow{static_cast<std::size_t>(n), mean, 0.0, 1, 0.0, {}});
  return c;
}

ExperimentConfig small_gaussian(Experiment kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.n_grid = {20, 40};
  c.mc_runs = 6;
  c.master_seed = 5;
  c.optimizer.restarts = 4;
  return c;
}

}  // namespace

TEST_CASE("config parsing: keys, comments and defaults") {
  const auto cfg = parse_config(
      "# Gaussian rate\n"
      "experiment = rate_vs_truth\n"
      "spec = gaussian\n"
      "dim = 3\n"
      "covariance = equicorrelated:0.5\n"
      "n_grid = 10, 20, 40\n"
      "mc_runs = 7\n"
      "master_seed = 42\n"
      "optimizer_restarts = 5\n"
      "overlay_kind = finite\n");
  CHECK(cfg.experiment == Experiment::RateVsTruth);
  const auto& g = std::get<GaussianSpec>(cfg.spec);
  CHECK(g.mean.size() == 3);
  CHECK(g.covariance(0, 1) == 0.5);
  CHECK(g.covariance(2, 2) == 1.0);
  CHECK(cfg.n_grid == std::vector<std::size_t>{10, 20, 40});
  CHECK(cfg.mc_runs == 7);
  CHECK(cfg.master_seed == 42);
  CHECK(cfg.optimizer.restarts == 5);
  CHECK(cfg.optimizer.max_iters == OptimizerOpts{}.max_iters);
  REQUIRE(cfg.overlay.has_value());
  CHECK(cfg.overlay->params.d == 3.0);
  CHECK(cfg.overlay->params.s == 5.0);

  const auto pareto = parse_config("experiment = rate_two_sample\nspec = pareto\ndim = 4\n");
  CHECK(std::get<ParetoProductSpec>(pareto.spec).shape == 8.0);
  CHECK(std::get<ParetoProductSpec>(pareto.spec).d == 4);
  CHECK(pareto.mc_runs == 200);
  CHECK(parse_config("experiment = rate_vs_truth\n").mc_runs == 100);

  const auto rk = parse_config("experiment = rkhs_rate\nspec = rkhs\nd_test_list = 10,20\n");
  CHECK(rk.d_test_list == std::vector<std::size_t>{10, 20});
  CHECK(std::get<RkhsPushforwardSpec>(rk.spec).kernel.sigma2() == 4.0);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("spec = gaussian\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nexperiment = rate_vs_truth\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nn_grid = 10, 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nn_grid = 1, 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nmc_runs = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nspec = pareto\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = rate_vs_truth\nmc_runs = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = warp\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(load_config(kTmp + "/does/not/exist.cfg"), IoError);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
  CHECK(parse_format("json") == Format::Json);
}

TEST_CASE("canonical text and hash") {
  const auto a = parse_config("experiment = rate_vs_truth\nmc_runs = 5\n");
  const auto b = parse_config("mc_runs = 5\n\nexperiment=rate_vs_truth # same\n");
  CHECK(canonical_text(a) == canonical_text(b));
  CHECK(parse_config(canonical_text(a)).mc_runs == 5);
  CHECK(canonical_text(parse_config(canonical_text(a))) == canonical_text(a));
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  const auto meta = nlohmann::json::parse(meta_json(a));
  CHECK(meta["master_seed"] == 1);
  CHECK(meta["config_hash"] == git_blob_hash(canonical_text(a)));
}

TEST_CASE("stream indices are distinct across roles, trials and sizes") {
  std::set<std::uint64_t> seen;
  for (std::size_t n = 0; n < 5; ++n) {
    for (std::size_t t = 0; t < 7; ++t) {
      for (std::size_t r = 0; r < 4; ++r) CHECK(seen.insert(stream_index(n, t, 7, r)).second);
    }
  }
  CHECK(stream_index(2, 3, 7, 1) == 2 * 7 * 4 + 3 * 4 + 1);
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(3) == 3);
}

TEST_CASE("slope fit") {
  RateCurve quarter;
  RateCurve half;
  for (const double n : {10.0, 20.0, 40.0, 80.0, 160.0}) {
    quarter.rows.push_back(RateRow{static_cast<std::size_t>(n), std::pow(n, -0.25), 0.0, 1, 0.0, {}});
    half.rows.push_back(RateRow{static_cast<std::size_t>(n), 3.0 * std::pow(n, -0.5), 0.0, 1, 0.0, {}});
  }
  const auto q = fit_loglog_slope(quarter);
  CHECK(q.slope == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(q.r2 == doctest::Approx(1.0).epsilon(1e-12));
  const auto h = fit_loglog_slope(half);
  CHECK(h.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(h.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit_loglog_slope(half, 40).rows_used == 3);
  CHECK_THROWS_AS(fit_loglog_slope(half, 80), DomainError);
  CHECK_THROWS_AS(fit_loglog_slope(curve({{10, 1.0}, {20, 0.0}, {40, -1.0}, {80, 0.5}})), DomainError);
}

TEST_CASE("CSV emission contract and round trips") {
  RateCurve one;
  one.rows.push_back(RateRow{100, 0.5, 0.01, 100, 1.2, {}});
  CHECK(to_csv(one) == "n,mean,stderr,runs,wall_s\n100,0.5,0.01,100,1.2\n");

  RateCurve c;
  c.rows.push_back(RateRow{50, 0.1 + 0.2, 1.0 / 3.0, 10, 0.0, 0.125});
  c.rows.push_back(RateRow{100, std::nextafter(0.2, 1.0), 1e-300, 10, 12345.678, 3e10});
  for (const auto& parsed : {parse_rate_csv(to_csv(c)), parse_rate_json(to_json(c))}) {
    REQUIRE(parsed.size() == 1);
    REQUIRE(parsed[0].rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(parsed[0].rows[i].n == c.rows[i].n);
      CHECK(parsed[0].rows[i].mean == c.rows[i].mean);
      CHECK(parsed[0].rows[i].std_error == c.rows[i].std_error);
      CHECK(parsed[0].rows[i].runs == c.rows[i].runs);
      CHECK(parsed[0].rows[i].wall_s == c.rows[i].wall_s);
      CHECK(parsed[0].rows[i].bound == c.rows[i].bound);
    }
  }
  const auto j = nlohmann::json::parse(to_json(one));
  REQUIRE(j["rows"].size() == 1);
  const auto& row = j["rows"][0];
  CHECK(row.size() == 5);
  for (const char* key : {"n", "mean", "stderr", "runs", "wall_s"}) CHECK(row.contains(key));

  RateCurve a = one, b = one;
  a.d_test = 10;
  b.d_test = 20;
  const auto many = parse_rate_csv(to_csv(std::vector<RateCurve>{a, b}));
  REQUIRE(many.size() == 2);
  CHECK(many[1].d_test == 20);
  CHECK(parse_rate_json(to_json(std::vector<RateCurve>{a, b}))[0].d_test == 10);
  CHECK_THROWS_AS(parse_rate_csv("n,mean\n1,2\n"), IoError);
  CHECK_THROWS_AS(parse_rate_json("{not json"), IoError);
}

TEST_CASE("emit writes body and metadata files") {
  const auto cfg = small_gaussian(Experiment::RateVsTruth);
  RateCurve one;
  one.rows.push_back(RateRow{100, 0.5, 0.01, 100, 1.2, {}});
  const std::string path = kTmp + "/emit_test.csv";
  emit({one}, Format::Csv, path, cfg);
  CHECK(read_file(path) == to_csv(one));
  const auto meta = nlohmann::json::parse(read_file(meta_path(path)));
  CHECK(meta["master_seed"] == 5);
  CHECK(meta["experiment"] == "rate_vs_truth");
  CHECK_THROWS_AS(write_file(kTmp + "/no/such/dir/file.csv", "x"), IoError);
}

TEST_CASE("sample CSV parsing") {
  const auto plain = parse_sample_csv("1,2\n3,4\n");
  CHECK(plain.n() == 2);
  CHECK(plain.d() == 2);
  CHECK(plain.row(1)(0) == 3.0);
  const auto headed = parse_sample_csv("x1,x2,x3\n1,2,3\n");
  CHECK(headed.n() == 1);
  CHECK(headed.d() == 3);
  CHECK(parse_sample_csv("0.5\r\n-1e-3\n").row(1)(0) == -1e-3);
  CHECK_THROWS_AS(parse_sample_csv("1,2\n3\n"), IoError);
  CHECK_THROWS_AS(parse_sample_csv("a,b\n1,2\n"), IoError);
  CHECK_THROWS_AS(parse_sample_csv(""), IoError);
  CHECK_THROWS_AS(read_sample_csv(kTmp + "/missing.csv"), IoError);
  RngStream rng(41, 0);
  const auto xs = test::uniform_matrix(5, 3, rng);
  for (const bool header : {false, true}) {
    const auto back = parse_sample_csv(to_sample_csv(xs, header));
    CHECK(back.data() == xs.data());
  }
}

TEST_CASE("rate experiments are deterministic and thread-count independent") {
  for (const auto kind : {Experiment::RateVsTruth, Experiment::RateTwoSample}) {
    const auto cfg = small_gaussian(kind);
    RunOptions serial{1, false};
    RunOptions parallel{4, false};
    const auto a = to_csv(run_rate_experiment(cfg, serial));
    CHECK(a == to_csv(run_rate_experiment(cfg, serial)));
    CHECK(a == to_csv(run_rate_experiment(cfg, parallel)));
    auto other = cfg;
    other.master_seed = 6;
    CHECK(a != to_csv(run_rate_experiment(other, serial)));
  }
  const auto timed = run_rate_experiment(small_gaussian(Experiment::RateVsTruth));
  for (const auto& row : timed.rows) {
    CHECK(row.wall_s > 0.0);
    CHECK(row.runs == 6);
    CHECK(row.std_error >= 0.0);
    CHECK(row.mean > 0.0);
  }
}

TEST_CASE("single-run curves repeat bit for bit") {
  auto cfg = small_gaussian(Experiment::RateVsTruth);
  cfg.mc_runs = 1;
  cfg.n_grid = {30};
  const auto a = run_rate_experiment(cfg, {1, false});
  const auto b = run_rate_experiment(cfg, {1, false});
  CHECK(a.rows[0].mean == b.rows[0].mean);
  CHECK(a.rows[0].std_error == 0.0);
}

TEST_CASE("stderr is the sample standard deviation over sqrt(runs)") {
  auto cfg = small_gaussian(Experiment::RateTwoSample);
  cfg.n_grid = {25};
  cfg.mc_runs = 5;
  const auto c = run_rate_experiment(cfg, {1, false});
  // Reproduce each trial with the documented stream layout.
  std::vector<double> values;
  for (std::size_t t = 0; t < 5; ++t) {
    RngStream sx(cfg.master_seed, stream_index(0, t, 5, 0));
    RngStream sy(cfg.master_seed, stream_index(0, t, 5, 1));
    const auto xs = sample(cfg.spec, 25, sx);
    const auto ys = sample(cfg.spec, 25, sy);
    values.push_back(
        msw_empirical(xs, ys, cfg.p, cfg.optimizer, RngStream(cfg.master_seed, stream_index(0, t, 5, 2))).value);
  }
  double mean = 0.0;
  for (const double v : values) mean += v / 5.0;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  CHECK(c.rows[0].mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(c.rows[0].std_error == doctest::Approx(std::sqrt(ss / 4.0) / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("two-sample and vs-truth means agree within a factor of two at n = 200") {
  auto truth = small_gaussian(Experiment::RateVsTruth);
  truth.n_grid = {200};
  truth.mc_runs = 20;
  truth.optimizer = OptimizerOpts{};
  auto two = truth;
  two.experiment = Experiment::RateTwoSample;
  const auto a = run_rate_experiment(truth, {std::nullopt, false}).rows[0];
  const auto b = run_rate_experiment(two, {std::nullopt, false}).rows[0];
  const double slack = 3.0 * (a.std_error + b.std_error);
  CHECK(b.mean <= 2.0 * a.mean + slack);
  CHECK(b.mean >= 0.5 * a.mean - slack);
}

TEST_CASE("Gaussian curve decreases across the grid") {
  auto cfg = small_gaussian(Experiment::RateVsTruth);
  cfg.n_grid = {100, 200, 400};
  cfg.mc_runs = 12;
  const auto c = run_rate_experiment(cfg, {std::nullopt, false});
  for (std::size_t i = 1; i < c.rows.size(); ++i) {
    CHECK(c.rows[i].mean < c.rows[i - 1].mean + 3.0 * (c.rows[i].std_error + c.rows[i - 1].std_error));
  }
}

TEST_CASE("overlay column carries the expectation bound to the power 1/p") {
  auto cfg = small_gaussian(Experiment::RateVsTruth);
  cfg.overlay = Overlay{};
  cfg.overlay->params.d = 2;
  const auto c = run_rate_experiment(cfg, {1, false});
  for (const auto& row : c.rows) {
    REQUIRE(row.bound.has_value());
    CHECK(*row.bound == doctest::Approx(std::sqrt(bounds::expectation_bound_finite(cfg.overlay->params, row.n))));
  }
  CHECK(to_csv(c).rfind("n,mean,stderr,runs,wall_s,bound\n", 0) == 0);
}

TEST_CASE("rkhs rate curves, one per d_test") {
  auto cfg = parse_config("experiment = rkhs_rate\nspec = rkhs\nd_test_list = 3,6\nn_grid = 20,40\nmc_runs = 4\n"
                          "optimizer_restarts = 3\n");
  const auto curves = run_rkhs_rate_experiment(cfg, {1, false});
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].d_test == 3);
  CHECK(curves[1].d_test == 6);
  CHECK(to_csv(curves) == to_csv(run_rkhs_rate_experiment(cfg, {3, false})));
  CHECK(to_csv(curves).rfind("d_test,n,mean", 0) == 0);
}

TEST_CASE("ratio experiment table") {
  auto cfg = small_gaussian(Experiment::RatioExceedance);
  cfg.n_grid = {30};
  cfg.mc_runs = 5;
  const std::vector<double> eps{0.0, 0.5, 3.0};
  const auto table = run_ratio_experiment(cfg, eps, {1, false});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].frequency == 1.0);
  CHECK(table.rows[0].bound == 1.0);
  CHECK(table.rows[2].frequency == 0.0);
  CHECK(table.rows[1].bound_raw == ratio_tail_bound(30, 2, 0.5).raw);
  REQUIRE(table.statistics.size() == 1);
  CHECK(table.statistics[0].size() == 5);
  CHECK(to_csv(table) == to_csv(run_ratio_experiment(cfg, eps, {2, false})));
  CHECK(to_csv(table).rfind("n,eps,frequency,freq_stderr,bound,bound_raw,runs\n", 0) == 0);
  CHECK(nlohmann::json::parse(to_json(table)).contains("rows"));
  auto pareto = cfg;
  pareto.spec = ParetoProductSpec{8.0, 2};
  CHECK_THROWS_AS(run_ratio_experiment(pareto, eps), ConfigError);
}
