#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "curvegroups/errors.hpp"
#include "curvegroups/hypothesis_test.hpp"
#include "curvegroups/k_selection.hpp"
#include "curvegroups/rng.hpp"
#include "test_helpers.hpp"

using namespace curvegroups;

namespace {

// Curves j = 0..J-1 with mean means[j](x) and noise sd on U[0, 1].
template <class Mean>
CurveCollection make_curves(std::size_t J, std::size_t n, double sd, Mean mean, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<CurveSample> raw;
  for (std::size_t j = 0; j < J; ++j) {
    CurveSample s{"c" + std::to_string(j), {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.uniform();
      s.xs.push_back(x);
      s.ys.push_back(mean(j, x) + sd * rng.normal());
    }
    raw.push_back(std::move(s));
  }
  return validate_collection(std::move(raw));
}

TestConfig small_config(std::uint64_t seed, std::size_t boot = 40) {
  TestConfig cfg;
  cfg.bootstrap.replicates = boot;
  cfg.bootstrap.seed = seed;
  return cfg;
}

double wave(std::size_t, double x) { return std::sin(2 * std::numbers::pi * x); }

}  // namespace

TEST_CASE("config validation") {
  TestConfig cfg;
  cfg.bootstrap.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.bootstrap.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("pooled fit of a singleton equals the curve estimate") {
  auto c = make_curves(3, 80, 0.2, wave, 1);
  auto grid = common_grid(c, 50);
  auto est = estimate_curves(c, grid);
  auto singles = Partition::from_assignment(std::vector<std::size_t>{0, 1, 2});
  auto pooled = pooled_fit(c, singles, grid);
  CHECK(pooled.group_values == est.values);
  CHECK(pooled.group_bandwidths == est.bandwidths);
  auto v = v_process(est, pooled, singles);
  for (double x : v.data()) CHECK(x == 0.0);
  CHECK(statistic(v, grid, Norm::CM) == 0.0);
}

TEST_CASE("pooling duplicated data leaves the fit unchanged at the same bandwidth") {
  auto one = make_curves(1, 60, 0.3, wave, 2);
  auto s = one[0];
  auto twin = s;
  twin.curve_id = "twin";
  auto c = validate_collection({s, twin});
  auto grid = common_grid(c, 30);
  auto pooled = pooled_fit(c, Partition::from_assignment(std::vector<std::size_t>{0, 0}), grid);
  auto direct = fit_on_grid(s, Bandwidth(pooled.group_bandwidths[0]), grid);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    CHECK(pooled.group_values(0, q) == doctest::Approx(direct[q]).epsilon(1e-10));
  }
}

TEST_CASE("noiseless curves on one line pool to that line with zero residuals") {
  auto c = make_curves(2, 40, 0.0, [](std::size_t, double x) { return 3 - 2 * x; }, 3);
  auto grid = common_grid(c, 20);
  auto p = Partition::from_assignment(std::vector<std::size_t>{0, 0});
  auto pooled = pooled_fit(c, p, grid);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    CHECK(pooled.group_values(0, q) == doctest::Approx(3 - 2 * grid[q]).epsilon(1e-10));
  }
  for (const auto& r : null_residuals(c, p, pooled))
    for (double e : r) CHECK(e == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("residuals against an independent pooled fit") {
  auto c = make_curves(2, 50, 0.2, wave, 4);
  auto grid = common_grid(c, 20);
  auto p = Partition::from_assignment(std::vector<std::size_t>{0, 0});
  auto pooled = pooled_fit(c, p, grid);
  auto base = null_residuals(c, p, pooled);

  CurveSample all{"all", c[0].xs, c[0].ys};
  all.xs.insert(all.xs.end(), c[1].xs.begin(), c[1].xs.end());
  all.ys.insert(all.ys.end(), c[1].ys.begin(), c[1].ys.end());
  const Bandwidth h(pooled.group_bandwidths[0]);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < base[j].size(); ++i)
      CHECK(base[j][i] ==
            doctest::Approx(c[j].ys[i] - local_linear_fit(all, h, c[j].xs[i]).alpha0).epsilon(1e-9));

  // the fit moves with the data, so a common shift cancels
  std::vector<CurveSample> raw = c.samples();
  for (auto& s : raw)
    for (double& y : s.ys) y += 0.7;
  auto shifted = null_residuals(validate_collection(raw), p, pooled);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < base[j].size(); ++i)
      CHECK(shifted[j][i] == doctest::Approx(base[j][i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("v process by hand") {
  CurveEstimateMatrix est;
  est.grid = EvaluationGrid(0, 1, 3);
  est.values = Matrix(2, 3);
  PooledEstimates pooled;
  pooled.grid = est.grid;
  pooled.group_values = Matrix(1, 3);
  for (std::size_t q = 0; q < 3; ++q) {
    est.values(0, q) = 1.0 + q;
    est.values(1, q) = 2.0 * q;
    pooled.group_values(0, q) = 0.5 * q;
  }
  auto v = v_process(est, pooled, Partition::from_assignment(std::vector<std::size_t>{0, 0}));
  CHECK(v.data() == std::vector<double>{1.0, 1.5, 2.0, 0.0, 1.5, 3.0});
}

TEST_CASE("statistic closed forms") {
  EvaluationGrid grid(-1.0, 2.0, 25);
  Matrix zero(4, 25);
  CHECK(statistic(zero, grid, Norm::CM) == 0.0);
  CHECK(statistic(zero, grid, Norm::KS) == 0.0);
  Matrix c(4, 25, -0.5);
  CHECK(statistic(c, grid, Norm::CM) == doctest::Approx(4 * 0.25 * 3.0));
  CHECK(statistic(c, grid, Norm::KS) == doctest::Approx(4 * 0.5 * 3.0));
}

TEST_CASE("statistic against a finer Riemann sum of the interpolated integrand") {
  RngStream rng(5);
  EvaluationGrid grid(0.0, 1.0, 50);
  Matrix v(3, 50);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t q = 0; q < 50; ++q) v(r, q) = rng.normal();
  for (auto norm : {Norm::CM, Norm::KS}) {
    double fine = 0;
    const double h = grid.step() / 10;
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t q = 0; q + 1 < 50; ++q) {
        const double f0 = norm == Norm::CM ? v(r, q) * v(r, q) : std::abs(v(r, q));
        const double f1 = norm == Norm::CM ? v(r, q + 1) * v(r, q + 1) : std::abs(v(r, q + 1));
        for (int s = 0; s < 10; ++s) {
          const double t = (s + 0.5) / 10;
          fine += h * ((1 - t) * f0 + t * f1);
        }
      }
    }
    CHECK(statistic(v, grid, norm) == doctest::Approx(fine).epsilon(1e-6));
  }
}

TEST_CASE("saturated model gives D = 0 and no rejection") {
  auto c = make_curves(3, 60, 0.3, [](std::size_t j, double x) { return j * x; }, 6);
  auto grid = common_grid(c, 30);
  auto r = test_h0k(c, 3, small_config(1, 10), grid);
  CHECK(r.statistic == 0.0);
  CHECK_FALSE(r.reject);
}

TEST_CASE("test results are reproducible and thread-count invariant") {
  auto c = make_curves(4, 70, 0.3, wave, 7);
  auto grid = common_grid(c, 40);
  auto cfg = small_config(123, 30);
  auto a = test_h0k(c, 1, cfg, grid);
  auto b = test_h0k(c, 1, cfg, grid);
  cfg.threads = 3;
  auto t = test_h0k(c, 1, cfg, grid);
  CHECK(a.boot_stats == b.boot_stats);
  CHECK(a.boot_stats == t.boot_stats);
  CHECK(a.statistic == t.statistic);
  CHECK(a.boot_stats.size() == 30);
  CHECK(a.reject == bootstrap_reject(a.statistic, a.boot_stats, a.alpha));
  CHECK(a.p_value == bootstrap_p_value(a.statistic, a.boot_stats));
  for (double d : a.boot_stats) CHECK(d >= 0.0);
}

TEST_CASE("one replicate is reproducible") {
  auto c = make_curves(3, 60, 0.3, wave, 8);
  auto grid = common_grid(c, 30);
  auto cfg = small_config(1);
  RngStream r1(77), r2(77);
  CHECK(bootstrap_replicate(c, 1, grid, cfg, r1, 5) == bootstrap_replicate(c, 1, grid, cfg, r2, 5));
}

TEST_CASE("zero residuals reproduce the fitted values") {
  auto c = make_curves(3, 80, 0.0, [](std::size_t, double x) { return 1 + x; }, 9);
  auto grid = common_grid(c, 30);
  TestContext ctx(c, grid, small_config(1));
  auto obs = ctx.observe(1, 3);
  for (double e : obs.residuals) CHECK(std::abs(e) < 1e-10);
  RngStream w(4);
  CHECK(ctx.replicate(obs, w, 5) < 1e-15);
}

TEST_CASE("a common shift leaves partition and statistic unchanged") {
  auto mean = [](std::size_t j, double x) { return j < 2 ? x : 1 - x; };
  auto c = make_curves(4, 80, 0.2, mean, 10);
  std::vector<CurveSample> raw = c.samples();
  for (auto& s : raw)
    for (double& y : s.ys) y += 25.0;
  auto shifted = validate_collection(raw);
  auto grid = common_grid(c, 40);
  TestContext a(c, grid, small_config(2)), b(shifted, grid, small_config(2));
  auto oa = a.observe(2, 11);
  auto ob = b.observe(2, 11);
  CHECK(oa.partition == ob.partition);
  CHECK(ob.statistic == doctest::Approx(oa.statistic).epsilon(1e-8));
}

TEST_CASE("separated groups are detected and selected") {
  auto mean = [](std::size_t j, double x) { return (j % 2) * 1.5 + std::sin(3 * x); };
  auto c = make_curves(4, 100, 0.2, mean, 12);
  auto grid = common_grid(c, 40);
  auto cfg = small_config(3, 40);
  auto r1 = test_h0k(c, 1, cfg, grid);
  CHECK(r1.reject);
  auto trace = select_k(c, 4, cfg, grid);
  CHECK(trace.selected_k == 2);
  CHECK_FALSE(trace.saturated);
  REQUIRE(trace.tests.size() == 2);
  CHECK(trace.tests[0].reject);
  CHECK_FALSE(trace.tests[1].reject);
  CHECK(trace.final_partition ==
        Partition::from_assignment(std::vector<std::size_t>{0, 1, 0, 1}));
  CHECK(trace.selected().k == 2);

  auto again = select_k(c, 4, cfg, grid);
  CHECK(again.tests.back().boot_stats == trace.tests.back().boot_stats);

  auto capped = select_k(c, 1, cfg, grid);
  CHECK(capped.saturated);
  CHECK(capped.selected_k == 1);
}
