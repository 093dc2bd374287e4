#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "curvegroups/errors.hpp"
#include "curvegroups/kernel_regression.hpp"
#include "curvegroups/rng.hpp"
#include "curvegroups/smoother_plan.hpp"
#include "test_helpers.hpp"

using namespace curvegroups;

TEST_CASE("local linear reproduces lines") {
  CurveSample s{"s", {0.0, 0.3, 0.5, 0.9, 1.4, 2.0}, {}};
  for (double x : s.xs) s.ys.push_back(2.0 * x + 1.0);
  for (auto type : {KernelType::Epanechnikov, KernelType::Gaussian}) {
    KernelFunction k(type);
    for (double x : {0.2, 0.7, 1.6}) {
      auto c = local_linear_fit(s, Bandwidth(0.8), x, k);
      CHECK(c.alpha0 == doctest::Approx(2.0 * x + 1.0).epsilon(1e-12));
      CHECK(c.alpha1 == doctest::Approx(2.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant sample") {
  CurveSample s{"s", {0, 1, 2, 3}, {5, 5, 5, 5}};
  auto c = local_linear_fit(s, Bandwidth(2.0), 1.5);
  CHECK(c.alpha0 == doctest::Approx(5.0));
  CHECK(c.alpha1 == doctest::Approx(0.0));
}

TEST_CASE("three hand points against the 2x2 normal equations") {
  CurveSample s{"s", {0, 1, 2}, {0, 1, 4}};
  auto c = local_linear_fit(s, Bandwidth(1.0), 1.0, KernelFunction(KernelType::Gaussian));
  // symmetric weights w0 = w2, so the slope is (4 - 0) / 2 and the intercept
  // is the weighted mean
  const double w1 = testing::gaussian(0.0), w0 = testing::gaussian(1.0);
  CHECK(c.alpha0 == doctest::Approx((w1 * 1 + w0 * 4) / (w1 + 2 * w0)).epsilon(1e-12));
  CHECK(c.alpha1 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("alpha0 matches an independent solver at random points") {
  RngStream rng(11);
  CurveSample s{"s", {}, {}};
  for (int i = 0; i < 80; ++i) {
    const double x = rng.uniform();
    s.xs.push_back(x);
    s.ys.push_back(std::sin(6 * x) + 0.2 * rng.normal());
  }
  for (int t = 0; t < 20; ++t) {
    const double x = rng.uniform(0.1, 0.9);
    auto c = local_linear_fit(s, Bandwidth(0.2), x);
    auto o = testing::wls_at(s.xs, s.ys, x, 0.2, testing::epanechnikov);
    CHECK(c.alpha0 == doctest::Approx(o.intercept).epsilon(1e-8));
    CHECK(c.alpha1 == doctest::Approx(o.slope).epsilon(1e-8));
  }
}

TEST_CASE("degenerate window throws") {
  CurveSample s{"s", {0.0, 0.0, 5.0}, {1, 2, 3}};
  CHECK_THROWS_AS(local_linear_fit(s, Bandwidth(1.0), 0.0), DegenerateFitError);
  EvaluationGrid g(0.0, 5.0, 3);
  try {
    fit_on_grid(s, Bandwidth(1.0), g);
    FAIL("expected a degenerate fit");
  } catch (const DegenerateFitError& e) {
    CHECK(e.location() == 0.0);
  }
  CHECK_THROWS_AS(Bandwidth(0.0), Error);
  CHECK_THROWS_AS(Bandwidth(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("grid fits") {
  RngStream rng(3);
  auto s = testing::line_sample(-1.0, 0.5, 50, rng);
  EvaluationGrid g(0.1, 0.9, 5);
  auto v = fit_on_grid(s, Bandwidth(0.3), g);
  for (std::size_t q = 0; q < 5; ++q) CHECK(v[q] == doctest::Approx(-1.0 + 0.5 * g[q]));

  s.ys = {};
  for (double x : s.xs) s.ys.push_back(std::cos(3 * x));
  auto one = fit_on_grid(s, Bandwidth(0.3), EvaluationGrid::single(0.4));
  REQUIRE(one.size() == 1);
  CHECK(one[0] == local_linear_fit(s, Bandwidth(0.3), 0.4).alpha0);
}

TEST_CASE("bin_sample by hand") {
  CurveSample s{"s", {0, 0, 1, 1}, {1, 3, 5, 7}};
  auto b = bin_sample(s, 2);
  CHECK(b.centers == std::vector<double>{0, 1});
  CHECK(b.weights == std::vector<double>{2, 2});
  CHECK(b.means == std::vector<double>{2, 6});
  CHECK(b.within_ss == std::vector<double>{2, 2});
  CHECK_THROWS_AS(bin_sample(s, 1), Error);
}

TEST_CASE("binning conserves mass and is lossless on aligned designs") {
  RngStream rng(5);
  CurveSample s{"s", {}, {}};
  for (int i = 0; i < 300; ++i) {
    const double x = static_cast<double>(rng.index(11)) / 10.0;  // 11 distinct values
    s.xs.push_back(x);
    s.ys.push_back(x * x + rng.normal());
  }
  s.xs.push_back(0.0);
  s.ys.push_back(0.0);
  s.xs.push_back(1.0);
  s.ys.push_back(1.0);
  auto b = bin_sample(s, 11);
  double total = 0;
  for (double w : b.weights) total += w;
  CHECK(total == doctest::Approx(static_cast<double>(s.size())));

  EvaluationGrid g(0.05, 0.95, 17);
  auto exact = fit_on_grid(s, Bandwidth(0.25), g);
  auto binned = fit_on_grid(b, Bandwidth(0.25), g);
  for (std::size_t q = 0; q < g.size(); ++q) CHECK(binned[q] == doctest::Approx(exact[q]).epsilon(1e-12));
}

TEST_CASE("binned and exact fits agree on smooth functions") {
  RngStream rng(8);
  for (int f = 0; f < 2; ++f) {
    CurveSample s{"s", {}, {}};
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform();
      s.xs.push_back(x);
      s.ys.push_back(f == 0 ? std::sin(2 * std::numbers::pi * x) : 1 - 3 * x + 2 * x * x * x);
    }
    const auto [lo, hi] = std::minmax_element(s.ys.begin(), s.ys.end());
    EvaluationGrid g(0.05, 0.95, 100);
    auto exact = fit_on_grid(s, Bandwidth(0.08), g);
    auto binned = fit_on_grid(bin_sample(s, 400), Bandwidth(0.08), g);
    double worst = 0;
    for (std::size_t q = 0; q < g.size(); ++q) worst = std::max(worst, std::abs(exact[q] - binned[q]));
    CHECK(worst <= 0.01 * (*hi - *lo));
  }
}

TEST_CASE("default bandwidth candidates") {
  std::vector<double> xs{0.0, 0.1, 0.2, 0.4, 1.0};
  auto c = default_bandwidth_candidates(xs);
  REQUIRE(c.size() == 30);
  // gaps 0.1, 0.1, 0.2, 0.6 have median 0.15
  CHECK(c.front() == doctest::Approx(1.5 * 0.15));
  CHECK(c.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < c.size(); ++i) {
    CHECK(c[i] / c[i - 1] == doctest::Approx(c[1] / c[0]));
  }
}

TEST_CASE("cv tie rule and single candidate") {
  RngStream rng(2);
  auto s = testing::line_sample(0.5, 2.0, 60, rng);
  std::vector<double> cand{0.1, 0.2, 0.4, 0.8};
  auto r = cv_bandwidth(s, cand);
  CHECK(r.selected_index == 3);
  for (double score : r.scores) CHECK(score == doctest::Approx(0.0).epsilon(1e-12));

  auto one = cv_bandwidth(s, std::vector<double>{0.3});
  CHECK(one.selected().value() == 0.3);
  CHECK(argmin_prefer_larger(std::vector<double>{1.0, 0.5, 0.5 + 1e-15, 2.0}, 1e-12) == 2);
}

namespace {

// Naive leave-one-out: drop point i, refit at x_i from scratch.
double brute_cv(const CurveSample& s, double h, std::size_t& excluded) {
  const double floor = 1e-12 * 0.75;
  double total = 0, used = 0;
  excluded = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<double> xs, ys;
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (t == i || testing::epanechnikov((s.xs[t] - s.xs[i]) / h) <= floor) continue;
      xs.push_back(s.xs[t]);
      ys.push_back(s.ys[t]);
    }
    std::vector<double> distinct = xs;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
      ++excluded;
      continue;
    }
    const auto fit = testing::wls_at(xs, ys, s.xs[i], h, testing::epanechnikov);
    total += (s.ys[i] - fit.intercept) * (s.ys[i] - fit.intercept);
    used += 1;
  }
  if (used < 0.9 * static_cast<double>(s.size())) return std::numeric_limits<double>::infinity();
  return total * static_cast<double>(s.size()) / used;
}

}  // namespace

TEST_CASE("cv matches a brute-force leave-one-out evaluation") {
  RngStream rng(21);
  CurveSample s{"s", {}, {}};
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform();
    s.xs.push_back(x);
    s.ys.push_back(std::sin(2 * std::numbers::pi * x) + 0.1 * rng.normal());
  }
  std::vector<double> cand;
  for (int c = 0; c < 20; ++c) cand.push_back(0.01 * std::pow(50.0, c / 19.0));
  auto r = cv_bandwidth(s, cand);

  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cand.size(); ++c) {
    std::size_t excluded = 0;
    const double score = brute_cv(s, cand[c], excluded);
    if (std::isfinite(score)) {
      CHECK(r.scores[c] == doctest::Approx(score).epsilon(1e-9));
      CHECK(r.excluded[c] == excluded);
    } else {
      CHECK(std::isinf(r.scores[c]));
    }
    if (score < best_score) {
      best_score = score;
      best = c;
    }
  }
  CHECK(r.selected_index == best);
  for (double score : r.scores) CHECK(r.scores[r.selected_index] <= score);
}

TEST_CASE("binned cv equals the plan criterion") {
  RngStream rng(4);
  CurveSample s{"s", {}, {}};
  for (int i = 0; i < 900; ++i) {
    const double x = rng.uniform();
    s.xs.push_back(x);
    s.ys.push_back(x * x + 0.3 * rng.normal());
  }
  auto cand = default_bandwidth_candidates(s.xs);
  auto binned = cv_bandwidth(bin_sample(s, 400), cand);
  auto design = Design::binned(s.xs, 400);
  auto summary = design.summarize(s.ys);
  SmootherPlan plan(design, cand, nullptr, KernelFunction{});
  for (std::size_t c = 0; c < cand.size(); ++c) {
    if (std::isfinite(binned.scores[c])) {
      CHECK(plan.cv_score(c, summary) == doctest::Approx(binned.scores[c]).epsilon(1e-9));
    }
  }
  CHECK(plan.select(summary).index == binned.selected_index);
}

TEST_CASE("all candidates degenerate") {
  CurveSample s{"s", {0.0, 1.0, 2.0, 3.0}, {0, 1, 0, 1}};
  try {
    cv_bandwidth(s, std::vector<double>{0.01, 0.02});
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllCandidatesDegenerate);
  }
}
