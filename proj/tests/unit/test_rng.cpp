#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "curvegroups/hypothesis_test.hpp"
#include "curvegroups/rng.hpp"

using namespace curvegroups;

TEST_CASE("derived seeds depend on the whole path") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(7, {a, b}));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) == derive_seed(7, {1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
}

TEST_CASE("uniform and index ranges") {
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(rng.index(7) < 7);
  }
}

TEST_CASE("binomial mean") {
  RngStream rng(2);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) sum += static_cast<double>(rng.binomial(50, 0.3));
  CHECK(sum / 20000 == doctest::Approx(15.0).epsilon(0.01));
}

TEST_CASE("wild weights take two values with the right moments") {
  RngStream rng(3);
  auto w = wild_weights(1000000, rng);
  double m1 = 0, m2 = 0, m3 = 0;
  for (double v : w) {
    CHECK((v == kWildLow || v == kWildHigh));
    m1 += v;
    m2 += v * v;
    m3 += v * v * v;
  }
  const double n = static_cast<double>(w.size());
  CHECK(std::abs(m1 / n) <= 0.005);
  CHECK(std::abs(m2 / n - 1) <= 0.01);
  CHECK(std::abs(m3 / n - 1) <= 0.02);

  // closed-form moments of the two-point law
  const double p = kWildLowProbability;
  CHECK(p * kWildLow + (1 - p) * kWildHigh == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p * kWildLow * kWildLow + (1 - p) * kWildHigh * kWildHigh == doctest::Approx(1.0));
  CHECK(p * std::pow(kWildLow, 3) + (1 - p) * std::pow(kWildHigh, 3) == doctest::Approx(1.0));

  RngStream a(9), b(9);
  CHECK(wild_weights(100, a) == wild_weights(100, b));
}
