#pragma once

// Monte Carlo settings: three curves on [0, 1] (means R1-R4, variances
// V1-V4), thirty curves in six blocks on [-2, 2] with shift a, and 120
// curves in five groups on [0, 1].

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curvegroups/core_types.hpp"
#include "curvegroups/hypothesis_test.hpp"
#include "curvegroups/rng.hpp"

namespace curvegroups {

enum class ScenarioFamily { ThreeCurve, ThirtyCurve, HundredTwentyCurve };
enum class MeanModel { R1, R2, R3, R4 };
enum class VarianceModel { V1, V2, V3, V4 };
enum class VarianceMode { Homoscedastic, Heteroscedastic };

struct ScenarioSpec {
  ScenarioFamily family = ScenarioFamily::ThreeCurve;
  MeanModel mean = MeanModel::R1;              // three-curve
  VarianceModel variance = VarianceModel::V1;  // three-curve
  double a = 0.0;                              // thirty-curve
  VarianceMode variance_mode = VarianceMode::Homoscedastic;  // thirty-curve
  /// Explicit per-curve sizes (one value is broadcast to every curve).
  std::vector<std::size_t> sample_sizes;
  /// Thirty-curve total n, split by a multinomial draw when sample_sizes is empty.
  std::size_t total_size = 0;
  /// 120-curve noise: N(0, 1.3) read as variance 1.3, or as sd 1.3.
  bool noise_as_sd = false;

  std::size_t curve_count() const noexcept;
  void validate() const;
  std::string label() const;

  static ScenarioSpec three_curve(MeanModel mean, VarianceModel variance,
                                  std::vector<std::size_t> sizes = {300, 400, 500});
  static ScenarioSpec thirty_curve(double a, VarianceMode mode, std::size_t total_size);
  static ScenarioSpec hundred_twenty_curve(std::size_t n_per_curve);
};

/// Parses "three:R1:V1", "thirty" and "onetwenty" (family and mean/variance ids).
ScenarioSpec parse_scenario(const std::string& text);

// Mean and variance functions, curve index j is 0-based.
double three_curve_mean(MeanModel model, std::size_t j, double x);
double three_curve_variance(VarianceModel model, std::size_t j, double x);
double thirty_curve_mean(std::size_t j, double x, double a);
double hundred_twenty_curve_mean(std::size_t j, double x);

/// Smallest heteroscedastic variance 0.5 + 0.05 m_j(x) over x in [-2, 2]
/// across all thirty curves, from a dense scan of the interval.
double thirty_curve_min_variance(double a);

CurveCollection generate_three_curve(MeanModel mean, VarianceModel variance,
                                     const std::vector<std::size_t>& sizes, RngStream& rng);
CurveCollection generate_thirty_curve(double a, VarianceMode mode,
                                      const std::vector<std::size_t>& sizes, RngStream& rng);
CurveCollection generate_hundred_twenty_curve(const std::vector<std::size_t>& sizes,
                                              RngStream& rng, bool noise_as_sd = false);

/// Multinomial(n; p) sizes with p_j proportional to p*_j drawn uniformly
/// from {1, 1.5, 2, 2.5, 3}.
std::vector<std::size_t> multinomial_sizes(std::size_t n, std::size_t curves, RngStream& rng);

/// True grouping of the scenario's curves.
Partition truth_partition(const ScenarioSpec& spec);

struct Scenario {
  CurveCollection collection;
  Partition truth;
  std::vector<std::size_t> sizes;
};

/// Generates one data set. Multinomial sizes draw from derive_seed(seed, {0})
/// and the observations from derive_seed(seed, {1}).
Scenario generate(const ScenarioSpec& spec, std::uint64_t seed);

/// Fewest curves whose labels disagree under the best matching of
/// estimated to true groups (Hungarian algorithm on the confusion matrix).
std::size_t misclassification_count(const Partition& estimated, const Partition& truth);

enum class MonteCarloMetric { Rejection, Selection };

struct MonteCarloConfig {
  MonteCarloMetric metric = MonteCarloMetric::Rejection;
  std::size_t runs = 200;
  std::size_t k = 1;      ///< tested K (Rejection)
  std::size_t k_max = 0;  ///< Selection; 0 means J
  std::size_t grid_size = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  ///< runs executed concurrently
  TestConfig test{};
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double statistic = 0.0;  ///< tested K, or the selected K's test
  double p_value = 1.0;
  bool reject = false;
  std::size_t selected_k = 0;
  std::size_t misclassified = 0;
};

struct MonteCarloReport {
  ScenarioSpec spec;
  MonteCarloConfig config;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;  ///< over successful runs
  std::vector<std::size_t> selected_k_histogram;        ///< index = K
  std::vector<std::size_t> misclassification_histogram;  ///< index = count
  std::vector<RunRecord> records;

  std::size_t successes() const noexcept { return runs - failures; }
  /// Fraction of successful runs that selected `k`.
  double selection_rate(std::size_t k) const;
  /// Fraction of successful runs with at most `count` misclassified curves.
  double misclassified_at_most(std::size_t count) const;
};

/// Run r uses seed derive_seed(cfg.seed, {r}); its data come from
/// generate(spec, derive_seed(run_seed, {0})) and the test from
/// derive_seed(run_seed, {1}). Runs that throw are recorded as failures.
MonteCarloReport run_monte_carlo(const ScenarioSpec& spec, const MonteCarloConfig& cfg);

void write_report_csv(const MonteCarloReport& report, std::ostream& out);

}  // namespace curvegroups
