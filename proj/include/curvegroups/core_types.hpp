#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace curvegroups {

/// L2 (Cramér–von Mises type) or L1 (Kolmogorov–Smirnov type) deviation.
enum class Norm { CM, KS };

std::string_view to_string(Norm norm) noexcept;
Norm parse_norm(std::string_view text);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Observations {(x_i, y_i)} of one regression curve.
struct CurveSample {
  std::string curve_id;
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const noexcept { return xs.size(); }
};

/// J validated curve samples. Only constructible through validation, so a
/// CurveCollection always satisfies its invariants.
class CurveCollection {
 public:
  CurveCollection() = default;

  const std::vector<CurveSample>& samples() const noexcept { return samples_; }
  const CurveSample& operator[](std::size_t j) const { return samples_[j]; }
  std::size_t curve_count() const noexcept { return samples_.size(); }
  std::size_t total_size() const noexcept { return total_; }

  /// Offset of curve j's first observation in the concatenated sample.
  std::size_t offset(std::size_t j) const { return offsets_[j]; }

  std::vector<std::string> curve_ids() const;

 private:
  friend CurveCollection validate_collection(std::vector<CurveSample> raw);

  std::vector<CurveSample> samples_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

/// Checks ids are unique, every curve is nonempty with matching x/y lengths,
/// and every value is finite. Throws curvegroups::Error naming the curve.
CurveCollection validate_collection(std::vector<CurveSample> raw);

/// Q equally spaced points on [lo, hi]. A single-point grid has lo == hi.
class EvaluationGrid {
 public:
  EvaluationGrid() = default;
  EvaluationGrid(double lo, double hi, std::size_t count);

  static EvaluationGrid single(double x);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t size() const noexcept { return points_.size(); }
  double step() const noexcept;
  const std::vector<double>& points() const noexcept { return points_; }
  double operator[](std::size_t q) const { return points_[q]; }

  /// Trapezoidal quadrature weights; they sum to hi - lo.
  std::vector<double> trapezoid_weights() const;

  bool operator==(const EvaluationGrid&) const = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> points_;
};

/// Grid over the intersection of the curves' covariate ranges, shrunk by
/// `trim_fraction` of its width at each end.
EvaluationGrid common_grid(const CurveCollection& collection, std::size_t count,
                           double trim_fraction = 0.025);

struct LocalLinearCoefficients {
  double alpha0 = 0.0;  ///< fitted value at x
  double alpha1 = 0.0;  ///< local slope
};

/// Row j holds curve j's estimate on the grid.
struct CurveEstimateMatrix {
  EvaluationGrid grid;
  std::vector<std::string> curve_ids;
  Matrix values;
  std::vector<double> bandwidths;
};

/// Assignment of curves {0..J-1} to K nonempty groups {0..K-1}. Labels are
/// canonical: groups are numbered by first appearance in the assignment, so
/// partitions equal up to relabelling compare equal.
class Partition {
 public:
  Partition() = default;

  /// Accepts arbitrary labels; empty label values are squeezed out.
  static Partition from_assignment(std::span<const std::size_t> labels);
  static Partition from_groups(const std::vector<std::vector<std::size_t>>& groups,
                               std::size_t curve_count);

  std::size_t group_count() const noexcept { return group_count_; }
  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t group_of(std::size_t j) const { return assignment_[j]; }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }

  /// Members of every group in increasing curve order.
  std::vector<std::vector<std::size_t>> groups() const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<std::size_t> assignment_;
  std::size_t group_count_ = 0;
};

/// Pooled fits f_k of each group on the common grid.
struct PooledEstimates {
  EvaluationGrid grid;
  Matrix group_values;
  std::vector<double> group_bandwidths;
};

struct TestResult {
  std::size_t k = 0;
  Norm norm = Norm::CM;
  double statistic = 0.0;
  std::vector<double> boot_stats;
  double p_value = 1.0;
  double alpha = 0.05;
  Partition partition;
  bool reject = false;

  // Detail kept for reporting; not part of the decision.
  std::optional<CurveEstimateMatrix> estimates;
  std::optional<PooledEstimates> pooled;
};

struct KSelectionTrace {
  std::vector<TestResult> tests;  ///< K = 1, 2, ... in order
  std::size_t selected_k = 0;
  bool saturated = false;  ///< every K up to k_max was rejected
  Partition final_partition;

  const TestResult& selected() const;
};

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7).
double empirical_quantile(std::span<const double> values, double probability);

/// Fraction of bootstrap statistics at least as large as `statistic`.
double bootstrap_p_value(double statistic, std::span<const double> boot_stats);

/// statistic > empirical (1 - alpha) quantile of boot_stats.
bool bootstrap_reject(double statistic, std::span<const double> boot_stats, double alpha);

}  // namespace curvegroups
