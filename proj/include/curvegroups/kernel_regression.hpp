#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curvegroups/core_types.hpp"
#include "curvegroups/kernel.hpp"

namespace curvegroups {

/// Positive, finite smoothing parameter in covariate units.
class Bandwidth {
 public:
  explicit Bandwidth(double h);
  double value() const noexcept { return h_; }
  bool operator==(const Bandwidth&) const = default;

 private:
  double h_;
};

/// A sample compressed onto G equally spaced bin centres spanning
/// [min x, max x]. Empty bins carry zero weight and a zero mean.
struct BinnedSample {
  std::vector<double> centers;
  std::vector<double> weights;    ///< observation counts
  std::vector<double> means;      ///< mean response per bin
  std::vector<double> within_ss;  ///< sum of squared deviations from the bin mean

  std::size_t bin_count() const noexcept { return centers.size(); }
};

/// Simple (nearest-centre) binning onto `bins` >= 2 centres.
BinnedSample bin_sample(const CurveSample& sample, std::size_t bins);

/// When to swap an exact sample for its binned form.
struct BinningPolicy {
  bool enabled = true;
  std::size_t threshold = 500;  ///< bin only when n > threshold
  std::size_t max_bins = 400;   ///< G = min(max_bins, n)

  bool applies(std::size_t n) const noexcept { return enabled && n > threshold; }
  std::size_t bins_for(std::size_t n) const noexcept { return n < max_bins ? n : max_bins; }
};

/// Weighted least-squares line fitted around x with kernel weights
/// kappa((X_i - x) / h). Throws DegenerateFitError unless at least two
/// distinct covariate values carry weight above the kernel's floor.
LocalLinearCoefficients local_linear_fit(const CurveSample& sample, Bandwidth h, double x,
                                         const KernelFunction& kernel = {});

/// Binned variant: weights are kernel weight times bin count, responses are
/// bin means.
LocalLinearCoefficients local_linear_fit(const BinnedSample& sample, Bandwidth h, double x,
                                         const KernelFunction& kernel = {});

std::vector<double> fit_on_grid(const CurveSample& sample, Bandwidth h, const EvaluationGrid& grid,
                                const KernelFunction& kernel = {});
std::vector<double> fit_on_grid(const BinnedSample& sample, Bandwidth h,
                                const EvaluationGrid& grid, const KernelFunction& kernel = {});

/// Per-candidate leave-one-out cross-validation profile.
struct CvReport {
  std::vector<double> candidates;
  /// Sum of squared leave-one-out errors, rescaled by n / n_used when some
  /// points had a degenerate leave-one-out fit. +inf for ineligible candidates.
  std::vector<double> scores;
  std::vector<std::size_t> excluded;  ///< observations skipped per candidate
  std::size_t selected_index = 0;

  Bandwidth selected() const { return Bandwidth(candidates[selected_index]); }
};

/// Minimum fraction of observations whose leave-one-out fit must be
/// well-posed for a candidate to compete.
inline constexpr double kMinCvCoverage = 0.9;

/// Leave-one-out cross-validation over `candidates`. Ties (within 1e-12 of
/// the centred total sum of squares) go to the larger bandwidth. Throws
/// Error(AllCandidatesDegenerate) when no candidate is eligible.
CvReport cv_bandwidth(const CurveSample& sample, std::span<const double> candidates,
                      const KernelFunction& kernel = {});

/// Same criterion on binned data; each observation is removed from its bin.
CvReport cv_bandwidth(const BinnedSample& sample, std::span<const double> candidates,
                      const KernelFunction& kernel = {});

/// `count` log-spaced bandwidths from 1.5x the median positive gap of the
/// sorted covariates up to their range.
std::vector<double> default_bandwidth_candidates(std::span<const double> xs,
                                                 std::size_t count = 30);

/// Index of the smallest score, preferring larger candidates on ties.
/// Candidates must be sorted ascending. Returns scores.size() if none is finite.
std::size_t argmin_prefer_larger(std::span<const double> scores, double tolerance);

}  // namespace curvegroups
