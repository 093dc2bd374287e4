#pragma once

// Precomputed local linear smoothing operators for a fixed covariate design.
//
// For fixed covariates the local linear estimate is linear in the responses,
// both at grid points and for leave-one-out predictions. The bootstrap keeps
// every X_ij and only redraws responses, so the kernel sums, normal-equation
// downdates and well-posedness checks are done once per design and each
// replicate reduces to sparse dot products.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "curvegroups/core_types.hpp"
#include "curvegroups/kernel.hpp"
#include "curvegroups/kernel_regression.hpp"

namespace curvegroups {

/// Response totals per design position.
struct ResponseSummary {
  std::vector<double> means;
  std::vector<double> within_ss;
  double total_ss = 0.0;  ///< centred sum of squares over all observations
};

/// Distinct covariate positions (exact values or bin centres) with
/// observation counts and the observation -> position map.
class Design {
 public:
  static Design exact(std::span<const double> xs);
  static Design binned(std::span<const double> xs, std::size_t bins);
  static Design for_observations(std::span<const double> xs, const BinningPolicy& policy);
  /// Positions with explicit counts and no observation map (e.g. a
  /// BinnedSample); summaries must then be built by the caller.
  static Design weighted(std::span<const double> positions, std::span<const double> counts);

  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const double> counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return positions_.size(); }
  std::size_t observation_count() const noexcept { return observations_; }
  std::size_t position_of(std::size_t i) const { return position_of_[i]; }
  bool binned() const noexcept { return binned_; }

  void summarize(std::span<const double> ys, ResponseSummary& out) const;
  ResponseSummary summarize(std::span<const double> ys) const;

  /// Direct local linear fit of the summarised responses at x. Returns
  /// nullopt when the fit is degenerate.
  std::optional<LocalLinearCoefficients> fit_at(const ResponseSummary& summary, double h,
                                                double x, const KernelFunction& kernel) const;

 private:
  std::vector<double> positions_;
  std::vector<double> counts_;
  std::vector<std::uint32_t> position_of_;
  std::size_t observations_ = 0;
  bool binned_ = false;
};

/// One-shot leave-one-out criterion for every candidate without storing
/// operators; same values as SmootherPlan::cv_score.
struct LooProfile {
  std::vector<double> scores;
  std::vector<std::size_t> excluded;
};
LooProfile loo_cv_profile(const Design& design, const ResponseSummary& summary,
                          std::span<const double> candidates, const KernelFunction& kernel);

/// Cross-validated choice: the smallest finite score, ties within
/// 1e-12 * total_ss going to the larger candidate. Returns scores.size()
/// when no score is finite.
std::size_t choose_bandwidth_index(std::span<const double> scores, double total_ss);

struct BandwidthChoice {
  std::size_t index = 0;
  double bandwidth = 0.0;
  double score = 0.0;
};

class SmootherPlan {
 public:
  /// `grid` may be empty, in which case only cross-validation is available
  /// and candidates need not be well-posed anywhere in particular.
  SmootherPlan(Design design, std::vector<double> candidates, const EvaluationGrid* grid,
               const KernelFunction& kernel);

  const Design& design() const noexcept { return design_; }
  std::span<const double> candidates() const noexcept { return candidates_; }
  const KernelFunction& kernel() const noexcept { return kernel_; }

  /// Covers kMinCvCoverage of observations and, with a grid, is well-posed
  /// at every grid point.
  bool eligible(std::size_t c) const { return ops_[c].eligible; }
  bool well_posed_on_grid(std::size_t c) const { return ops_[c].grid_ok; }
  std::size_t excluded(std::size_t c) const { return ops_[c].excluded; }

  /// Rescaled leave-one-out criterion, +inf if the candidate is not eligible.
  double cv_score(std::size_t c, const ResponseSummary& summary) const;

  /// Cross-validated choice among eligible candidates. Throws
  /// Error(AllCandidatesDegenerate) when none is eligible.
  BandwidthChoice select(const ResponseSummary& summary) const;

  /// Fitted values on the grid; requires well_posed_on_grid(c).
  void grid_values(std::size_t c, const ResponseSummary& summary, std::span<double> out) const;
  std::vector<double> grid_values(std::size_t c, const ResponseSummary& summary) const;

  std::size_t index_of(double h) const;

 private:
  struct SparseRows {
    std::vector<std::uint32_t> begin;   // first design position of each row
    std::vector<std::uint32_t> offset;  // rows.size() + 1 offsets into coef
    std::vector<double> coef;

    double dot(std::size_t row, std::span<const double> values) const;
  };

  struct CandidateOperator {
    SparseRows loo;
    std::vector<double> self_weight;  // downdate factor B_l per position
    std::vector<std::uint8_t> loo_valid;
    std::size_t excluded = 0;
    SparseRows grid;
    bool grid_ok = false;
    bool eligible = false;
  };

  void build(std::size_t c, const EvaluationGrid* grid);

  Design design_;
  std::vector<double> candidates_;
  KernelFunction kernel_;
  std::vector<CandidateOperator> ops_;
};

}  // namespace curvegroups
