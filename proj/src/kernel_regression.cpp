#include "curvegroups/kernel_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "curvegroups/errors.hpp"
#include "curvegroups/smoother_plan.hpp"

namespace curvegroups {

namespace {

// Weighted normal equations of the local line around x, accumulated over
// unsorted points. `counts` may be empty (unit weights).
LocalLinearCoefficients solve_local_line(std::span<const double> xs, std::span<const double> counts,
                                         std::span<const double> ys, double h, double x,
                                         const KernelFunction& kernel) {
  const double floor = kernel.weight_floor();
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  double first = std::numeric_limits<double>::quiet_NaN();
  bool distinct = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = counts.empty() ? 1.0 : counts[i];
    if (c <= 0.0) continue;
    const double d = xs[i] - x;
    const double k = kernel(d / h);
    if (k <= floor) continue;
    if (std::isnan(first)) {
      first = xs[i];
    } else if (xs[i] != first) {
      distinct = true;
    }
    const double w = c * k;
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
    t0 += w * ys[i];
    t1 += w * d * ys[i];
  }
  const double det = s0 * s2 - s1 * s1;
  if (!distinct || !(det > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate local linear fit at x = " << x << " with h = " << h;
    throw DegenerateFitError(x, msg.str());
  }
  return {(s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det};
}

std::vector<double> sorted_candidates(std::span<const double> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no bandwidth candidates");
  }
  std::vector<double> c(candidates.begin(), candidates.end());
  for (double h : c) Bandwidth{h};
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

CvReport run_cv(const Design& design, const ResponseSummary& summary,
               std::vector<double> candidates, const KernelFunction& kernel) {
  CvReport report;
  auto profile = loo_cv_profile(design, summary, candidates, kernel);
  report.candidates = std::move(candidates);
  report.scores = std::move(profile.scores);
  report.excluded = std::move(profile.excluded);
  report.selected_index = choose_bandwidth_index(report.scores, summary.total_ss);
  if (report.selected_index == report.scores.size()) {
    throw Error(ErrorCode::AllCandidatesDegenerate,
                "no bandwidth candidate gives enough well-posed leave-one-out fits");
  }
  return report;
}

}  // namespace

Bandwidth::Bandwidth(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive and finite");
  }
}

BinnedSample bin_sample(const CurveSample& sample, std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "binning needs at least 2 bins");
  if (sample.size() == 0) throw Error(ErrorCode::EmptyCurve, "cannot bin an empty sample");
  const auto [mn, mx] = std::minmax_element(sample.xs.begin(), sample.xs.end());
  const double lo = *mn;
  const double hi = *mx;
  BinnedSample out;
  out.centers.resize(bins);
  out.weights.assign(bins, 0.0);
  out.means.assign(bins, 0.0);
  out.within_ss.assign(bins, 0.0);
  const double step = (hi - lo) / static_cast<double>(bins - 1);
  for (std::size_t g = 0; g < bins; ++g) out.centers[g] = lo + step * static_cast<double>(g);
  out.centers.back() = hi;

  std::vector<std::size_t> bin_of(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::size_t g = 0;
    if (step > 0.0) {
      const double pos = std::round((sample.xs[i] - lo) / step);
      g = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), bins - 1);
    }
    bin_of[i] = g;
    out.weights[g] += 1.0;
    out.means[g] += sample.ys[i];
  }
  for (std::size_t g = 0; g < bins; ++g) {
    if (out.weights[g] > 0.0) out.means[g] /= out.weights[g];
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double r = sample.ys[i] - out.means[bin_of[i]];
    out.within_ss[bin_of[i]] += r * r;
  }
  return out;
}

LocalLinearCoefficients local_linear_fit(const CurveSample& sample, Bandwidth h, double x,
                                         const KernelFunction& kernel) {
  return solve_local_line(sample.xs, {}, sample.ys, h.value(), x, kernel);
}

LocalLinearCoefficients local_linear_fit(const BinnedSample& sample, Bandwidth h, double x,
                                         const KernelFunction& kernel) {
  return solve_local_line(sample.centers, sample.weights, sample.means, h.value(), x, kernel);
}

std::vector<double> fit_on_grid(const CurveSample& sample, Bandwidth h, const EvaluationGrid& grid,
                                const KernelFunction& kernel) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double z : grid.points()) out.push_back(local_linear_fit(sample, h, z, kernel).alpha0);
  return out;
}

std::vector<double> fit_on_grid(const BinnedSample& sample, Bandwidth h,
                                const EvaluationGrid& grid, const KernelFunction& kernel) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double z : grid.points()) out.push_back(local_linear_fit(sample, h, z, kernel).alpha0);
  return out;
}

CvReport cv_bandwidth(const CurveSample& sample, std::span<const double> candidates,
                      const KernelFunction& kernel) {
  const auto design = Design::exact(sample.xs);
  return run_cv(design, design.summarize(sample.ys), sorted_candidates(candidates), kernel);
}

CvReport cv_bandwidth(const BinnedSample& sample, std::span<const double> candidates,
                      const KernelFunction& kernel) {
  // Only occupied bins enter the design.
  std::vector<double> centers, counts;
  ResponseSummary summary;
  double total = 0.0, sum = 0.0;
  for (std::size_t g = 0; g < sample.bin_count(); ++g) {
    if (sample.weights[g] <= 0.0) continue;
    centers.push_back(sample.centers[g]);
    counts.push_back(sample.weights[g]);
    summary.means.push_back(sample.means[g]);
    summary.within_ss.push_back(sample.within_ss[g]);
    total += sample.weights[g];
    sum += sample.weights[g] * sample.means[g];
  }
  if (total <= 0.0) throw Error(ErrorCode::EmptyCurve, "binned sample has no observations");
  const double grand = sum / total;
  for (std::size_t t = 0; t < centers.size(); ++t) {
    const double dev = summary.means[t] - grand;
    summary.total_ss += summary.within_ss[t] + counts[t] * dev * dev;
  }
  return run_cv(Design::weighted(centers, counts), summary, sorted_candidates(candidates), kernel);
}

std::vector<double> default_bandwidth_candidates(std::span<const double> xs, std::size_t count) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "need at least one candidate");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double g = sorted[i] - sorted[i - 1];
    if (g > 0.0) gaps.push_back(g);
  }
  if (gaps.empty()) {
    throw Error(ErrorCode::AllCandidatesDegenerate,
                "bandwidth candidates need at least two distinct covariate values");
  }
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  double median = *mid;
  if (gaps.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(gaps.begin(), mid));
  }
  const double lo = 1.5 * median;
  const double hi = sorted.back() - sorted.front();
  if (count == 1 || !(lo < hi)) return {hi};
  std::vector<double> out(count);
  const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t c = 0; c < count; ++c) out[c] = lo * std::exp(ratio * static_cast<double>(c));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::size_t argmin_prefer_larger(std::span<const double> scores, double tolerance) {
  std::size_t best = scores.size();
  for (std::size_t c = scores.size(); c-- > 0;) {
    if (!std::isfinite(scores[c])) continue;
    if (best == scores.size() || scores[c] < scores[best] - tolerance) best = c;
  }
  return best;
}

}  // namespace curvegroups
