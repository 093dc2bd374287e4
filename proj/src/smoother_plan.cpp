#include "curvegroups/smoother_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "curvegroups/errors.hpp"

namespace curvegroups {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Row {
  std::size_t begin = 0;
  bool valid = false;
  double self_weight = 0.0;
};

// Local linear smoothing weights at x over design positions. With `self`,
// one observation at that position is left out (normal-equation downdate):
// the returned coefficients then apply to position means and the prediction
// for a left-out response y is dot(coef, means) - self_weight * y.
Row local_weights(std::span<const double> p, std::span<const double> counts, double x, double h,
                  const KernelFunction& kernel, std::size_t self, std::vector<double>& coef) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  const double radius = kernel.support_radius() * h;
  const double floor = kernel.weight_floor();
  const auto b = static_cast<std::size_t>(
      std::lower_bound(p.begin(), p.end(), x - radius) - p.begin());
  const auto e = static_cast<std::size_t>(
      std::upper_bound(p.begin(), p.end(), x + radius) - p.begin());

  Row row;
  row.begin = b;
  coef.assign(e - b, 0.0);
  double s0 = 0, s1 = 0, s2 = 0;
  std::size_t occupied = 0;
  for (std::size_t t = b; t < e; ++t) {
    if (t == self) continue;
    const double d = p[t] - x;
    const double k = kernel(d / h);
    if (k <= floor) continue;
    ++occupied;
    const double w = counts[t] * k;
    coef[t - b] = w;
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
  }
  const double k0 = kernel.peak();
  if (self != none) {
    // Remaining copies of the left-out position sit at offset 0.
    const double rest = counts[self] - 1.0;
    if (rest > 0.0) {
      ++occupied;
      s0 += rest * k0;
    }
  }
  const double det = s0 * s2 - s1 * s1;
  row.valid = occupied >= 2 && det > 0.0;
  if (!row.valid) {
    coef.clear();
    return row;
  }
  for (std::size_t t = b; t < e; ++t) {
    if (t == self) continue;
    coef[t - b] *= (s2 - s1 * (p[t] - x)) / det;
  }
  if (self != none) {
    coef[self - b] = counts[self] * k0 * s2 / det;
    row.self_weight = k0 * s2 / det;
  }
  return row;
}

double loo_contribution(double count, double mean, double within_ss, double fitted_mean,
                        double self_weight) {
  const double g = 1.0 + self_weight;
  const double r = g * mean - fitted_mean;
  return g * g * within_ss + count * r * r;
}

}  // namespace

// ---------------------------------------------------------------- Design

Design Design::exact(std::span<const double> xs) {
  Design d;
  const std::size_t n = xs.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  d.position_of_.resize(n);
  for (std::uint32_t i : order) {
    if (d.positions_.empty() || xs[i] != d.positions_.back()) {
      d.positions_.push_back(xs[i]);
      d.counts_.push_back(0.0);
    }
    d.counts_.back() += 1.0;
    d.position_of_[i] = static_cast<std::uint32_t>(d.positions_.size() - 1);
  }
  d.observations_ = n;
  return d;
}

Design Design::binned(std::span<const double> xs, std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "binning needs at least 2 bins");
  if (xs.empty()) throw Error(ErrorCode::EmptyCurve, "cannot bin an empty sample");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *mn;
  const double hi = *mx;
  const double step = (hi - lo) / static_cast<double>(bins - 1);
  std::vector<std::size_t> bin_of(xs.size());
  std::vector<double> full_counts(bins, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t g = 0;
    if (step > 0.0) {
      const double pos = std::round((xs[i] - lo) / step);
      g = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), bins - 1);
    }
    bin_of[i] = g;
    full_counts[g] += 1.0;
  }
  Design d;
  d.binned_ = true;
  std::vector<std::uint32_t> compressed(bins, 0);
  for (std::size_t g = 0; g < bins; ++g) {
    if (full_counts[g] == 0.0) continue;
    compressed[g] = static_cast<std::uint32_t>(d.positions_.size());
    d.positions_.push_back(g + 1 == bins ? hi : lo + step * static_cast<double>(g));
    d.counts_.push_back(full_counts[g]);
  }
  d.position_of_.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d.position_of_[i] = compressed[bin_of[i]];
  d.observations_ = xs.size();
  return d;
}

Design Design::for_observations(std::span<const double> xs, const BinningPolicy& policy) {
  if (policy.applies(xs.size())) return binned(xs, policy.bins_for(xs.size()));
  return exact(xs);
}

Design Design::weighted(std::span<const double> positions, std::span<const double> counts) {
  if (positions.size() != counts.size() ||
      !std::is_sorted(positions.begin(), positions.end()) ||
      std::adjacent_find(positions.begin(), positions.end()) != positions.end()) {
    throw Error(ErrorCode::InvalidArgument, "weighted design needs strictly increasing positions");
  }
  Design d;
  d.positions_.assign(positions.begin(), positions.end());
  d.counts_.assign(counts.begin(), counts.end());
  d.binned_ = true;
  d.observations_ = static_cast<std::size_t>(
      std::llround(std::accumulate(counts.begin(), counts.end(), 0.0)));
  return d;
}

void Design::summarize(std::span<const double> ys, ResponseSummary& out) const {
  if (ys.size() != position_of_.size()) {
    throw Error(ErrorCode::InvalidArgument, "response count does not match the design");
  }
  const std::size_t m = positions_.size();
  out.means.assign(m, 0.0);
  out.within_ss.assign(m, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out.means[position_of_[i]] += ys[i];
    grand += ys[i];
  }
  grand /= static_cast<double>(ys.size());
  for (std::size_t t = 0; t < m; ++t) out.means[t] /= counts_[t];
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double r = ys[i] - out.means[position_of_[i]];
    out.within_ss[position_of_[i]] += r * r;
  }
  out.total_ss = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const double dev = out.means[t] - grand;
    out.total_ss += out.within_ss[t] + counts_[t] * dev * dev;
  }
}

ResponseSummary Design::summarize(std::span<const double> ys) const {
  ResponseSummary s;
  summarize(ys, s);
  return s;
}

std::optional<LocalLinearCoefficients> Design::fit_at(const ResponseSummary& summary, double h,
                                                      double x,
                                                      const KernelFunction& kernel) const {
  const double radius = kernel.support_radius() * h;
  const double floor = kernel.weight_floor();
  const auto b = std::lower_bound(positions_.begin(), positions_.end(), x - radius);
  const auto e = std::upper_bound(positions_.begin(), positions_.end(), x + radius);
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  std::size_t occupied = 0;
  for (auto it = b; it != e; ++it) {
    const auto t = static_cast<std::size_t>(it - positions_.begin());
    const double d = *it - x;
    const double k = kernel(d / h);
    if (k <= floor) continue;
    ++occupied;
    const double w = counts_[t] * k;
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
    t0 += w * summary.means[t];
    t1 += w * d * summary.means[t];
  }
  const double det = s0 * s2 - s1 * s1;
  if (occupied < 2 || !(det > 0.0)) return std::nullopt;
  return LocalLinearCoefficients{(s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det};
}

// ---------------------------------------------------------- SmootherPlan

double SmootherPlan::SparseRows::dot(std::size_t row, std::span<const double> values) const {
  const double* c = coef.data() + offset[row];
  const double* v = values.data() + begin[row];
  const std::size_t len = offset[row + 1] - offset[row];
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += c[k] * v[k];
  return acc;
}

SmootherPlan::SmootherPlan(Design design, std::vector<double> candidates,
                           const EvaluationGrid* grid, const KernelFunction& kernel)
    : design_(std::move(design)), candidates_(std::move(candidates)), kernel_(kernel) {
  if (candidates_.empty()) throw Error(ErrorCode::InvalidArgument, "no bandwidth candidates");
  if (!std::is_sorted(candidates_.begin(), candidates_.end())) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth candidates must be sorted");
  }
  for (double h : candidates_) Bandwidth{h};
  ops_.resize(candidates_.size());
  for (std::size_t c = 0; c < candidates_.size(); ++c) build(c, grid);
}

void SmootherPlan::build(std::size_t c, const EvaluationGrid* grid) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  const double h = candidates_[c];
  const auto p = design_.positions();
  const auto counts = design_.counts();
  const std::size_t m = design_.size();
  auto& op = ops_[c];
  std::vector<double> scratch;

  auto append = [](SparseRows& rows, const Row& r, const std::vector<double>& coef) {
    rows.begin.push_back(static_cast<std::uint32_t>(r.begin));
    rows.coef.insert(rows.coef.end(), coef.begin(), coef.end());
    if (rows.coef.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::TooLarge, "smoothing operator exceeds the supported size");
    }
    rows.offset.push_back(static_cast<std::uint32_t>(rows.coef.size()));
  };

  if (grid != nullptr) {
    op.grid.offset.push_back(0);
    op.grid_ok = true;
    for (double z : grid->points()) {
      const Row r = local_weights(p, counts, z, h, kernel_, none, scratch);
      op.grid_ok = op.grid_ok && r.valid;
      append(op.grid, r, scratch);
    }
    if (!op.grid_ok) {
      op.eligible = false;
      op.excluded = design_.observation_count();
      op.grid = {};
      return;
    }
  }

  op.loo.offset.push_back(0);
  op.self_weight.assign(m, 0.0);
  op.loo_valid.assign(m, 0);
  double excluded = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    const Row r = local_weights(p, counts, p[l], h, kernel_, l, scratch);
    op.loo_valid[l] = r.valid ? 1 : 0;
    op.self_weight[l] = r.self_weight;
    if (!r.valid) excluded += counts[l];
    append(op.loo, r, scratch);
  }
  op.excluded = static_cast<std::size_t>(std::llround(excluded));
  const auto n = static_cast<double>(design_.observation_count());
  op.eligible = n - excluded >= kMinCvCoverage * n;
}

double SmootherPlan::cv_score(std::size_t c, const ResponseSummary& summary) const {
  const auto& op = ops_[c];
  if (!op.eligible) return kInf;
  const auto counts = design_.counts();
  double total = 0.0, used = 0.0;
  for (std::size_t l = 0; l < design_.size(); ++l) {
    if (!op.loo_valid[l]) continue;
    const double fitted = op.loo.dot(l, summary.means);
    total += loo_contribution(counts[l], summary.means[l], summary.within_ss[l], fitted,
                              op.self_weight[l]);
    used += counts[l];
  }
  return total * static_cast<double>(design_.observation_count()) / used;
}

std::size_t choose_bandwidth_index(std::span<const double> scores, double total_ss) {
  if (total_ss > 0.0) return argmin_prefer_larger(scores, 1e-12 * total_ss);
  // Constant responses: every fit is the same constant.
  for (std::size_t c = scores.size(); c-- > 0;) {
    if (std::isfinite(scores[c])) return c;
  }
  return scores.size();
}

LooProfile loo_cv_profile(const Design& design, const ResponseSummary& summary,
                          std::span<const double> candidates, const KernelFunction& kernel) {
  const auto p = design.positions();
  const auto counts = design.counts();
  const auto n = static_cast<double>(design.observation_count());
  LooProfile out;
  std::vector<double> coef;
  for (double h : candidates) {
    double total = 0.0, used = 0.0;
    for (std::size_t l = 0; l < design.size(); ++l) {
      const Row r = local_weights(p, counts, p[l], h, kernel, l, coef);
      if (!r.valid) continue;
      double fitted = 0.0;
      for (std::size_t k = 0; k < coef.size(); ++k) fitted += coef[k] * summary.means[r.begin + k];
      total += loo_contribution(counts[l], summary.means[l], summary.within_ss[l], fitted,
                                r.self_weight);
      used += counts[l];
    }
    out.excluded.push_back(static_cast<std::size_t>(std::llround(n - used)));
    out.scores.push_back(used >= kMinCvCoverage * n ? total * n / used : kInf);
  }
  return out;
}

BandwidthChoice SmootherPlan::select(const ResponseSummary& summary) const {
  std::vector<double> scores(candidates_.size(), kInf);
  for (std::size_t c = 0; c < candidates_.size(); ++c) {
    if (ops_[c].eligible) scores[c] = cv_score(c, summary);
  }
  const std::size_t best = choose_bandwidth_index(scores, summary.total_ss);
  if (best == scores.size()) {
    throw Error(ErrorCode::AllCandidatesDegenerate,
                "no bandwidth candidate gives enough well-posed fits");
  }
  return {best, candidates_[best], scores[best]};
}

void SmootherPlan::grid_values(std::size_t c, const ResponseSummary& summary,
                               std::span<double> out) const {
  const auto& op = ops_[c];
  if (!op.grid_ok) {
    throw DegenerateFitError(0.0, "bandwidth candidate is not well-posed on the grid");
  }
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = op.grid.dot(q, summary.means);
}

std::vector<double> SmootherPlan::grid_values(std::size_t c, const ResponseSummary& summary) const {
  std::vector<double> out(ops_[c].grid.begin.size());
  grid_values(c, summary, out);
  return out;
}

std::size_t SmootherPlan::index_of(double h) const {
  const auto it = std::find(candidates_.begin(), candidates_.end(), h);
  if (it == candidates_.end()) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth is not one of the plan's candidates");
  }
  return static_cast<std::size_t>(it - candidates_.begin());
}

}  // namespace curvegroups
