#include "curvegroups/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "curvegroups/errors.hpp"

namespace curvegroups {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateCurveId: return "DuplicateCurveId";
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::AllCandidatesDegenerate: return "AllCandidatesDegenerate";
    case ErrorCode::EmptyClusterUnrecoverable: return "EmptyClusterUnrecoverable";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NegativeVariance: return "NegativeVariance";
    case ErrorCode::OriginPoint: return "OriginPoint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Norm norm) noexcept {
  return norm == Norm::CM ? "cm" : "ks";
}

Norm parse_norm(std::string_view text) {
  if (text == "cm" || text == "CM") return Norm::CM;
  if (text == "ks" || text == "KS") return Norm::KS;
  throw Error(ErrorCode::InvalidArgument, "unknown norm '" + std::string(text) + "'");
}

std::vector<std::string> CurveCollection::curve_ids() const {
  std::vector<std::string> ids;
  ids.reserve(samples_.size());
  for (const auto& s : samples_) ids.push_back(s.curve_id);
  return ids;
}

CurveCollection validate_collection(std::vector<CurveSample> raw) {
  std::unordered_set<std::string> seen;
  for (const auto& s : raw) {
    if (!seen.insert(s.curve_id).second) {
      throw Error(ErrorCode::DuplicateCurveId, "duplicate curve id '" + s.curve_id + "'");
    }
    if (s.xs.empty() || s.xs.size() != s.ys.size()) {
      throw Error(ErrorCode::EmptyCurve,
                  "curve '" + s.curve_id + "' is empty or has mismatched x/y lengths");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(s.xs.begin(), s.xs.end(), finite) ||
        !std::all_of(s.ys.begin(), s.ys.end(), finite)) {
      throw Error(ErrorCode::NonFiniteValue,
                  "curve '" + s.curve_id + "' contains a non-finite value");
    }
  }
  CurveCollection out;
  out.samples_ = std::move(raw);
  out.offsets_.reserve(out.samples_.size());
  for (const auto& s : out.samples_) {
    out.offsets_.push_back(out.total_);
    out.total_ += s.size();
  }
  return out;
}

EvaluationGrid::EvaluationGrid(double lo, double hi, std::size_t count) : lo_(lo), hi_(hi) {
  if (count == 0 || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs a positive size and finite bounds");
  }
  if (count == 1) {
    if (lo != hi) {
      throw Error(ErrorCode::InvalidArgument, "a single-point grid needs lo == hi");
    }
    points_.assign(1, lo);
    return;
  }
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "grid needs lo < hi");
  points_.resize(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t q = 0; q < count; ++q) points_[q] = lo + step * static_cast<double>(q);
  points_.back() = hi;
}

EvaluationGrid EvaluationGrid::single(double x) { return EvaluationGrid(x, x, 1); }

double EvaluationGrid::step() const noexcept {
  return points_.size() < 2 ? 0.0 : (hi_ - lo_) / static_cast<double>(points_.size() - 1);
}

std::vector<double> EvaluationGrid::trapezoid_weights() const {
  std::vector<double> w(points_.size(), step());
  if (w.size() >= 2) {
    w.front() *= 0.5;
    w.back() *= 0.5;
  } else if (!w.empty()) {
    w[0] = 0.0;
  }
  return w;
}

EvaluationGrid common_grid(const CurveCollection& collection, std::size_t count,
                           double trim_fraction) {
  if (collection.curve_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "cannot build a grid for an empty collection");
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& s : collection.samples()) {
    auto [mn, mx] = std::minmax_element(s.xs.begin(), s.xs.end());
    lo = std::max(lo, *mn);
    hi = std::min(hi, *mx);
  }
  if (!(lo < hi)) {
    throw Error(ErrorCode::InvalidArgument, "curve covariate ranges do not overlap");
  }
  const double trim = trim_fraction * (hi - lo);
  return EvaluationGrid(lo + trim, hi - trim, count);
}

Partition Partition::from_assignment(std::span<const std::size_t> labels) {
  Partition p;
  p.assignment_.resize(labels.size());
  std::vector<std::pair<std::size_t, std::size_t>> relabel;  // (old, new)
  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto it = std::find_if(relabel.begin(), relabel.end(),
                           [&](const auto& e) { return e.first == labels[j]; });
    if (it == relabel.end()) {
      relabel.emplace_back(labels[j], relabel.size());
      p.assignment_[j] = relabel.back().second;
    } else {
      p.assignment_[j] = it->second;
    }
  }
  p.group_count_ = relabel.size();
  return p;
}

Partition Partition::from_groups(const std::vector<std::vector<std::size_t>>& groups,
                                 std::size_t curve_count) {
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> labels(curve_count, unset);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) throw Error(ErrorCode::InvalidArgument, "empty group");
    for (std::size_t j : groups[k]) {
      if (j >= curve_count || labels[j] != unset) {
        throw Error(ErrorCode::InvalidArgument, "groups are not a partition");
      }
      labels[j] = k;
    }
  }
  if (std::find(labels.begin(), labels.end(), unset) != labels.end()) {
    throw Error(ErrorCode::InvalidArgument, "groups do not cover every curve");
  }
  return from_assignment(labels);
}

std::vector<std::vector<std::size_t>> Partition::groups() const {
  std::vector<std::vector<std::size_t>> out(group_count_);
  for (std::size_t j = 0; j < assignment_.size(); ++j) out[assignment_[j]].push_back(j);
  return out;
}

const TestResult& KSelectionTrace::selected() const {
  for (const auto& t : tests) {
    if (t.k == selected_k) return t;
  }
  throw Error(ErrorCode::InvalidArgument, "trace has no test for the selected K");
}

double empirical_quantile(std::span<const double> values, double probability) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * probability;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double bootstrap_p_value(double statistic, std::span<const double> boot_stats) {
  if (boot_stats.empty()) throw Error(ErrorCode::InvalidArgument, "no bootstrap statistics");
  const auto exceed = std::count_if(boot_stats.begin(), boot_stats.end(),
                                    [&](double d) { return d >= statistic; });
  return static_cast<double>(exceed) / static_cast<double>(boot_stats.size());
}

bool bootstrap_reject(double statistic, std::span<const double> boot_stats, double alpha) {
  return statistic > empirical_quantile(boot_stats, 1.0 - alpha);
}

}  // namespace curvegroups
