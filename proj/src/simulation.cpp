#include "curvegroups/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "curvegroups/errors.hpp"
#include "curvegroups/k_selection.hpp"
#include "parallel.hpp"

namespace curvegroups {

namespace {

constexpr std::size_t kThirtyCurves = 30;
constexpr std::size_t kHundredTwentyCurves = 120;

std::string curve_name(std::size_t j) { return "curve_" + std::to_string(j + 1); }

std::vector<std::size_t> resolve_sizes(const std::vector<std::size_t>& sizes, std::size_t curves) {
  if (sizes.size() == 1) return std::vector<std::size_t>(curves, sizes.front());
  if (sizes.size() != curves) {
    throw Error(ErrorCode::InvalidArgument,
                "need " + std::to_string(curves) + " sample sizes or a single one");
  }
  return sizes;
}

template <class Mean, class Sd>
CurveCollection draw(const std::vector<std::size_t>& sizes, double lo, double hi, RngStream& rng,
                     Mean mean, Sd sd) {
  std::vector<CurveSample> raw(sizes.size());
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    auto& s = raw[j];
    s.curve_id = curve_name(j);
    s.xs.resize(sizes[j]);
    s.ys.resize(sizes[j]);
    for (std::size_t i = 0; i < sizes[j]; ++i) {
      const double x = rng.uniform(lo, hi);
      s.xs[i] = x;
      s.ys[i] = mean(j, x) + sd(j, x) * rng.normal();
    }
  }
  return validate_collection(std::move(raw));
}

char mean_digit(MeanModel m) { return static_cast<char>('1' + static_cast<int>(m)); }
char variance_digit(VarianceModel v) { return static_cast<char>('1' + static_cast<int>(v)); }

}  // namespace

std::size_t ScenarioSpec::curve_count() const noexcept {
  switch (family) {
    case ScenarioFamily::ThreeCurve: return 3;
    case ScenarioFamily::ThirtyCurve: return kThirtyCurves;
    case ScenarioFamily::HundredTwentyCurve: return kHundredTwentyCurves;
  }
  return 0;
}

void ScenarioSpec::validate() const {
  const std::size_t J = curve_count();
  if (sample_sizes.empty()) {
    if (family != ScenarioFamily::ThirtyCurve || total_size == 0) {
      throw Error(ErrorCode::InvalidArgument, "scenario needs sample sizes");
    }
  } else {
    resolve_sizes(sample_sizes, J);
    for (std::size_t n : sample_sizes) {
      if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample sizes must be positive");
    }
  }
  if (family == ScenarioFamily::ThirtyCurve) {
    if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be finite");
    if (variance_mode == VarianceMode::Heteroscedastic) {
      const double v = thirty_curve_min_variance(a);
      if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << "heteroscedastic variance reaches " << v << " for a = " << a;
        throw Error(ErrorCode::NegativeVariance, msg.str());
      }
    }
  }
}

std::string ScenarioSpec::label() const {
  std::ostringstream out;
  switch (family) {
    case ScenarioFamily::ThreeCurve:
      out << "three:R" << mean_digit(mean) << ":V" << variance_digit(variance);
      break;
    case ScenarioFamily::ThirtyCurve:
      out << "thirty:a=" << a << ':'
          << (variance_mode == VarianceMode::Homoscedastic ? "homoscedastic" : "heteroscedastic");
      break;
    case ScenarioFamily::HundredTwentyCurve:
      out << "onetwenty";
      break;
  }
  return out.str();
}

ScenarioSpec ScenarioSpec::three_curve(MeanModel mean, VarianceModel variance,
                                       std::vector<std::size_t> sizes) {
  ScenarioSpec s;
  s.family = ScenarioFamily::ThreeCurve;
  s.mean = mean;
  s.variance = variance;
  s.sample_sizes = std::move(sizes);
  return s;
}

ScenarioSpec ScenarioSpec::thirty_curve(double a, VarianceMode mode, std::size_t total_size) {
  ScenarioSpec s;
  s.family = ScenarioFamily::ThirtyCurve;
  s.a = a;
  s.variance_mode = mode;
  s.total_size = total_size;
  return s;
}

ScenarioSpec ScenarioSpec::hundred_twenty_curve(std::size_t n_per_curve) {
  ScenarioSpec s;
  s.family = ScenarioFamily::HundredTwentyCurve;
  s.sample_sizes = {n_per_curve};
  return s;
}

ScenarioSpec parse_scenario(const std::string& text) {
  if (text == "thirty") return ScenarioSpec::thirty_curve(0.0, VarianceMode::Homoscedastic, 1000);
  if (text == "onetwenty") return ScenarioSpec::hundred_twenty_curve(100);
  // three:R#:V#
  if (text.size() == 11 && text.compare(0, 7, "three:R") == 0 && text[8] == ':' &&
      text[9] == 'V' && text[7] >= '1' && text[7] <= '4' && text[10] >= '1' && text[10] <= '4') {
    return ScenarioSpec::three_curve(static_cast<MeanModel>(text[7] - '1'),
                                     static_cast<VarianceModel>(text[10] - '1'));
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown scenario '" + text + "' (expected three:R#:V#, thirty or onetwenty)");
}

double three_curve_mean(MeanModel model, std::size_t j, double x) {
  switch (model) {
    case MeanModel::R1: return x;
    case MeanModel::R2: return x + 0.25 * static_cast<double>(j);
    case MeanModel::R3: return j == 0 ? x : (j == 1 ? 0.5 : 1.0 - x);
    case MeanModel::R4:
      if (j < 2) return x;
      return 1.0 - 48.0 * x + 218.0 * x * x - 315.0 * x * x * x + 145.0 * x * x * x * x;
  }
  return 0.0;
}

double three_curve_variance(VarianceModel model, std::size_t j, double x) {
  switch (model) {
    case VarianceModel::V1: return 0.5;
    case VarianceModel::V2: return 0.5 * (0.5 + 2.0 * x);
    case VarianceModel::V3: return j == 0 ? x : (j == 1 ? 0.5 : 0.5 * (2.5 - 2.0 * x));
    case VarianceModel::V4: return j < 2 ? x : 0.5 * (-4.0 * x * x + 4.0 * x + 0.5);
  }
  return 0.0;
}

double thirty_curve_mean(std::size_t j, double x, double a) {
  const std::size_t block = j / 5;
  switch (block) {
    case 0: return x + 2.0;
    case 1: return x * x + 3.0;
    case 2: return 2.0 * std::sin(2.0 * x) - 2.0;
    case 3: return 2.0 * std::sin(x);
    case 4: return 2.0 * std::sin(x) + a * std::exp(x);
    default: return 1.0;
  }
}

double hundred_twenty_curve_mean(std::size_t j, double x) {
  if (j < 50) return 0.0;
  if (j < 80) return 1.0 - 2.0 * x;
  if (j < 100) return 0.75 * std::atan(10.0 * (x - 0.6));
  if (j < 110) return std::abs(x) <= 1.0 ? 2.5 * std::pow(1.0 - x * x, 4) : 0.0;
  return 1.75 * std::atan(5.0 * (x - 0.6)) + 0.75;
}

double thirty_curve_min_variance(double a) {
  double lowest = std::numeric_limits<double>::infinity();
  auto visit = [&](double x) {
    for (std::size_t block = 0; block < 6; ++block) {
      lowest = std::min(lowest, 0.5 + 0.05 * thirty_curve_mean(block * 5, x, a));
    }
  };
  constexpr std::size_t kScan = 4001;
  for (std::size_t i = 0; i < kScan; ++i) visit(-2.0 + 4.0 * static_cast<double>(i) / (kScan - 1));
  visit(-std::numbers::pi / 4.0);  // exact minimum of the sin(2x) branch
  return lowest;
}

CurveCollection generate_three_curve(MeanModel mean, VarianceModel variance,
                                     const std::vector<std::size_t>& sizes, RngStream& rng) {
  const auto n = resolve_sizes(sizes, 3);
  return draw(
      n, 0.0, 1.0, rng, [mean](std::size_t j, double x) { return three_curve_mean(mean, j, x); },
      [variance](std::size_t j, double x) {
        return std::sqrt(three_curve_variance(variance, j, x));
      });
}

CurveCollection generate_thirty_curve(double a, VarianceMode mode,
                                      const std::vector<std::size_t>& sizes, RngStream& rng) {
  const auto n = resolve_sizes(sizes, kThirtyCurves);
  if (mode == VarianceMode::Heteroscedastic && !(thirty_curve_min_variance(a) > 0.0)) {
    throw Error(ErrorCode::NegativeVariance, "heteroscedastic variance is not positive");
  }
  return draw(
      n, -2.0, 2.0, rng, [a](std::size_t j, double x) { return thirty_curve_mean(j, x, a); },
      [a, mode](std::size_t j, double x) {
        if (mode == VarianceMode::Homoscedastic) return std::sqrt(0.5);
        return std::sqrt(0.5 + 0.05 * thirty_curve_mean(j, x, a));
      });
}

CurveCollection generate_hundred_twenty_curve(const std::vector<std::size_t>& sizes,
                                              RngStream& rng, bool noise_as_sd) {
  const auto n = resolve_sizes(sizes, kHundredTwentyCurves);
  const double sd = noise_as_sd ? 1.3 : std::sqrt(1.3);
  return draw(
      n, 0.0, 1.0, rng, [](std::size_t j, double x) { return hundred_twenty_curve_mean(j, x); },
      [sd](std::size_t, double) { return sd; });
}

std::vector<std::size_t> multinomial_sizes(std::size_t n, std::size_t curves, RngStream& rng) {
  static constexpr double kLevels[] = {1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> p(curves);
  double total = 0.0;
  for (double& v : p) {
    v = kLevels[rng.index(5)];
    total += v;
  }
  // Sequential conditional binomials.
  std::vector<std::size_t> sizes(curves, 0);
  std::size_t left = n;
  double mass = total;
  for (std::size_t j = 0; j + 1 < curves; ++j) {
    sizes[j] = static_cast<std::size_t>(rng.binomial(left, p[j] / mass));
    left -= sizes[j];
    mass -= p[j];
  }
  sizes.back() = left;
  return sizes;
}

Partition truth_partition(const ScenarioSpec& spec) {
  std::vector<std::size_t> labels;
  switch (spec.family) {
    case ScenarioFamily::ThreeCurve:
      switch (spec.mean) {
        case MeanModel::R1: labels = {0, 0, 0}; break;
        case MeanModel::R4: labels = {0, 0, 1}; break;
        default: labels = {0, 1, 2}; break;
      }
      break;
    case ScenarioFamily::ThirtyCurve:
      for (std::size_t j = 0; j < kThirtyCurves; ++j) {
        std::size_t block = j / 5;
        if (block == 4 && spec.a == 0.0) block = 3;
        labels.push_back(block);
      }
      break;
    case ScenarioFamily::HundredTwentyCurve:
      for (std::size_t j = 0; j < kHundredTwentyCurves; ++j) {
        labels.push_back(j < 50 ? 0 : j < 80 ? 1 : j < 100 ? 2 : j < 110 ? 3 : 4);
      }
      break;
  }
  return Partition::from_assignment(labels);
}

Scenario generate(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  Scenario out;
  const std::size_t J = spec.curve_count();
  if (spec.sample_sizes.empty()) {
    RngStream sizes_rng(derive_seed(seed, {0}));
    out.sizes = multinomial_sizes(spec.total_size, J, sizes_rng);
  } else {
    out.sizes = resolve_sizes(spec.sample_sizes, J);
  }
  RngStream rng(derive_seed(seed, {1}));
  switch (spec.family) {
    case ScenarioFamily::ThreeCurve:
      out.collection = generate_three_curve(spec.mean, spec.variance, out.sizes, rng);
      break;
    case ScenarioFamily::ThirtyCurve:
      out.collection = generate_thirty_curve(spec.a, spec.variance_mode, out.sizes, rng);
      break;
    case ScenarioFamily::HundredTwentyCurve:
      out.collection = generate_hundred_twenty_curve(out.sizes, rng, spec.noise_as_sd);
      break;
  }
  out.truth = truth_partition(spec);
  return out;
}

namespace {

// Minimum-cost perfect matching on a square matrix (Hungarian algorithm with
// potentials). Returns the total cost.
double min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

}  // namespace

std::size_t misclassification_count(const Partition& estimated, const Partition& truth) {
  if (estimated.size() != truth.size()) {
    throw Error(ErrorCode::InvalidArgument, "partitions cover different curve counts");
  }
  const std::size_t k = std::max(estimated.group_count(), truth.group_count());
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < estimated.size(); ++j) {
    cost[estimated.group_of(j)][truth.group_of(j)] -= 1.0;
  }
  const double matched = -min_cost_assignment(cost);
  return estimated.size() - static_cast<std::size_t>(std::llround(matched));
}

double MonteCarloReport::selection_rate(std::size_t k) const {
  if (successes() == 0 || k >= selected_k_histogram.size()) return 0.0;
  return static_cast<double>(selected_k_histogram[k]) / static_cast<double>(successes());
}

double MonteCarloReport::misclassified_at_most(std::size_t count) const {
  if (successes() == 0) return 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < misclassification_histogram.size() && c <= count; ++c) {
    n += misclassification_histogram[c];
  }
  return static_cast<double>(n) / static_cast<double>(successes());
}

MonteCarloReport run_monte_carlo(const ScenarioSpec& spec, const MonteCarloConfig& cfg) {
  if (cfg.runs < 1) throw Error(ErrorCode::InvalidArgument, "need at least one run");
  spec.validate();
  cfg.test.validate();
  const std::size_t J = spec.curve_count();
  const std::size_t k_max = cfg.k_max == 0 ? J : cfg.k_max;
  if (cfg.metric == MonteCarloMetric::Rejection && (cfg.k < 1 || cfg.k > J)) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= K <= J");
  }
  if (cfg.metric == MonteCarloMetric::Selection && k_max > J) {
    throw Error(ErrorCode::InvalidArgument, "need k_max <= J");
  }

  MonteCarloReport report;
  report.spec = spec;
  report.config = cfg;
  report.runs = cfg.runs;
  report.records.resize(cfg.runs);
  TestConfig test_cfg = cfg.test;
  if (cfg.threads > 1) test_cfg.threads = 1;

  detail::parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    RunRecord& rec = report.records[r];
    rec.run = r;
    rec.seed = derive_seed(cfg.seed, {r});
    try {
      const Scenario data = generate(spec, derive_seed(rec.seed, {0}));
      const EvaluationGrid grid = common_grid(data.collection, cfg.grid_size);
      TestConfig run_cfg = test_cfg;
      run_cfg.bootstrap.seed = derive_seed(rec.seed, {1});
      TestContext ctx(data.collection, grid, run_cfg);
      const TestResult* chosen = nullptr;
      KSelectionTrace trace;
      TestResult single;
      if (cfg.metric == MonteCarloMetric::Rejection) {
        single = ctx.test(cfg.k, run_cfg.bootstrap.seed);
        chosen = &single;
      } else {
        trace = select_k(ctx, k_max);
        chosen = &trace.selected();
        rec.selected_k = trace.selected_k;
      }
      rec.statistic = chosen->statistic;
      rec.p_value = chosen->p_value;
      rec.reject = chosen->reject;
      rec.misclassified = misclassification_count(chosen->partition, data.truth);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  report.selected_k_histogram.assign(k_max + 1, 0);
  for (const auto& rec : report.records) {
    if (rec.failed) {
      ++report.failures;
      continue;
    }
    if (rec.reject) ++report.rejections;
    if (cfg.metric == MonteCarloMetric::Selection) ++report.selected_k_histogram[rec.selected_k];
    if (report.misclassification_histogram.size() <= rec.misclassified) {
      report.misclassification_histogram.resize(rec.misclassified + 1, 0);
    }
    ++report.misclassification_histogram[rec.misclassified];
  }
  if (report.successes() > 0) {
    report.rejection_rate =
        static_cast<double>(report.rejections) / static_cast<double>(report.successes());
  }
  return report;
}

void write_report_csv(const MonteCarloReport& report, std::ostream& out) {
  const auto& cfg = report.config;
  std::ostringstream head;
  head.precision(15);
  head << report.spec.label() << ',' << to_string(cfg.test.norm) << ','
       << cfg.test.bootstrap.alpha << ',' << cfg.test.bootstrap.replicates << ','
       << report.runs << ',' << report.failures;
  const std::string prefix = head.str();
  out.precision(15);
  if (cfg.metric == MonteCarloMetric::Rejection) {
    out << "scenario,norm,alpha,boot,runs,failures,k,rejections,rejection_rate\n";
    out << prefix << ',' << cfg.k << ',' << report.rejections << ',' << report.rejection_rate
        << '\n';
    return;
  }
  out << "scenario,norm,alpha,boot,runs,failures,k,count,percent\n";
  for (std::size_t k = 1; k < report.selected_k_histogram.size(); ++k) {
    out << prefix << ',' << k << ',' << report.selected_k_histogram[k] << ','
        << 100.0 * report.selection_rate(k) << '\n';
  }
}

}  // namespace curvegroups
