#include "curvegroups/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "curvegroups/errors.hpp"

namespace curvegroups {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
    throw ParseError(line, "line " + std::to_string(line) + ": malformed number '" +
                               std::string(field) + "'");
  }
  return v;
}

struct Row {
  std::string id;
  double a;
  double b;
};

// Reads `id,a,b` rows under the expected header and groups them by id in
// first-appearance order.
template <class Sink>
void read_rows(std::istream& in, std::string_view header, Sink&& sink) {
  std::string line;
  std::size_t number = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (number == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    if (!seen_header) {
      std::string compact;
      for (char c : view) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != header) {
        throw ParseError(number, "line " + std::to_string(number) + ": expected header '" +
                                     std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(number, "line " + std::to_string(number) + ": expected 3 fields");
    }
    const auto id = trim(view.substr(0, c1));
    if (id.empty()) {
      throw ParseError(number, "line " + std::to_string(number) + ": empty identifier");
    }
    sink(Row{std::string(id), parse_real(view.substr(c1 + 1, c2 - c1 - 1), number),
             parse_real(view.substr(c2 + 1), number)});
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure");
  if (!seen_header) throw ParseError(number, "missing header '" + std::string(header) + "'");
}

std::vector<CurveSample> group_rows(std::istream& in, std::string_view header) {
  std::vector<CurveSample> samples;
  std::unordered_map<std::string, std::size_t> index;
  read_rows(in, header, [&](Row row) {
    auto [it, inserted] = index.try_emplace(row.id, samples.size());
    if (inserted) samples.push_back({row.id, {}, {}});
    auto& s = samples[it->second];
    s.xs.push_back(row.a);
    s.ys.push_back(row.b);
  });
  return samples;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

template <class Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig15(v);
}

json numbers(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

json matrix_rows(const Matrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(numbers(m.row(r)));
  return out;
}

double get_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::vector<double> get_numbers(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_number(v));
  return out;
}

Matrix get_matrix(const json& rows, std::size_t cols) {
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto values = get_numbers(rows[r]);
    if (values.size() != cols) throw Error(ErrorCode::ParseError, "ragged matrix in JSON");
    std::copy(values.begin(), values.end(), m.row(r).begin());
  }
  return m;
}

EvaluationGrid grid_from_json(const json& j) {
  return EvaluationGrid(j.at("lo").get<double>(), j.at("hi").get<double>(),
                        j.at("size").get<std::size_t>());
}

json assignment_json(const Partition& p) {
  json out = json::array();
  for (std::size_t g : p.assignment()) out.push_back(g + 1);
  return out;
}

Partition partition_from_json(const json& j) {
  std::vector<std::size_t> labels;
  for (const auto& v : j) {
    const auto g = v.get<std::size_t>();
    if (g == 0) throw Error(ErrorCode::ParseError, "group labels are 1-based");
    labels.push_back(g - 1);
  }
  return Partition::from_assignment(labels);
}

json pooled_json(const PooledEstimates& p) {
  return {{"bandwidths", numbers(p.group_bandwidths)}, {"values", matrix_rows(p.group_values)}};
}

// A test record without the (shared) curve estimates.
json test_core_json(const TestResult& r) {
  json j;
  j["k"] = r.k;
  j["norm"] = std::string(to_string(r.norm));
  j["statistic"] = number(r.statistic);
  j["p_value"] = number(r.p_value);
  j["alpha"] = number(r.alpha);
  j["reject"] = r.reject;
  j["group_count"] = r.partition.group_count();
  j["assignment"] = assignment_json(r.partition);
  j["boot_stats"] = numbers(r.boot_stats);
  if (r.pooled) j["pooled"] = pooled_json(*r.pooled);
  return j;
}

TestResult test_core_from_json(const json& j, const EvaluationGrid* grid) {
  TestResult r;
  r.k = j.at("k").get<std::size_t>();
  r.norm = parse_norm(j.at("norm").get<std::string>());
  r.statistic = get_number(j.at("statistic"));
  r.p_value = get_number(j.at("p_value"));
  r.alpha = get_number(j.at("alpha"));
  r.reject = j.at("reject").get<bool>();
  r.partition = partition_from_json(j.at("assignment"));
  r.boot_stats = get_numbers(j.at("boot_stats"));
  if (j.contains("pooled") && grid) {
    PooledEstimates p;
    p.grid = *grid;
    p.group_bandwidths = get_numbers(j["pooled"].at("bandwidths"));
    p.group_values = get_matrix(j["pooled"].at("values"), grid->size());
    r.pooled = std::move(p);
  }
  return r;
}

}  // namespace

CurveCollection parse_curves_csv(std::istream& in) {
  return validate_collection(group_rows(in, "curve_id,x,y"));
}

CurveCollection read_curves_csv(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_input(path);
    return parse_curves_csv(in);
  });
}

void write_curves_csv(const CurveCollection& collection, std::ostream& out) {
  out << "curve_id,x,y\n";
  char buf[64];
  for (const auto& s : collection.samples()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.curve_id << ',';
      std::snprintf(buf, sizeof buf, "%.17g,", s.xs[i]);
      out << buf;
      std::snprintf(buf, sizeof buf, "%.17g\n", s.ys[i]);
      out << buf;
    }
  }
}

TunnelFormat parse_tunnel_format(const std::string& text) {
  if (text == "cartesian") return TunnelFormat::Cartesian;
  if (text == "polar") return TunnelFormat::Polar;
  throw Error(ErrorCode::InvalidArgument, "format must be cartesian or polar, got '" + text + "'");
}

std::vector<PointCloudSection> parse_sections_csv(std::istream& in) {
  std::vector<PointCloudSection> out;
  for (auto& s : group_rows(in, "section_id,x,y")) {
    out.push_back({std::move(s.curve_id), std::move(s.xs), std::move(s.ys)});
  }
  return out;
}

CurveCollection parse_tunnel_csv(std::istream& in, TunnelFormat format) {
  std::vector<CurveSample> curves;
  if (format == TunnelFormat::Cartesian) {
    for (const auto& section : parse_sections_csv(in)) curves.push_back(to_polar(section));
  } else {
    curves = group_rows(in, "section_id,angle,radius");
    for (auto& c : curves) {
      for (double& a : c.xs) {
        if (!std::isfinite(a)) continue;  // rejected by validation
        a = std::remainder(a, 2.0 * std::numbers::pi);
        if (a >= std::numbers::pi) a = -std::numbers::pi;
      }
    }
  }
  return validate_collection(std::move(curves));
}

CurveCollection read_tunnel_csv(const std::filesystem::path& path, TunnelFormat format) {
  return with_path(path, [&] {
    auto in = open_input(path);
    return parse_tunnel_csv(in, format);
  });
}

double round_sig15(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

json to_json(const EvaluationGrid& grid) {
  return {{"lo", number(grid.lo())}, {"hi", number(grid.hi())}, {"size", grid.size()},
          {"points", numbers(grid.points())}};
}

json to_json(const CurveEstimateMatrix& m) {
  json j;
  j["type"] = "curve_estimates";
  j["grid"] = to_json(m.grid);
  j["curve_ids"] = m.curve_ids;
  j["bandwidths"] = numbers(m.bandwidths);
  j["values"] = matrix_rows(m.values);
  return j;
}

json to_json(const TestResult& r) {
  json j = test_core_json(r);
  j["type"] = "test";
  if (r.estimates) {
    j["grid"] = to_json(r.estimates->grid);
    j["curve_ids"] = r.estimates->curve_ids;
    j["estimates"] = to_json(*r.estimates);
  } else if (r.pooled) {
    j["grid"] = to_json(r.pooled->grid);
  }
  return j;
}

json to_json(const KSelectionTrace& t) {
  json j;
  j["type"] = "k_selection";
  j["selected_k"] = t.selected_k;
  j["saturated"] = t.saturated;
  j["group_count"] = t.final_partition.group_count();
  j["assignment"] = assignment_json(t.final_partition);
  j["statistics"] = json::array();
  j["p_values"] = json::array();
  j["tests"] = json::array();
  for (const auto& r : t.tests) {
    j["statistics"].push_back(number(r.statistic));
    j["p_values"].push_back(number(r.p_value));
    j["tests"].push_back(test_core_json(r));
  }
  if (!t.tests.empty() && t.tests.front().estimates) {
    const auto& m = *t.tests.front().estimates;
    j["grid"] = to_json(m.grid);
    j["curve_ids"] = m.curve_ids;
    j["estimates"] = to_json(m);
  }
  return j;
}

json to_json(const MonteCarloReport& r) {
  json j;
  j["type"] = "monte_carlo";
  j["scenario"] = r.spec.label();
  j["metric"] = r.config.metric == MonteCarloMetric::Rejection ? "rejection" : "selection";
  j["norm"] = std::string(to_string(r.config.test.norm));
  j["alpha"] = number(r.config.test.bootstrap.alpha);
  j["boot"] = r.config.test.bootstrap.replicates;
  j["seed"] = r.config.seed;
  j["runs"] = r.runs;
  j["failures"] = r.failures;
  if (r.config.metric == MonteCarloMetric::Rejection) {
    j["k"] = r.config.k;
    j["rejections"] = r.rejections;
    j["rejection_rate"] = number(r.rejection_rate);
  } else {
    j["selected_k_histogram"] = r.selected_k_histogram;
  }
  j["misclassification_histogram"] = r.misclassification_histogram;
  json records = json::array();
  for (const auto& rec : r.records) {
    json x;
    x["run"] = rec.run;
    x["seed"] = rec.seed;
    x["failed"] = rec.failed;
    if (rec.failed) {
      x["error"] = rec.error;
    } else {
      x["statistic"] = number(rec.statistic);
      x["p_value"] = number(rec.p_value);
      x["reject"] = rec.reject;
      if (r.config.metric == MonteCarloMetric::Selection) x["selected_k"] = rec.selected_k;
      x["misclassified"] = rec.misclassified;
    }
    records.push_back(std::move(x));
  }
  j["records"] = std::move(records);
  return j;
}

CurveEstimateMatrix estimates_from_json(const json& j) {
  CurveEstimateMatrix m;
  m.grid = grid_from_json(j.at("grid"));
  m.curve_ids = j.at("curve_ids").get<std::vector<std::string>>();
  m.bandwidths = get_numbers(j.at("bandwidths"));
  m.values = get_matrix(j.at("values"), m.grid.size());
  return m;
}

TestResult test_result_from_json(const json& j) {
  std::optional<EvaluationGrid> grid;
  if (j.contains("grid")) grid = grid_from_json(j["grid"]);
  TestResult r = test_core_from_json(j, grid ? &*grid : nullptr);
  if (j.contains("estimates")) r.estimates = estimates_from_json(j["estimates"]);
  return r;
}

KSelectionTrace trace_from_json(const json& j) {
  KSelectionTrace t;
  t.selected_k = j.at("selected_k").get<std::size_t>();
  t.saturated = j.at("saturated").get<bool>();
  t.final_partition = partition_from_json(j.at("assignment"));
  std::optional<EvaluationGrid> grid;
  if (j.contains("grid")) grid = grid_from_json(j["grid"]);
  std::optional<CurveEstimateMatrix> estimates;
  if (j.contains("estimates")) estimates = estimates_from_json(j["estimates"]);
  for (const auto& test : j.at("tests")) {
    t.tests.push_back(test_core_from_json(test, grid ? &*grid : nullptr));
    t.tests.back().estimates = estimates;
  }
  return t;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_profile_csv(const PooledEstimates& pooled, std::ostream& out) {
  out << "angle,radius,group\n";
  char buf[96];
  const auto& z = pooled.grid.points();
  for (std::size_t g = 0; g < pooled.group_values.rows(); ++g) {
    for (std::size_t q = 0; q < z.size(); ++q) {
      std::snprintf(buf, sizeof buf, "%.15g,%.15g,%zu\n", z[q], pooled.group_values(g, q), g + 1);
      out << buf;
    }
  }
}

void write_labels_csv(const std::vector<std::string>& ids, const Partition& partition,
                      std::ostream& out) {
  if (ids.size() != partition.size()) {
    throw Error(ErrorCode::InvalidArgument, "label count does not match the partition");
  }
  out << "section_id,group\n";
  for (std::size_t j = 0; j < ids.size(); ++j) out << ids[j] << ',' << partition.group_of(j) + 1 << '\n';
}

}  // namespace curvegroups
