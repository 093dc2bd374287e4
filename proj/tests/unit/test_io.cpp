#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>

#include "curvegroups/errors.hpp"
#include "curvegroups/hypothesis_test.hpp"
#include "curvegroups/io.hpp"
#include "curvegroups/k_selection.hpp"

using namespace curvegroups;

namespace {

// Grids are stored as lo/hi/size, so rebuilt points may differ in the last
// printed digit; everything else must survive exactly.
nlohmann::json without_grids(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("grid");
    for (auto& [key, value] : j.items()) value = without_grids(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = without_grids(value);
  }
  return j;
}

}  // namespace

TEST_CASE("curves CSV") {
  std::istringstream in("curve_id,x,y\na,0,1\nb,0,2\na,1,3\n\nb,1,4\na,2,5\nb,2,6\n");
  auto c = parse_curves_csv(in);
  REQUIRE(c.curve_count() == 2);
  CHECK(c[0].curve_id == "a");
  CHECK(c[0].ys == std::vector<double>{1, 3, 5});
  CHECK(c[1].xs == std::vector<double>{0, 1, 2});

  std::ostringstream out;
  write_curves_csv(c, out);
  std::istringstream again(out.str());
  auto c2 = parse_curves_csv(again);
  CHECK(c2.samples()[1].ys == c.samples()[1].ys);
  CHECK(c2.curve_ids() == c.curve_ids());
}

TEST_CASE("parse errors carry the line number") {
  std::istringstream in("curve_id,x,y\na,0,1\na,1,2\nb,0.5e,3\n");
  try {
    parse_curves_csv(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::istringstream header("id,x,y\na,0,1\n");
  CHECK_THROWS_AS(parse_curves_csv(header), ParseError);
  std::istringstream short_row("curve_id,x,y\na,0\n");
  CHECK_THROWS_AS(parse_curves_csv(short_row), ParseError);
  std::istringstream nan("curve_id,x,y\na,0,nan\na,1,1\n");
  CHECK_THROWS_AS(parse_curves_csv(nan), Error);
}

TEST_CASE("tunnel-shaped input") {
  std::ostringstream text;
  text << "section_id,x,y\n";
  std::size_t rows = 0;
  for (int s = 0; s < 66; ++s) {
    const int points = 243 + (s < 37 ? 1 : 0);
    for (int i = 0; i < points; ++i, ++rows) {
      const double a = 2 * std::numbers::pi * (i + 0.5) / points;
      text << "s" << s << ',' << 4.5 * std::cos(a) << ',' << 4.5 * std::sin(a) << '\n';
    }
  }
  CHECK(rows == 16075);
  std::istringstream in(text.str());
  auto c = parse_tunnel_csv(in, TunnelFormat::Cartesian);
  CHECK(c.curve_count() == 66);
  CHECK(c.total_size() == 16075);
  // stream output keeps six significant digits
  for (double r : c[5].ys) CHECK(r == doctest::Approx(4.5).epsilon(1e-5));

  std::istringstream polar("section_id,angle,radius\nA,3.5,1\nA,0,1\nA,1,1\n");
  auto p = parse_tunnel_csv(polar, TunnelFormat::Polar);
  CHECK(p[0].xs[0] == doctest::Approx(3.5 - 2 * std::numbers::pi));
  CHECK(parse_tunnel_format("polar") == TunnelFormat::Polar);
  CHECK_THROWS_AS(parse_tunnel_format("spherical"), Error);
}

TEST_CASE("fifteen significant digits") {
  CHECK(round_sig15(0.1 + 0.2) == 0.3);
  CHECK(round_sig15(1.0 / 3.0) == 0.333333333333333);
  CHECK(to_json(TestResult{}).at("statistic").get<double>() == 0.0);
}

TEST_CASE("json round trips") {
  RngStream rng(1);
  std::vector<CurveSample> raw;
  for (int j = 0; j < 4; ++j) {
    CurveSample s{"c" + std::to_string(j), {}, {}};
    for (int i = 0; i < 60; ++i) {
      const double x = rng.uniform();
      s.xs.push_back(x);
      s.ys.push_back((j % 2) + x + 0.2 * rng.normal());
    }
    raw.push_back(s);
  }
  auto c = validate_collection(raw);
  auto grid = common_grid(c, 20);
  TestConfig cfg;
  cfg.bootstrap.replicates = 15;
  auto trace = select_k(c, 3, cfg, grid);

  auto j = to_json(trace);
  CHECK(j.at("group_count").get<std::size_t>() == trace.selected().partition.group_count());
  CHECK(j.at("assignment").size() == 4);
  auto back = trace_from_json(j);
  CHECK(back.selected_k == trace.selected_k);
  CHECK(back.saturated == trace.saturated);
  CHECK(back.final_partition == trace.final_partition);
  REQUIRE(back.tests.size() == trace.tests.size());
  CHECK(back.tests[0].boot_stats.size() == 15);
  CHECK(back.tests[0].statistic == round_sig15(trace.tests[0].statistic));
  CHECK(without_grids(to_json(back)) == without_grids(j));

  auto r = trace.tests.back();
  auto tj = to_json(r);
  auto rb = test_result_from_json(tj);
  CHECK(rb.partition == r.partition);
  CHECK(rb.reject == r.reject);
  CHECK(without_grids(to_json(rb)) == without_grids(tj));

  auto est = estimate_curves(c, grid);
  auto ej = to_json(est);
  auto eb = estimates_from_json(ej);
  CHECK(eb.curve_ids == est.curve_ids);
  CHECK(eb.grid.size() == grid.size());
  CHECK(without_grids(to_json(eb)) == without_grids(ej));
  for (std::size_t q = 0; q < grid.size(); ++q)
    CHECK(eb.grid[q] == doctest::Approx(grid[q]).epsilon(1e-14));

  const auto path = std::filesystem::temp_directory_path() / "curvegroups_io_test.json";
  write_json_file(ej, path);
  CHECK(read_json_file(path) == ej);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_json_file(path), Error);
}

TEST_CASE("labels and profile CSV") {
  std::ostringstream labels;
  write_labels_csv({"a", "b", "c"}, Partition::from_assignment(std::vector<std::size_t>{0, 1, 0}),
                   labels);
  CHECK(labels.str() == "section_id,group\na,1\nb,2\nc,1\n");

  PooledEstimates pooled;
  pooled.grid = EvaluationGrid(0.0, 1.0, 2);
  pooled.group_values = Matrix(1, 2, 4.5);
  pooled.group_bandwidths = {0.1};
  std::ostringstream profile;
  write_profile_csv(pooled, profile);
  CHECK(profile.str() == "angle,radius,group\n0,4.5,1\n1,4.5,1\n");
}
