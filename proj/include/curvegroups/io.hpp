#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvegroups/core_types.hpp"
#include "curvegroups/polar.hpp"
#include "curvegroups/simulation.hpp"

namespace curvegroups {

/// CSV with header `curve_id,x,y`. Rows may come in any order; curves keep
/// the order of first appearance. Errors name the 1-based line.
CurveCollection read_curves_csv(const std::filesystem::path& path);
CurveCollection parse_curves_csv(std::istream& in);
void write_curves_csv(const CurveCollection& collection, std::ostream& out);

enum class TunnelFormat { Cartesian, Polar };
TunnelFormat parse_tunnel_format(const std::string& text);

/// Cartesian sections (`section_id,x,y`), grouped like read_curves_csv.
std::vector<PointCloudSection> parse_sections_csv(std::istream& in);

/// Tunnel cross-sections as angle/radius curves. Cartesian input goes
/// through to_polar; polar input (`section_id,angle,radius`) has its angles
/// wrapped into [-pi, pi).
CurveCollection read_tunnel_csv(const std::filesystem::path& path, TunnelFormat format);
CurveCollection parse_tunnel_csv(std::istream& in, TunnelFormat format);

/// Rounds to 15 significant decimal digits.
double round_sig15(double v);

nlohmann::json to_json(const EvaluationGrid& grid);
nlohmann::json to_json(const CurveEstimateMatrix& m);
nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const KSelectionTrace& t);
nlohmann::json to_json(const MonteCarloReport& r);

CurveEstimateMatrix estimates_from_json(const nlohmann::json& j);
TestResult test_result_from_json(const nlohmann::json& j);
KSelectionTrace trace_from_json(const nlohmann::json& j);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Plot-ready profile: every group's pooled fit on the grid as
/// `angle,radius,group` rows, groups 1-based.
void write_profile_csv(const PooledEstimates& pooled, std::ostream& out);

/// `section_id,group` rows, groups 1-based.
void write_labels_csv(const std::vector<std::string>& ids, const Partition& partition,
                      std::ostream& out);

}  // namespace curvegroups
