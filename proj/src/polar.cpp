#include "curvegroups/polar.hpp"

#include <cmath>
#include <numbers>

#include "curvegroups/errors.hpp"

namespace curvegroups {

void PointCloudSection::validate() const {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::InvalidArgument, "section " + section_id + ": x/y lengths differ");
  }
  if (xs.size() < 3) {
    throw Error(ErrorCode::EmptyCurve, "section " + section_id + " needs at least 3 points");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw Error(ErrorCode::NonFiniteValue, "section " + section_id + ": non-finite coordinate");
    }
  }
}

double polar_angle(double x, double y) {
  const double a = std::atan2(y, x);
  // atan2 returns pi on the negative x axis; the half-open range wants -pi.
  return a >= std::numbers::pi ? -std::numbers::pi : a;
}

CurveSample to_polar(const PointCloudSection& section) {
  section.validate();
  CurveSample out;
  out.curve_id = section.section_id;
  out.xs.reserve(section.xs.size());
  out.ys.reserve(section.xs.size());
  for (std::size_t i = 0; i < section.xs.size(); ++i) {
    const double x = section.xs[i];
    const double y = section.ys[i];
    const double r = std::hypot(x, y);
    if (r == 0.0) {
      throw Error(ErrorCode::OriginPoint,
                  "section " + section.section_id + ": point " + std::to_string(i + 1) +
                      " lies at the origin");
    }
    out.xs.push_back(polar_angle(x, y));
    out.ys.push_back(r);
  }
  return out;
}

std::vector<std::pair<double, double>> from_polar(std::span<const double> angles,
                                                  std::span<const double> radii) {
  if (angles.size() != radii.size()) {
    throw Error(ErrorCode::InvalidArgument, "angle and radius lengths differ");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    out.emplace_back(radii[i] * std::cos(angles[i]), radii[i] * std::sin(angles[i]));
  }
  return out;
}

}  // namespace curvegroups
