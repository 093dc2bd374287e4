#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curvegroups/core_types.hpp"

namespace curvegroups {

/// One planar cross-section of a point cloud in Cartesian coordinates.
struct PointCloudSection {
  std::string section_id;
  std::vector<double> xs;
  std::vector<double> ys;

  void validate() const;
};

/// Angle in [-pi, pi) from the two-argument arctangent as covariate, radius
/// as response. Throws Error(OriginPoint) for a point at (0, 0).
CurveSample to_polar(const PointCloudSection& section);

/// Polar angle of (x, y) in [-pi, pi).
double polar_angle(double x, double y);

/// (r cos a, r sin a) for every pair.
std::vector<std::pair<double, double>> from_polar(std::span<const double> angles,
                                                  std::span<const double> radii);

}  // namespace curvegroups
