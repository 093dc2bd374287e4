#include "curvegroups/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "curvegroups/errors.hpp"

namespace curvegroups {

namespace {
constexpr double kGaussianNorm = 0.3989422804014327;  // 1/sqrt(2 pi)
}

std::string_view to_string(KernelType type) noexcept {
  return type == KernelType::Gaussian ? "gaussian" : "epanechnikov";
}

KernelType parse_kernel(std::string_view text) {
  if (text == "epanechnikov") return KernelType::Epanechnikov;
  if (text == "gaussian") return KernelType::Gaussian;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(text) + "'");
}

double KernelFunction::operator()(double u) const noexcept {
  if (type_ == KernelType::Gaussian) return kGaussianNorm * std::exp(-0.5 * u * u);
  const double v = 1.0 - u * u;
  return v > 0.0 ? 0.75 * v : 0.0;
}

double KernelFunction::peak() const noexcept {
  return type_ == KernelType::Gaussian ? kGaussianNorm : 0.75;
}

double KernelFunction::support_radius() const noexcept {
  // exp(-u^2/2) = 1e-12  <=>  u = sqrt(24 ln 10)
  return type_ == KernelType::Gaussian ? std::sqrt(24.0 * std::numbers::ln10) : 1.0;
}

}  // namespace curvegroups
