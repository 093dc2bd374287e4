#pragma once

#include <string_view>

namespace curvegroups {

enum class KernelType { Epanechnikov, Gaussian };

std::string_view to_string(KernelType type) noexcept;
KernelType parse_kernel(std::string_view text);

/// Symmetric density kernel used for local weighting.
///
/// Weights at or below `weight_floor()` (1e-12 of the peak value) are treated
/// as exact zeros everywhere, which gives the Gaussian an effective support of
/// |u| < sqrt(2 ln 1e12) ~= 7.43.
class KernelFunction {
 public:
  constexpr KernelFunction() = default;
  constexpr explicit KernelFunction(KernelType type) : type_(type) {}

  KernelType type() const noexcept { return type_; }

  double operator()(double u) const noexcept;

  double peak() const noexcept;
  double weight_floor() const noexcept { return 1e-12 * peak(); }

  /// Half-width (in units of h) outside which every weight is below the floor.
  double support_radius() const noexcept;

  bool operator==(const KernelFunction&) const = default;

 private:
  KernelType type_ = KernelType::Epanechnikov;
};

}  // namespace curvegroups
