#pragma once

#include <cstddef>

#include "curvegroups/core_types.hpp"
#include "curvegroups/hypothesis_test.hpp"

namespace curvegroups {

/// Tests H0(1), H0(2), ... and stops at the first K that is not rejected.
/// The test for K draws from derive_seed(cfg.bootstrap.seed, {K}). If every
/// K up to k_max is rejected, selected_k = k_max and `saturated` is set.
KSelectionTrace select_k(const TestContext& context, std::size_t k_max);

KSelectionTrace select_k(const CurveCollection& collection, std::size_t k_max,
                         const TestConfig& cfg, const EvaluationGrid& grid);

}  // namespace curvegroups
