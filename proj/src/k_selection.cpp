#include "curvegroups/k_selection.hpp"

#include <string>

#include "curvegroups/errors.hpp"
#include "curvegroups/rng.hpp"

namespace curvegroups {

KSelectionTrace select_k(const TestContext& context, std::size_t k_max) {
  const std::size_t J = context.collection().curve_count();
  if (k_max < 1 || k_max > J) throw Error(ErrorCode::InvalidArgument, "need 1 <= k_max <= J");
  const std::uint64_t master = context.config().bootstrap.seed;
  KSelectionTrace trace;
  trace.saturated = true;
  for (std::size_t k = 1; k <= k_max; ++k) {
    try {
      trace.tests.push_back(context.test(k, derive_seed(master, {k})));
    } catch (const Error& e) {
      throw Error(e.code(), "K = " + std::to_string(k) + ": " + e.what());
    }
    if (!trace.tests.back().reject) {
      trace.saturated = false;
      break;
    }
  }
  trace.selected_k = trace.tests.back().k;
  trace.final_partition = trace.tests.back().partition;
  return trace;
}

KSelectionTrace select_k(const CurveCollection& collection, std::size_t k_max,
                         const TestConfig& cfg, const EvaluationGrid& grid) {
  TestContext ctx(collection, grid, cfg);
  return select_k(ctx, k_max);
}

}  // namespace curvegroups
