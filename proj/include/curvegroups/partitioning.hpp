#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "curvegroups/core_types.hpp"

namespace curvegroups {

/// K-means (CM) or coordinate-wise K-medians (KS) on estimate rows.
struct ClusterConfig {
  Norm norm = Norm::CM;
  std::size_t restarts = 20;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
};

struct ClusterResult {
  Partition partition;
  double cost = 0.0;  ///< partition_cost of `partition`
};

/// Lloyd iterations from D^p-weighted seeding (p = 2 for CM, 1 for KS), best
/// of cfg.restarts runs. Restart r draws from derive_seed(cfg.seed, {r}).
ClusterResult cluster_rows(const Matrix& rows, std::size_t k, const ClusterConfig& cfg);

inline ClusterResult cluster_rows(const CurveEstimateMatrix& m, std::size_t k,
                                  const ClusterConfig& cfg) {
  return cluster_rows(m.values, k, cfg);
}

/// Group centres: coordinate-wise means (CM) or medians (KS). Even-sized
/// groups take the midpoint of the two middle values.
Matrix group_centers(const Matrix& rows, const Partition& partition, Norm norm);

/// Within-group cost: squared L2 (CM) or L1 (KS) distance of every row to
/// its group centre.
double partition_cost(const Matrix& rows, const Partition& partition, Norm norm);

/// Number of set partitions of n items into k nonempty blocks, as a double.
double stirling2(std::size_t n, std::size_t k);

/// Visits every partition of {0..n-1} into exactly k nonempty groups as a
/// restricted-growth label vector.
void for_each_partition(std::size_t n, std::size_t k,
                        const std::function<void(std::span<const std::size_t>)>& visit);

struct BruteForceResult {
  Partition partition;
  double cost = 0.0;
  std::size_t enumerated = 0;
};

/// Exhaustive minimiser of partition_cost. Throws Error(TooLarge) when the
/// Stirling count exceeds `limit`.
BruteForceResult brute_force_partition(const Matrix& rows, std::size_t k, Norm norm,
                                       double limit = 1e6);

}  // namespace curvegroups
