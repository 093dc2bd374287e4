#include "curvegroups/partitioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "curvegroups/errors.hpp"
#include "curvegroups/rng.hpp"

namespace curvegroups {

namespace {

double distance(std::span<const double> a, std::span<const double> b, Norm norm) {
  double acc = 0.0;
  if (norm == Norm::CM) {
    for (std::size_t q = 0; q < a.size(); ++q) {
      const double d = a[q] - b[q];
      acc += d * d;
    }
  } else {
    for (std::size_t q = 0; q < a.size(); ++q) acc += std::abs(a[q] - b[q]);
  }
  return acc;
}

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// Centres from a raw label vector with exactly k labels in use.
void compute_centers(const Matrix& rows, std::span<const std::size_t> labels, std::size_t k,
                     Norm norm, Matrix& centers) {
  const std::size_t cols = rows.cols();
  centers = Matrix(k, cols, 0.0);
  if (norm == Norm::CM) {
    std::vector<double> sizes(k, 0.0);
    for (std::size_t j = 0; j < rows.rows(); ++j) {
      auto c = centers.row(labels[j]);
      const auto r = rows.row(j);
      for (std::size_t q = 0; q < cols; ++q) c[q] += r[q];
      sizes[labels[j]] += 1.0;
    }
    for (std::size_t g = 0; g < k; ++g) {
      if (sizes[g] == 0.0) continue;
      for (double& v : centers.row(g)) v /= sizes[g];
    }
    return;
  }
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t j = 0; j < rows.rows(); ++j) members[labels[j]].push_back(j);
  std::vector<double> column;
  for (std::size_t g = 0; g < k; ++g) {
    if (members[g].empty()) continue;
    for (std::size_t q = 0; q < cols; ++q) {
      column.clear();
      for (std::size_t j : members[g]) column.push_back(rows(j, q));
      centers(g, q) = median_of(column);
    }
  }
}

struct RunResult {
  std::vector<std::size_t> labels;
  bool complete = false;
};

RunResult lloyd_run(const Matrix& rows, std::size_t k, const ClusterConfig& cfg, RngStream& rng) {
  const std::size_t n = rows.rows();
  Matrix centers(k, rows.cols());

  // D^p-weighted seeding.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> chosen;
  chosen.push_back(rng.index(n));
  while (chosen.size() < k) {
    const auto last = rows.row(chosen.back());
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      nearest[j] = std::min(nearest[j], distance(rows.row(j), last, cfg.norm));
      total += nearest[j];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t j = 0; j < n; ++j) {
        if (nearest[j] <= 0.0) continue;
        pick = j;
        u -= nearest[j];
        if (u < 0.0) break;
      }
    }
    if (pick == n) {
      // Every remaining row duplicates a centre; take any unchosen row.
      std::vector<std::size_t> free;
      for (std::size_t j = 0; j < n; ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) free.push_back(j);
      }
      pick = free[rng.index(free.size())];
    }
    chosen.push_back(pick);
  }
  for (std::size_t g = 0; g < k; ++g) {
    const auto src = rows.row(chosen[g]);
    std::copy(src.begin(), src.end(), centers.row(g).begin());
  }

  RunResult run;
  run.labels.assign(n, k);
  std::vector<double> own(n, 0.0);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      double best_d = distance(rows.row(j), centers.row(0), cfg.norm);
      for (std::size_t g = 1; g < k; ++g) {
        const double d = distance(rows.row(j), centers.row(g), cfg.norm);
        if (d < best_d) {
          best_d = d;
          best = g;
        }
      }
      changed = changed || run.labels[j] != best;
      run.labels[j] = best;
      own[j] = best_d;
      ++sizes[best];
    }
    // Re-seed empty clusters with the row farthest from its own centre.
    for (std::size_t g = 0; g < k; ++g) {
      if (sizes[g] != 0) continue;
      std::size_t far = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (sizes[run.labels[j]] < 2) continue;
        if (far == n || own[j] > own[far]) far = j;
      }
      if (far == n) return run;
      --sizes[run.labels[far]];
      run.labels[far] = g;
      own[far] = 0.0;
      sizes[g] = 1;
      changed = true;
    }
    if (!changed) break;
    compute_centers(rows, run.labels, k, cfg.norm, centers);
  }
  run.complete = std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  return run;
}

}  // namespace

Matrix group_centers(const Matrix& rows, const Partition& partition, Norm norm) {
  Matrix centers;
  compute_centers(rows, partition.assignment(), partition.group_count(), norm, centers);
  return centers;
}

double partition_cost(const Matrix& rows, const Partition& partition, Norm norm) {
  if (partition.size() != rows.rows()) {
    throw Error(ErrorCode::InvalidArgument, "partition size does not match the row count");
  }
  const Matrix centers = group_centers(rows, partition, norm);
  double cost = 0.0;
  for (std::size_t j = 0; j < rows.rows(); ++j) {
    cost += distance(rows.row(j), centers.row(partition.group_of(j)), norm);
  }
  return cost;
}

ClusterResult cluster_rows(const Matrix& rows, std::size_t k, const ClusterConfig& cfg) {
  const std::size_t n = rows.rows();
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, "need 1 <= K <= J");
  if (cfg.restarts < 1 || cfg.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "restarts and max_iters must be positive");
  }
  if (k == 1) {
    Partition p = Partition::from_assignment(std::vector<std::size_t>(n, 0));
    return {p, partition_cost(rows, p, cfg.norm)};
  }
  if (k == n) {
    std::vector<std::size_t> labels(n);
    for (std::size_t j = 0; j < n; ++j) labels[j] = j;
    Partition p = Partition::from_assignment(labels);
    return {p, partition_cost(rows, p, cfg.norm)};
  }
  ClusterResult best;
  bool found = false;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RngStream rng(derive_seed(cfg.seed, {r}));
    RunResult run = lloyd_run(rows, k, cfg, rng);
    if (!run.complete) continue;
    Partition p = Partition::from_assignment(run.labels);
    const double cost = partition_cost(rows, p, cfg.norm);
    if (!found || cost < best.cost) {
      best = {std::move(p), cost};
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::EmptyClusterUnrecoverable,
                "every clustering restart ended with an empty group");
  }
  return best;
}

double stirling2(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  std::vector<double> row(k + 1, 0.0);
  row[0] = 1.0;  // S(0, 0)
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = std::min(i, k); j >= 1; --j) {
      row[j] = static_cast<double>(j) * row[j] + row[j - 1];
    }
    row[0] = 0.0;
  }
  return row[k];
}

void for_each_partition(std::size_t n, std::size_t k,
                        const std::function<void(std::span<const std::size_t>)>& visit) {
  if (k == 0 || k > n) return;
  std::vector<std::size_t> labels(n, 0);
  // Depth-first over restricted-growth strings; `used` = distinct labels so far.
  auto recurse = [&](auto&& self, std::size_t pos, std::size_t used) -> void {
    if (pos == n) {
      if (used == k) visit(labels);
      return;
    }
    // Not enough positions left to open the missing groups.
    if (k - used > n - pos) return;
    const std::size_t limit = std::min(used + 1, k);
    for (std::size_t g = 0; g < limit; ++g) {
      labels[pos] = g;
      self(self, pos + 1, std::max(used, g + 1));
    }
  };
  labels[0] = 0;
  recurse(recurse, 1, 1);
}

BruteForceResult brute_force_partition(const Matrix& rows, std::size_t k, Norm norm,
                                       double limit) {
  const std::size_t n = rows.rows();
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, "need 1 <= K <= J");
  if (stirling2(n, k) > limit) {
    throw Error(ErrorCode::TooLarge, "too many partitions to enumerate");
  }
  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for_each_partition(n, k, [&](std::span<const std::size_t> labels) {
    ++best.enumerated;
    Partition p = Partition::from_assignment(labels);
    const double cost = partition_cost(rows, p, norm);
    if (cost < best.cost) {
      best.cost = cost;
      best.partition = std::move(p);
    }
  });
  return best;
}

}  // namespace curvegroups
