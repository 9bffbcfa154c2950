#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "loadwin/errors.hpp"

namespace loadwin {

/// Result of exact 1-D k-means. Cluster ids are ordered by ascending centroid.
struct Kmeans1dResult {
  std::vector<double> centroids;  // ascending
  std::vector<int> assignment;    // value index (input order) -> cluster id
  double cost = 0.0;              // within-cluster sum of squared deviations
  bool degenerate = false;        // fewer distinct values than k
};

/// Green (charge) and red (V2G) levels for one cluster, MW.
struct ThresholdPair {
  double green = 0.0;
  double red = 0.0;
  std::vector<double> centroids;  // the sorted 1-D k-means centroids
  bool degenerate = false;
};

namespace detail {

// O(1) range SSE over the sorted values via prefix sums.
class RangeSse {
 public:
  explicit RangeSse(const std::vector<double>& sorted) {
    sum_.resize(sorted.size() + 1, 0.0);
    sum2_.resize(sorted.size() + 1, 0.0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      sum_[i + 1] = sum_[i] + sorted[i];
      sum2_[i + 1] = sum2_[i] + sorted[i] * sorted[i];
    }
  }
  // SSE of values[i..j] inclusive about their mean.
  double operator()(std::size_t i, std::size_t j) const {
    const double cnt = static_cast<double>(j - i + 1);
    const double s = sum_[j + 1] - sum_[i];
    const double s2 = sum2_[j + 1] - sum2_[i];
    const double sse = s2 - (s * s) / cnt;
    return sse > 0.0 ? sse : 0.0;
  }
  double mean(std::size_t i, std::size_t j) const {
    return (sum_[j + 1] - sum_[i]) / static_cast<double>(j - i + 1);
  }

 private:
  std::vector<double> sum_, sum2_;
};

}  // namespace detail

/// Globally optimal 1-D k-means by dynamic programming over the sorted values
/// (optimal 1-D clusters are contiguous in sorted order). O(k n^2) with O(1)
/// per-range cost; ties resolved toward the smallest split index.
///
/// Fewer distinct values than k takes the degenerate path: the distinct values
/// become the centroids and `degenerate` is set.
inline Kmeans1dResult kmeans_1d_exact(std::span<const double> values, int k) {
  if (values.empty()) throw EmptyValues("kmeans_1d_exact: no values");
  if (k <= 0) throw std::invalid_argument("kmeans_1d_exact: k must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("kmeans_1d_exact: non-finite value");
  }

  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sorted(n);
  for (std::size_t p = 0; p < n; ++p) sorted[p] = values[idx[p]];

  std::vector<double> distinct;
  for (double v : sorted) {
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  }

  Kmeans1dResult res;
  res.assignment.resize(n);

  if (distinct.size() < static_cast<std::size_t>(k)) {
    res.centroids = distinct;
    res.degenerate = true;
    for (std::size_t p = 0; p < n; ++p) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), sorted[p]);
      res.assignment[idx[p]] = static_cast<int>(it - distinct.begin());
    }
    return res;
  }

  const auto K = static_cast<std::size_t>(k);
  const detail::RangeSse sse(sorted);

  // best[c][i]: optimal cost of splitting sorted[0..i] into c+1 clusters.
  std::vector<std::vector<double>> best(K, std::vector<double>(n));
  std::vector<std::vector<std::size_t>> split(K, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    best[0][i] = sse(0, i);
    split[0][i] = 0;
  }
  for (std::size_t c = 1; c < K; ++c) {
    for (std::size_t i = c; i < n; ++i) {
      double b = std::numeric_limits<double>::infinity();
      std::size_t bt = c;
      for (std::size_t t = c; t <= i; ++t) {  // cluster c covers sorted[t..i]
        const double cand = best[c - 1][t - 1] + sse(t, i);
        if (cand < b) {
          b = cand;
          bt = t;
        }
      }
      best[c][i] = b;
      split[c][i] = bt;
    }
  }

  res.cost = best[K - 1][n - 1];
  res.centroids.resize(K);
  std::size_t end = n - 1;
  for (std::size_t c = K; c-- > 0;) {
    const std::size_t start = split[c][end];
    res.centroids[c] = sse.mean(start, end);
    for (std::size_t p = start; p <= end; ++p) {
      res.assignment[idx[p]] = static_cast<int>(c);
    }
    if (c > 0) end = start - 1;
  }
  return res;
}

/// Derives the charge/V2G levels from a representative trend: 3-cluster exact
/// 1-D k-means, thresholds at the centroid midpoints (the k-means decision
/// boundaries). Fewer than 3 distinct values collapses both levels onto a
/// single one.
inline ThresholdPair derive_thresholds(std::span<const double> trend) {
  const auto km = kmeans_1d_exact(trend, 3);
  ThresholdPair thr;
  thr.centroids = km.centroids;
  thr.degenerate = km.degenerate;
  if (km.degenerate) {
    const double level = km.centroids.size() == 1
                             ? km.centroids[0]
                             : 0.5 * (km.centroids[0] + km.centroids[1]);
    thr.green = level;
    thr.red = level;
  } else {
    thr.green = 0.5 * (km.centroids[0] + km.centroids[1]);
    thr.red = 0.5 * (km.centroids[1] + km.centroids[2]);
  }
  return thr;
}

}  // namespace loadwin
