#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "loadwin/errors.hpp"

namespace loadwin {

/// Options for a DTW computation. The local cost is the squared difference;
/// the reported distance is the square root of the accumulated minimum.
struct DtwConfig {
  /// Sakoe-Chiba band half-width |i - j| <= band_radius. Absent = unconstrained.
  /// Must be >= |n - m| for sequences of lengths n and m.
  std::optional<int> band_radius;
};

/// Warping path as 0-based index pairs (i into x, j into y), from (0,0)
/// to (n-1,m-1), each step advancing i, j, or both by one.
using AlignmentPath = std::vector<std::pair<std::size_t, std::size_t>>;

namespace detail {

inline void check_dtw_args(std::span<const double> x, std::span<const double> y,
                           const DtwConfig& cfg) {
  if (x.empty() || y.empty()) {
    throw EmptySequence("dtw: input sequences must be non-empty");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("dtw: non-finite value in first sequence");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("dtw: non-finite value in second sequence");
  }
  if (cfg.band_radius) {
    if (*cfg.band_radius < 0) {
      throw std::invalid_argument("dtw: band_radius must be non-negative");
    }
    const auto diff = x.size() > y.size() ? x.size() - y.size() : y.size() - x.size();
    if (static_cast<std::size_t>(*cfg.band_radius) < diff) {
      throw BandTooNarrow("dtw: band_radius " + std::to_string(*cfg.band_radius) +
                          " < length difference " + std::to_string(diff));
    }
  }
}

inline std::size_t band_lo(std::size_t i, std::size_t r) { return i > r ? i - r : 0; }

inline std::size_t band_hi(std::size_t i, std::size_t r, std::size_t m) {
  const std::size_t hi = i + r;  // r is capped to m upstream, no overflow concern
  return hi < m - 1 ? hi : m - 1;
}

}  // namespace detail

/// DTW distance under the symmetric step pattern {(1,0),(0,1),(1,1)}.
/// Two-row dynamic program, O(n*m) time and O(min(n,m)) space.
inline double dtw_distance(std::span<const double> x, std::span<const double> y,
                           const DtwConfig& cfg = {}) {
  detail::check_dtw_args(x, y, cfg);
  // Keep the row buffer on the shorter sequence. Cost and band are symmetric,
  // so the accumulated minimum is unchanged.
  if (y.size() > x.size()) std::swap(x, y);

  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t r = cfg.band_radius ? std::min<std::size_t>(*cfg.band_radius, n + m) : n + m;
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> prev(m, inf), cur(m, inf);
  const auto sq = [](double a) { return a * a; };

  prev[0] = sq(x[0] - y[0]);
  for (std::size_t j = 1; j <= detail::band_hi(0, r, m); ++j) {
    prev[j] = prev[j - 1] + sq(x[0] - y[j]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t lo = detail::band_lo(i, r);
    const std::size_t hi = detail::band_hi(i, r, m);
    for (std::size_t j = lo; j <= hi; ++j) {
      double best = prev[j];  // advance i
      if (j > 0) {
        best = std::min(best, prev[j - 1]);       // diagonal
        if (j > lo) best = std::min(best, cur[j - 1]);  // advance j
      }
      cur[j] = sq(x[i] - y[j]) + best;
    }
    std::swap(prev, cur);
  }
  return std::sqrt(prev[m - 1]);
}

/// DTW with path recovery. Keeps the full accumulated-cost matrix.
/// Ties in backtracking prefer the diagonal step, then the step advancing i.
inline std::pair<AlignmentPath, double> dtw_path(std::span<const double> x,
                                                 std::span<const double> y,
                                                 const DtwConfig& cfg = {}) {
  detail::check_dtw_args(x, y, cfg);
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t r = cfg.band_radius ? std::min<std::size_t>(*cfg.band_radius, n + m) : n + m;
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> acc(n * m, inf);
  const auto at = [&acc, m](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  const auto sq = [](double a) { return a * a; };

  at(0, 0) = sq(x[0] - y[0]);
  for (std::size_t j = 1; j <= detail::band_hi(0, r, m); ++j) {
    at(0, j) = at(0, j - 1) + sq(x[0] - y[j]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t lo = detail::band_lo(i, r);
    const std::size_t hi = detail::band_hi(i, r, m);
    for (std::size_t j = lo; j <= hi; ++j) {
      double best = at(i - 1, j);
      if (j > 0) best = std::min({best, at(i - 1, j - 1), at(i, j - 1)});
      at(i, j) = sq(x[i] - y[j]) + best;
    }
  }

  AlignmentPath path;
  path.reserve(n + m);
  std::size_t i = n - 1, j = m - 1;
  path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    const double diag = (i > 0 && j > 0) ? at(i - 1, j - 1) : inf;
    const double up = i > 0 ? at(i - 1, j) : inf;
    const double left = j > 0 ? at(i, j - 1) : inf;
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    path.emplace_back(i, j);
  }
  std::reverse(path.begin(), path.end());
  return {std::move(path), std::sqrt(at(n - 1, m - 1))};
}

}  // namespace loadwin
