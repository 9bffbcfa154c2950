#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "loadwin/dtw.hpp"
#include "loadwin/errors.hpp"
#include "loadwin/ingest.hpp"

namespace loadwin {

using Profile = std::array<double, 24>;

struct ClusteringConfig {
  int k = 20;
  int max_iter = 50;
  int dba_iter = 10;
  double tol = 1e-4;  // relative inertia change that counts as converged
  std::uint64_t seed = 0;
  DtwConfig dtw;
};

/// A fitted partition of days under DTW distance. Immutable after fit.
struct ClusterModel {
  SeriesKind kind = SeriesKind::TotalLoad;
  std::vector<Profile> centroids;        // k DBA centroids
  std::vector<int> assignments;          // day index (input order) -> cluster id
  std::vector<Date> day_dates;           // aligned with assignments
  double inertia = 0.0;                  // sum of squared DTW distances to assigned centroids
  int iterations_run = 0;
  std::uint64_t seed = 0;
  ClusteringConfig config;               // echo of the fit configuration
  std::vector<double> inertia_history;   // inertia after each assign+update round
};

/// DTW barycenter averaging: aligns every member to the running average and
/// replaces each coordinate with the mean of the member values mapped onto it.
/// The objective sum(dtw(member, avg)^2) never increases across iterations.
inline Profile dba_mean(std::span<const Profile> members, const Profile& init, int iterations,
                        const DtwConfig& dtw_cfg = {}) {
  if (members.empty()) throw EmptyMembers("dba_mean: no members");
  if (iterations < 1) throw std::invalid_argument("dba_mean: iterations must be positive");

  Profile avg = init;
  for (int it = 0; it < iterations; ++it) {
    std::array<double, 24> sums{};
    std::array<std::size_t, 24> counts{};
    for (const Profile& member : members) {
      const auto [path, dist] = dtw_path(member, avg, dtw_cfg);
      for (const auto& [i, j] : path) {
        sums[j] += member[i];
        counts[j] += 1;
      }
    }
    Profile next;
    for (std::size_t j = 0; j < 24; ++j) {
      next[j] = sums[j] / static_cast<double>(counts[j]);  // path continuity covers every j
    }
    if (next == avg) break;  // fixpoint, further iterations are no-ops
    avg = next;
  }
  return avg;
}

namespace detail {

inline double l2_sq(const Profile& a, const Profile& b) {
  double s = 0.0;
  for (std::size_t h = 0; h < 24; ++h) {
    const double d = a[h] - b[h];
    s += d * d;
  }
  return s;
}

// Member closest (L2) to the arithmetic hourly mean; ties take the first.
inline Profile dba_init_profile(std::span<const Profile> members) {
  Profile mean{};
  for (const Profile& m : members) {
    for (std::size_t h = 0; h < 24; ++h) mean[h] += m[h];
  }
  for (auto& v : mean) v /= static_cast<double>(members.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double d = l2_sq(members[i], mean);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return members[best];
}

// k-means++ seeding under DTW over candidates in their given (sorted) order.
inline std::vector<Profile> seed_centroids(const std::vector<Profile>& candidates, int k,
                                           std::uint64_t seed, const DtwConfig& dtw_cfg) {
  std::mt19937_64 rng(seed);
  const std::size_t n = candidates.size();
  std::vector<Profile> centroids;
  centroids.reserve(k);
  std::vector<bool> chosen(n, false);

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  const std::size_t f = first(rng);
  centroids.push_back(candidates[f]);
  chosen[f] = true;

  std::vector<double> min_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = dtw_distance(candidates[i], centroids.back(), dtw_cfg);
    min_sq[i] = d * d;
  }
  while (centroids.size() < static_cast<std::size_t>(k)) {
    const double total = std::accumulate(min_sq.begin(), min_sq.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_sq[i];
        if (target < acc) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = n - 1;  // target landed on the accumulated rounding edge
    }
    if (pick == n || chosen[pick]) {
      // All remaining weight is on duplicates of existing centroids; take the
      // first candidate not yet used so k centroids always come back.
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
      if (pick == n) throw TooFewDays("seed_centroids: fewer candidates than k");
    }
    chosen[pick] = true;
    centroids.push_back(candidates[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dtw_distance(candidates[i], centroids.back(), dtw_cfg);
      min_sq[i] = std::min(min_sq[i], d * d);
    }
  }
  return centroids;
}

struct AssignPass {
  std::vector<int> assign;
  std::vector<double> dist;  // DTW distance to the assigned centroid
  std::vector<std::size_t> sizes;
};

inline AssignPass assign_all(const std::vector<Profile>& profiles,
                             const std::vector<Profile>& centroids, const DtwConfig& dtw_cfg) {
  AssignPass pass;
  pass.assign.resize(profiles.size());
  pass.dist.resize(profiles.size());
  pass.sizes.assign(centroids.size(), 0);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = dtw_distance(profiles[i], centroids[c], dtw_cfg);
      if (d < best_d) {  // strict: ties keep the lowest cluster id
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    pass.assign[i] = best;
    pass.dist[i] = best_d;
    pass.sizes[best] += 1;
  }
  return pass;
}

// Re-seeds each empty cluster with the worst-fit day (largest DTW distance to
// its assigned centroid) taken from a cluster that can spare it.
inline void fix_empty_clusters(const std::vector<Profile>& profiles,
                               std::vector<Profile>& centroids, AssignPass& pass) {
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (pass.sizes[c] != 0) continue;
    std::size_t donor = profiles.size();
    double worst = -1.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if (pass.sizes[pass.assign[i]] < 2) continue;
      if (pass.dist[i] > worst) {
        worst = pass.dist[i];
        donor = i;
      }
    }
    if (donor == profiles.size()) continue;  // cannot happen while n >= k
    pass.sizes[pass.assign[donor]] -= 1;
    pass.assign[donor] = static_cast<int>(c);
    pass.sizes[c] = 1;
    centroids[c] = profiles[donor];
    pass.dist[donor] = 0.0;
  }
}

}  // namespace detail

/// Partitions days into cfg.k clusters: k-means++ seeding under DTW, then
/// Lloyd rounds alternating DTW nearest-centroid assignment with DBA centroid
/// updates until the relative inertia improvement drops below cfg.tol.
///
/// All internal iteration follows the days sorted by (date, values), so the
/// fit is invariant to permutations of the input order.
inline ClusterModel cluster_days(const std::vector<DaySeries>& days, const ClusteringConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("cluster_days: k must be positive");
  if (days.size() < static_cast<std::size_t>(cfg.k)) {
    throw TooFewDays("cluster_days: " + std::to_string(days.size()) + " days < k = " +
                     std::to_string(cfg.k));
  }
  for (const auto& d : days) {
    if (d.kind != days.front().kind) {
      throw MixedSeriesKind("cluster_days: input mixes total-load and net-load days");
    }
  }

  const std::size_t n = days.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(days[a].date, days[a].values) < std::tie(days[b].date, days[b].values);
  });
  std::vector<Profile> profiles(n);
  for (std::size_t p = 0; p < n; ++p) profiles[p] = days[order[p]].values;

  std::vector<Profile> centroids = detail::seed_centroids(profiles, cfg.k, cfg.seed, cfg.dtw);

  ClusterModel model;
  model.kind = days.front().kind;
  model.seed = cfg.seed;
  model.config = cfg;

  detail::AssignPass pass;
  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int round = 1; round <= cfg.max_iter; ++round) {
    pass = detail::assign_all(profiles, centroids, cfg.dtw);
    detail::fix_empty_clusters(profiles, centroids, pass);

    for (std::size_t c = 0; c < centroids.size(); ++c) {
      std::vector<Profile> members;
      members.reserve(pass.sizes[c]);
      for (std::size_t i = 0; i < n; ++i) {
        if (pass.assign[i] == static_cast<int>(c)) members.push_back(profiles[i]);
      }
      centroids[c] = dba_mean(members, detail::dba_init_profile(members), cfg.dba_iter, cfg.dtw);
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dtw_distance(profiles[i], centroids[pass.assign[i]], cfg.dtw);
      pass.dist[i] = d;
      inertia += d * d;
    }
    model.inertia_history.push_back(inertia);
    model.iterations_run = round;

    if (inertia == 0.0) break;
    if (prev_inertia != std::numeric_limits<double>::infinity() &&
        (prev_inertia - inertia) / prev_inertia < cfg.tol) {
      break;
    }
    prev_inertia = inertia;
  }

  // Final consistency pass so every day ends on its DTW-nearest centroid.
  pass = detail::assign_all(profiles, centroids, cfg.dtw);
  if (std::find(pass.sizes.begin(), pass.sizes.end(), std::size_t{0}) != pass.sizes.end()) {
    detail::fix_empty_clusters(profiles, centroids, pass);
    pass = detail::assign_all(profiles, centroids, cfg.dtw);
  }
  model.inertia = 0.0;
  for (double d : pass.dist) model.inertia += d * d;

  model.centroids = std::move(centroids);
  model.assignments.resize(n);
  model.day_dates.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    model.assignments[order[p]] = pass.assign[p];
    model.day_dates[order[p]] = days[order[p]].date;
  }
  return model;
}

/// Nearest centroid by DTW; ties resolve to the lowest cluster id.
inline int assign_day(const DaySeries& day, const ClusterModel& model,
                      const DtwConfig& dtw_cfg = {}) {
  if (day.kind != model.kind) {
    throw MixedSeriesKind("assign_day: day kind does not match the model's training kind");
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    const double d = dtw_distance(day.values, model.centroids[c], dtw_cfg);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

/// One full fit per k (seeded with cfg.seed + k) for elbow diagnostics.
inline std::vector<std::pair<int, double>> sweep_k(const std::vector<DaySeries>& days,
                                                   const std::vector<int>& k_values,
                                                   const ClusteringConfig& cfg) {
  std::vector<std::pair<int, double>> table;
  table.reserve(k_values.size());
  for (int k : k_values) {
    ClusteringConfig run = cfg;
    run.k = k;
    run.seed = cfg.seed + static_cast<std::uint64_t>(k);
    table.emplace_back(k, cluster_days(days, run).inertia);
  }
  return table;
}

/// The member minimizing the total DTW distance to the others (--trend medoid).
inline Profile cluster_medoid(std::span<const Profile> members, const DtwConfig& dtw_cfg = {}) {
  if (members.empty()) throw EmptyMembers("cluster_medoid: no members");
  std::size_t best = 0;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (i != j) total += dtw_distance(members[i], members[j], dtw_cfg);
    }
    if (total < best_total) {
      best_total = total;
      best = i;
    }
  }
  return members[best];
}

/// Per-day z-score normalization (--normalize zscore). A constant day maps to
/// all zeros.
inline DaySeries zscore_normalize(const DaySeries& day) {
  DaySeries out = day;
  double mean = 0.0;
  for (double v : day.values) mean += v;
  mean /= 24.0;
  double var = 0.0;
  for (double v : day.values) var += (v - mean) * (v - mean);
  var /= 24.0;
  const double sd = std::sqrt(var);
  for (auto& v : out.values) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

}  // namespace loadwin
