#pragma once

#include <array>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "loadwin/clustering.hpp"
#include "loadwin/errors.hpp"
#include "loadwin/thresholds.hpp"

namespace loadwin {

enum class HourLabel { Charge, Neutral, V2G };

inline std::string_view to_string(HourLabel l) {
  switch (l) {
    case HourLabel::Charge: return "charge";
    case HourLabel::V2G: return "v2g";
    default: return "neutral";
  }
}

using HourLabels = std::array<HourLabel, 24>;

/// Half-open hour interval [start, end). A window that wraps midnight has
/// end < start and covers [start, 24) then [0, end).
struct HourWindow {
  int start = 0;
  int end = 0;
  bool wraps_midnight = false;

  friend bool operator==(const HourWindow&, const HourWindow&) = default;
};

struct WindowPlan {
  HourLabels labels{};
  std::vector<HourWindow> charge_windows;
  std::vector<HourWindow> v2g_windows;
};

/// Trend below green -> Charge, above red -> V2G, otherwise Neutral. Exact
/// equality with either threshold is Neutral, and a degenerate threshold pair
/// marks the whole day Neutral.
inline HourLabels label_hours(const Profile& trend, const ThresholdPair& thr) {
  if (thr.green > thr.red) throw std::invalid_argument("label_hours: green must not exceed red");
  HourLabels labels{};
  for (std::size_t h = 0; h < 24; ++h) {
    if (thr.degenerate) {
      labels[h] = HourLabel::Neutral;
    } else if (trend[h] < thr.green) {
      labels[h] = HourLabel::Charge;
    } else if (trend[h] > thr.red) {
      labels[h] = HourLabel::V2G;
    } else {
      labels[h] = HourLabel::Neutral;
    }
  }
  return labels;
}

/// Maximal runs of equal non-Neutral labels become windows. When merge_wrap is
/// set, a run ending at hour 23 joins a same-label run starting at hour 0 into
/// one window across midnight.
inline WindowPlan extract_windows(const HourLabels& labels, bool merge_wrap = true) {
  WindowPlan plan;
  plan.labels = labels;

  auto windows_for = [&](HourLabel target) {
    std::vector<HourWindow> out;
    int h = 0;
    while (h < 24) {
      if (labels[h] != target) {
        ++h;
        continue;
      }
      int end = h;
      while (end < 24 && labels[end] == target) ++end;
      out.push_back({h, end, false});
      h = end;
    }
    if (merge_wrap && out.size() >= 2 && out.front().start == 0 && out.back().end == 24) {
      HourWindow merged{out.back().start, out.front().end, true};
      out.erase(out.begin());
      out.pop_back();
      out.push_back(merged);
    }
    return out;
  };
  plan.charge_windows = windows_for(HourLabel::Charge);
  plan.v2g_windows = windows_for(HourLabel::V2G);
  return plan;
}

/// Classifies the day onto the model and returns the assigned cluster's plan,
/// built from that cluster's centroid trend and thresholds.
inline std::pair<int, WindowPlan> plan_for_day(const DaySeries& day, const ClusterModel& model,
                                               const std::vector<ThresholdPair>& thresholds,
                                               const DtwConfig& dtw_cfg = {},
                                               bool merge_wrap = true) {
  if (thresholds.size() != model.centroids.size()) {
    throw InconsistentClusterIds("plan_for_day: thresholds count does not match cluster count");
  }
  const int c = assign_day(day, model, dtw_cfg);
  const auto labels = label_hours(model.centroids[c], thresholds[c]);
  return {c, extract_windows(labels, merge_wrap)};
}

}  // namespace loadwin
