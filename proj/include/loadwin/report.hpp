#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "loadwin/clustering.hpp"
#include "loadwin/errors.hpp"
#include "loadwin/ingest.hpp"
#include "loadwin/thresholds.hpp"
#include "loadwin/version.hpp"
#include "loadwin/windows.hpp"

namespace loadwin {

using json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

/// Fixed 6-decimal float formatting used in every serialized artifact, so
/// reports and plot CSVs are byte-stable across runs.
inline std::string format_fixed(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 into +0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

/// Canonical JSON: keys sorted (nlohmann objects already iterate sorted),
/// 2-space indentation, floats always rendered with 6 decimal places.
inline void canonical_dump_to(const json& j, std::string& out, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += json(key).dump();
        out += ": ";
        canonical_dump_to(value, out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        canonical_dump_to(value, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_fixed(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

inline std::string canonical_dump(const json& j) {
  std::string out;
  canonical_dump_to(j, out, 0);
  out += "\n";
  return out;
}

struct ReportMeta {
  std::string tool = std::string(kToolName) + " " + kToolVersion;
  SeriesKind kind = SeriesKind::TotalLoad;
  Date span_start, span_end;
  std::size_t day_count = 0;
  std::size_t rejected_days = 0;
  json config = json::object();  // echo of the run flags
};

struct ClusterReport {
  int id = 0;
  std::vector<Date> member_dates;  // ascending
  Profile trend{};
  ThresholdPair thresholds;
  WindowPlan plan;
};

struct ReportDiagnostics {
  double inertia = 0.0;
  int iterations = 0;
  std::vector<std::pair<int, double>> sweep;  // optional k -> inertia table
};

struct Report {
  int schema_version = kReportSchemaVersion;
  ReportMeta meta;
  ClusterModel model;
  std::vector<ClusterReport> clusters;
  ReportDiagnostics diagnostics;
};

/// Assembles the full pipeline output and enforces its cross-consistency:
/// one entry per cluster, every day in exactly one cluster.
inline Report build_report(const ClusterModel& model, const std::vector<Profile>& trends,
                           const std::vector<ThresholdPair>& thresholds,
                           const std::vector<WindowPlan>& plans, ReportDiagnostics diagnostics,
                           ReportMeta meta) {
  const std::size_t k = model.centroids.size();
  if (trends.size() != k || thresholds.size() != k || plans.size() != k) {
    throw InconsistentClusterIds("build_report: per-cluster inputs disagree on cluster count");
  }

  Report report;
  report.meta = std::move(meta);
  report.model = model;
  report.diagnostics = std::move(diagnostics);
  report.clusters.resize(k);

  std::set<Date> seen;
  for (std::size_t i = 0; i < model.assignments.size(); ++i) {
    const int c = model.assignments[i];
    if (c < 0 || static_cast<std::size_t>(c) >= k) {
      throw InconsistentClusterIds("build_report: assignment to unknown cluster " +
                                   std::to_string(c));
    }
    if (!seen.insert(model.day_dates[i]).second) {
      throw InconsistentClusterIds("build_report: date " + format_date(model.day_dates[i]) +
                                   " appears more than once");
    }
    report.clusters[c].member_dates.push_back(model.day_dates[i]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto& cluster = report.clusters[c];
    cluster.id = static_cast<int>(c);
    std::sort(cluster.member_dates.begin(), cluster.member_dates.end());
    cluster.trend = trends[c];
    cluster.thresholds = thresholds[c];
    cluster.plan = plans[c];
  }
  report.meta.day_count = model.assignments.size();
  return report;
}

// ---- JSON conversions -------------------------------------------------

inline json to_json(const HourWindow& w) {
  return {{"start", w.start}, {"end", w.end}, {"wraps_midnight", w.wraps_midnight}};
}

inline json to_json(const WindowPlan& plan) {
  json labels = json::array();
  for (const auto l : plan.labels) labels.push_back(std::string(to_string(l)));
  json charge = json::array(), v2g = json::array();
  for (const auto& w : plan.charge_windows) charge.push_back(to_json(w));
  for (const auto& w : plan.v2g_windows) v2g.push_back(to_json(w));
  return {{"labels", labels}, {"charge_windows", charge}, {"v2g_windows", v2g}};
}

inline json to_json(const ThresholdPair& thr) {
  return {{"green", thr.green},
          {"red", thr.red},
          {"centroids", thr.centroids},
          {"degenerate", thr.degenerate}};
}

inline json to_json(const ClusterModel& model) {
  json assignments = json::object();
  for (std::size_t i = 0; i < model.assignments.size(); ++i) {
    assignments[format_date(model.day_dates[i])] = model.assignments[i];
  }
  json centroids = json::array();
  for (const auto& c : model.centroids) centroids.push_back(c);
  const json config = {{"k", model.config.k},
                       {"max_iter", model.config.max_iter},
                       {"dba_iter", model.config.dba_iter},
                       {"tol", model.config.tol},
                       {"band_radius", model.config.dtw.band_radius
                                           ? json(*model.config.dtw.band_radius)
                                           : json(nullptr)}};
  return {{"version", kReportSchemaVersion},
          {"kind", std::string(to_string(model.kind))},
          {"centroids", centroids},
          {"assignments", assignments},
          {"config", config},
          {"inertia", model.inertia},
          {"iterations_run", model.iterations_run},
          {"seed", model.seed}};
}

inline json to_json(const Report& report) {
  json clusters = json::array();
  for (const auto& c : report.clusters) {
    json dates = json::array();
    for (const auto& d : c.member_dates) dates.push_back(format_date(d));
    clusters.push_back({{"id", c.id},
                        {"member_dates", dates},
                        {"size", c.member_dates.size()},
                        {"trend", c.trend},
                        {"thresholds", to_json(c.thresholds)},
                        {"plan", to_json(c.plan)}});
  }
  json diagnostics = {{"inertia", report.diagnostics.inertia},
                      {"iterations", report.diagnostics.iterations}};
  if (!report.diagnostics.sweep.empty()) {
    json sweep = json::array();
    for (const auto& [k, inertia] : report.diagnostics.sweep) {
      sweep.push_back({{"k", k}, {"inertia", inertia}});
    }
    diagnostics["sweep"] = sweep;
  }
  return {{"schema_version", report.schema_version},
          {"meta",
           {{"tool", report.meta.tool},
            {"kind", std::string(to_string(report.meta.kind))},
            {"span_start", format_date(report.meta.span_start)},
            {"span_end", format_date(report.meta.span_end)},
            {"day_count", report.meta.day_count},
            {"rejected_days", report.meta.rejected_days},
            {"config", report.meta.config}}},
          {"model", to_json(report.model)},
          {"clusters", clusters},
          {"diagnostics", diagnostics}};
}

namespace detail {

inline Date parse_date_or_throw(const std::string& s) {
  const auto d = parse_date(s);
  if (!d) throw Error("bad date string '" + s + "'");
  return *d;
}

inline SeriesKind kind_from_string(const std::string& s) {
  if (s == "total_load") return SeriesKind::TotalLoad;
  if (s == "net_load") return SeriesKind::NetLoad;
  throw Error("unknown series kind '" + s + "'");
}

inline HourLabel label_from_string(const std::string& s) {
  if (s == "charge") return HourLabel::Charge;
  if (s == "v2g") return HourLabel::V2G;
  if (s == "neutral") return HourLabel::Neutral;
  throw Error("unknown hour label '" + s + "'");
}

inline HourWindow window_from_json(const json& j) {
  return {j.at("start").get<int>(), j.at("end").get<int>(), j.at("wraps_midnight").get<bool>()};
}

inline Profile profile_from_json(const json& j) {
  if (!j.is_array() || j.size() != 24) throw Error("profile must hold exactly 24 values");
  Profile p{};
  for (std::size_t h = 0; h < 24; ++h) p[h] = j[h].get<double>();
  return p;
}

}  // namespace detail

inline Report report_from_json(const json& j) {
  Report report;
  report.schema_version = j.at("schema_version").get<int>();
  if (report.schema_version != kReportSchemaVersion) {
    throw Error("unsupported report schema_version " + std::to_string(report.schema_version));
  }
  const auto& meta = j.at("meta");
  report.meta.tool = meta.at("tool").get<std::string>();
  report.meta.kind = detail::kind_from_string(meta.at("kind").get<std::string>());
  report.meta.span_start = detail::parse_date_or_throw(meta.at("span_start").get<std::string>());
  report.meta.span_end = detail::parse_date_or_throw(meta.at("span_end").get<std::string>());
  report.meta.day_count = meta.at("day_count").get<std::size_t>();
  report.meta.rejected_days = meta.at("rejected_days").get<std::size_t>();
  report.meta.config = meta.at("config");

  const auto& model = j.at("model");
  report.model.kind = detail::kind_from_string(model.at("kind").get<std::string>());
  for (const auto& c : model.at("centroids")) {
    report.model.centroids.push_back(detail::profile_from_json(c));
  }
  for (const auto& [date, cid] : model.at("assignments").items()) {
    report.model.day_dates.push_back(detail::parse_date_or_throw(date));
    report.model.assignments.push_back(cid.get<int>());
  }
  report.model.inertia = model.at("inertia").get<double>();
  report.model.iterations_run = model.at("iterations_run").get<int>();
  report.model.seed = model.at("seed").get<std::uint64_t>();
  const auto& mcfg = model.at("config");
  report.model.config.k = mcfg.at("k").get<int>();
  report.model.config.max_iter = mcfg.at("max_iter").get<int>();
  report.model.config.dba_iter = mcfg.at("dba_iter").get<int>();
  report.model.config.tol = mcfg.at("tol").get<double>();
  report.model.config.seed = report.model.seed;
  if (!mcfg.at("band_radius").is_null()) {
    report.model.config.dtw.band_radius = mcfg.at("band_radius").get<int>();
  }

  for (const auto& c : j.at("clusters")) {
    ClusterReport cluster;
    cluster.id = c.at("id").get<int>();
    for (const auto& d : c.at("member_dates")) {
      cluster.member_dates.push_back(detail::parse_date_or_throw(d.get<std::string>()));
    }
    cluster.trend = detail::profile_from_json(c.at("trend"));
    const auto& thr = c.at("thresholds");
    cluster.thresholds.green = thr.at("green").get<double>();
    cluster.thresholds.red = thr.at("red").get<double>();
    cluster.thresholds.degenerate = thr.at("degenerate").get<bool>();
    cluster.thresholds.centroids = thr.at("centroids").get<std::vector<double>>();
    const auto& plan = c.at("plan");
    const auto& labels = plan.at("labels");
    if (!labels.is_array() || labels.size() != 24) throw Error("plan must hold 24 labels");
    for (std::size_t h = 0; h < 24; ++h) {
      cluster.plan.labels[h] = detail::label_from_string(labels[h].get<std::string>());
    }
    for (const auto& w : plan.at("charge_windows")) {
      cluster.plan.charge_windows.push_back(detail::window_from_json(w));
    }
    for (const auto& w : plan.at("v2g_windows")) {
      cluster.plan.v2g_windows.push_back(detail::window_from_json(w));
    }
    report.clusters.push_back(std::move(cluster));
  }

  const auto& diag = j.at("diagnostics");
  report.diagnostics.inertia = diag.at("inertia").get<double>();
  report.diagnostics.iterations = diag.at("iterations").get<int>();
  if (diag.contains("sweep")) {
    for (const auto& row : diag.at("sweep")) {
      report.diagnostics.sweep.emplace_back(row.at("k").get<int>(),
                                            row.at("inertia").get<double>());
    }
  }
  return report;
}

// ---- File emission -----------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

/// Writes per-cluster plot CSVs (hour, trend, thresholds, label) plus the flat
/// labels.csv export. Returns the written paths.
inline std::vector<std::filesystem::path> emit_plot_data(const Report& report,
                                                         const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> paths;
  for (const auto& cluster : report.clusters) {
    std::string csv = "hour,trend_mw,green_mw,red_mw,label\n";
    for (std::size_t h = 0; h < 24; ++h) {
      csv += std::to_string(h) + "," + format_fixed(cluster.trend[h]) + "," +
             format_fixed(cluster.thresholds.green) + "," + format_fixed(cluster.thresholds.red) +
             "," + std::string(to_string(cluster.plan.labels[h])) + "\n";
    }
    const auto path = out_dir / ("cluster_" + std::to_string(cluster.id) + ".csv");
    write_text_file(path, csv);
    paths.push_back(path);
  }

  std::string labels = "cluster,hour,label\n";
  for (const auto& cluster : report.clusters) {
    for (std::size_t h = 0; h < 24; ++h) {
      labels += std::to_string(cluster.id) + "," + std::to_string(h) + "," +
                std::string(to_string(cluster.plan.labels[h])) + "\n";
    }
  }
  const auto labels_path = out_dir / "labels.csv";
  write_text_file(labels_path, labels);
  paths.push_back(labels_path);
  return paths;
}

/// DatasetDiagnostics JSON form (used by the validate command).
inline json to_json(const DatasetDiagnostics& diag) {
  json gaps = json::array();
  for (const auto& d : diag.gaps) gaps.push_back(format_date(d));
  return {{"day_count", diag.day_count},
          {"repaired_count", diag.repaired_count},
          {"span_start", format_date(diag.span_start)},
          {"span_end", format_date(diag.span_end)},
          {"gaps", gaps},
          {"hour_min", diag.hour_min},
          {"hour_max", diag.hour_max},
          {"hour_mean", diag.hour_mean}};
}

}  // namespace loadwin
