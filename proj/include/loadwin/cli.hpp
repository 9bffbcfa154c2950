#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "loadwin/clustering.hpp"
#include "loadwin/errors.hpp"
#include "loadwin/ingest.hpp"
#include "loadwin/report.hpp"
#include "loadwin/thresholds.hpp"
#include "loadwin/version.hpp"
#include "loadwin/windows.hpp"

namespace loadwin::cli {

// Exit-code contract, fixed for scripting:
//   0 ok, 1 input error, 2 config/data-size error, 3 lookup miss.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNotFound = 3;

namespace detail {

struct DatasetArgs {
  std::vector<std::string> inputs;
  CsvSchema schema;
  int max_missing = 2;
};

inline void add_dataset_options(CLI::App& cmd, DatasetArgs& args) {
  cmd.add_option("-i,--input", args.inputs, "Input CSV file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd.add_option("--col-ts", args.schema.timestamp_col, "Timestamp column name")
      ->capture_default_str();
  cmd.add_option("--col-load", args.schema.load_col, "Load column name")->capture_default_str();
  cmd.add_option("--col-renewable", args.schema.renewable_cols,
                 "Renewable generation column name (repeatable)");
  cmd.add_option("--max-missing", args.max_missing,
                 "Most missing hours a day may have and still be repaired")
      ->capture_default_str();
}

inline std::vector<HourlyRecord> load_records(const DatasetArgs& args) {
  std::vector<HourlyRecord> all;
  for (const auto& path : args.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    auto records = parse_hourly_csv(in, args.schema);
    all.insert(all.end(), std::make_move_iterator(records.begin()),
               std::make_move_iterator(records.end()));
  }
  std::stable_sort(all.begin(), all.end(), [](const HourlyRecord& a, const HourlyRecord& b) {
    return std::tie(a.date, a.hour) < std::tie(b.date, b.hour);
  });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].date == all[i - 1].date && all[i].hour == all[i - 1].hour) {
      throw DuplicateTimestamp("duplicate timestamp " + format_date(all[i].date) + " hour " +
                               std::to_string(all[i].hour) + " across input files");
    }
  }
  return all;
}

struct FitArgs {
  DatasetArgs dataset;
  std::string kind = "total";
  int k = 20;
  std::uint64_t seed = 0;
  std::optional<int> band;
  std::string normalize = "none";
  std::string trend = "dba";
  std::string threshold_source = "trend";
  std::string out_dir = "out";
  int max_iter = 50;
  int dba_iter = 10;
  double tol = 1e-4;
  bool no_wrap = false;

  SeriesKind series_kind() const {
    return kind == "net" ? SeriesKind::NetLoad : SeriesKind::TotalLoad;
  }
  ClusteringConfig clustering_config() const {
    ClusteringConfig cfg;
    cfg.k = k;
    cfg.max_iter = max_iter;
    cfg.dba_iter = dba_iter;
    cfg.tol = tol;
    cfg.seed = seed;
    cfg.dtw.band_radius = band;
    return cfg;
  }
};

inline void add_fit_options(CLI::App& cmd, FitArgs& args, bool with_k) {
  add_dataset_options(cmd, args.dataset);
  cmd.add_option("--kind", args.kind, "Profile kind: total load or net load")
      ->check(CLI::IsMember({"total", "net"}))
      ->capture_default_str();
  if (with_k) {
    cmd.add_option("-k,--k", args.k, "Number of clusters")->capture_default_str();
  }
  cmd.add_option("--seed", args.seed, "Seed for all randomness")->capture_default_str();
  cmd.add_option("--band", args.band, "Sakoe-Chiba band half-width (default: unconstrained)");
  cmd.add_option("--normalize", args.normalize, "Per-day normalization before clustering")
      ->check(CLI::IsMember({"none", "zscore"}))
      ->capture_default_str();
  cmd.add_option("--max-iter", args.max_iter, "Max Lloyd rounds")->capture_default_str();
  cmd.add_option("--dba-iter", args.dba_iter, "Barycenter-averaging iterations per update")
      ->capture_default_str();
  cmd.add_option("--tol", args.tol, "Relative inertia improvement treated as converged")
      ->capture_default_str();
}

inline std::vector<DaySeries> prepare_days(const FitArgs& args, AssembleResult& assembled,
                                           std::ostream& err) {
  const auto records = load_records(args.dataset);
  assembled =
      assemble_days(records, args.series_kind(), RepairPolicy{args.dataset.max_missing});
  for (const auto& reject : assembled.rejects) {
    err << "rejected " << format_date(reject.date) << ": " << reject.reason << "\n";
  }
  if (args.normalize == "zscore") {
    for (auto& day : assembled.days) day = zscore_normalize(day);
  }
  return assembled.days;
}

inline json config_echo(const FitArgs& args, bool wrap) {
  json cols = json::array();
  for (const auto& c : args.dataset.schema.renewable_cols) cols.push_back(c);
  return {{"k", args.k},
          {"seed", args.seed},
          {"band_radius", args.band ? json(*args.band) : json(nullptr)},
          {"normalize", args.normalize},
          {"trend", args.trend},
          {"threshold_source", args.threshold_source},
          {"max_iter", args.max_iter},
          {"dba_iter", args.dba_iter},
          {"tol", args.tol},
          {"wrap_midnight", wrap},
          {"max_missing_hours", args.dataset.max_missing},
          {"col_ts", args.dataset.schema.timestamp_col},
          {"col_load", args.dataset.schema.load_col},
          {"col_renewable", cols}};
}

inline std::optional<Profile> parse_profile_arg(const std::string& arg) {
  std::string text = arg;
  if (std::filesystem::exists(arg)) {
    std::ifstream in(arg, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  for (auto& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  }
  std::istringstream in(text);
  std::vector<double> values;
  double v{};
  while (in >> v) values.push_back(v);
  if (!in.eof()) return std::nullopt;  // trailing non-numeric junk
  if (values.size() != 24) return std::nullopt;
  Profile p{};
  for (std::size_t h = 0; h < 24; ++h) {
    if (!std::isfinite(values[h])) return std::nullopt;
    p[h] = values[h];
  }
  return p;
}

inline int cmd_validate(const DatasetArgs& args, std::ostream& out) {
  const auto records = load_records(args);
  const auto assembled =
      assemble_days(records, SeriesKind::TotalLoad, RepairPolicy{args.max_missing});
  json rejects = json::array();
  for (const auto& r : assembled.rejects) {
    rejects.push_back({{"date", format_date(r.date)}, {"reason", r.reason}});
  }
  json doc = {{"rejects", rejects}};
  if (!assembled.days.empty()) {
    doc["diagnostics"] = to_json(validate_dataset(assembled.days));
  }
  out << canonical_dump(doc);
  return assembled.rejects.empty() && !assembled.days.empty() ? kExitOk : kExitInput;
}

inline int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  AssembleResult assembled;
  const auto days = prepare_days(args, assembled, err);
  const bool wrap = !args.no_wrap;

  const auto model = cluster_days(days, args.clustering_config());
  const std::size_t k = model.centroids.size();

  std::vector<std::vector<Profile>> members(k);
  for (std::size_t i = 0; i < days.size(); ++i) {
    members[model.assignments[i]].push_back(days[i].values);
  }

  std::vector<Profile> trends(k);
  for (std::size_t c = 0; c < k; ++c) {
    trends[c] =
        args.trend == "medoid" ? cluster_medoid(members[c], DtwConfig{args.band}) : model.centroids[c];
  }

  std::vector<ThresholdPair> thresholds(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (args.threshold_source == "members") {
      std::vector<double> pooled;
      pooled.reserve(members[c].size() * 24);
      for (const auto& m : members[c]) pooled.insert(pooled.end(), m.begin(), m.end());
      thresholds[c] = derive_thresholds(pooled);
    } else {
      thresholds[c] = derive_thresholds(trends[c]);
    }
  }

  std::vector<WindowPlan> plans(k);
  for (std::size_t c = 0; c < k; ++c) {
    plans[c] = extract_windows(label_hours(trends[c], thresholds[c]), wrap);
  }

  ReportMeta meta;
  meta.kind = model.kind;
  meta.span_start = *std::min_element(model.day_dates.begin(), model.day_dates.end());
  meta.span_end = *std::max_element(model.day_dates.begin(), model.day_dates.end());
  meta.rejected_days = assembled.rejects.size();
  meta.config = config_echo(args, wrap);

  ReportDiagnostics diagnostics;
  diagnostics.inertia = model.inertia;
  diagnostics.iterations = model.iterations_run;

  const auto report = build_report(model, trends, thresholds, plans, diagnostics, meta);

  const std::filesystem::path out_dir(args.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());
  const auto report_path = out_dir / "report.json";
  write_text_file(report_path, canonical_dump(to_json(report)));
  emit_plot_data(report, out_dir);

  out << canonical_dump(json{{"report", report_path.string()},
                             {"clusters", k},
                             {"days", days.size()},
                             {"rejected_days", assembled.rejects.size()},
                             {"inertia", model.inertia},
                             {"iterations", model.iterations_run}});
  return kExitOk;
}

inline int cmd_sweep(const FitArgs& args, int k_min, int k_max, std::ostream& out,
                     std::ostream& err) {
  if (k_min < 1 || k_min > k_max) {
    err << "sweep: require 1 <= k-min <= k-max\n";
    return kExitConfig;
  }
  AssembleResult assembled;
  const auto days = prepare_days(args, assembled, err);
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k) ks.push_back(k);
  const auto table = sweep_k(days, ks, args.clustering_config());
  out << "k,inertia\n";
  for (const auto& [k, inertia] : table) {
    out << k << "," << format_fixed(inertia) << "\n";
  }
  return kExitOk;
}

inline int cmd_plan(const std::string& report_path, const std::string& date_arg,
                    const std::string& profile_arg, std::ostream& out, std::ostream& err) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + report_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("cannot parse " + report_path + ": " + e.what());
  }
  const Report report = report_from_json(doc);

  int cluster = -1;
  json result;
  if (!date_arg.empty()) {
    const auto date = parse_date(date_arg);
    if (!date) {
      err << "plan: bad date '" << date_arg << "'\n";
      return kExitInput;
    }
    for (std::size_t i = 0; i < report.model.day_dates.size(); ++i) {
      if (report.model.day_dates[i] == *date) {
        cluster = report.model.assignments[i];
        break;
      }
    }
    if (cluster < 0) {
      err << "plan: date " << date_arg << " not in report\n";
      return kExitNotFound;
    }
    result["date"] = date_arg;
  } else {
    const auto profile = parse_profile_arg(profile_arg);
    if (!profile) {
      err << "plan: profile must supply exactly 24 finite values\n";
      return kExitInput;
    }
    DaySeries day;
    day.kind = report.meta.kind;
    day.values = *profile;
    if (report.meta.config.value("normalize", "none") == std::string("zscore")) {
      day = zscore_normalize(day);
    }
    cluster = assign_day(day, report.model, report.model.config.dtw);
  }

  result["cluster"] = cluster;
  result["plan"] = to_json(report.clusters.at(cluster).plan);
  out << canonical_dump(result);
  return kExitOk;
}

}  // namespace detail

/// Parses and runs one CLI invocation. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clusters daily load profiles and derives EV charging / V2G hour windows"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  detail::DatasetArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Parse and check a dataset");
  detail::add_dataset_options(*validate, validate_args);

  detail::FitArgs fit_args;
  bool fit_no_wrap = false;
  auto* fit = app.add_subcommand("fit", "Cluster days and derive thresholds and windows");
  detail::add_fit_options(*fit, fit_args, true);
  fit->add_option("--trend", fit_args.trend, "Representative trend: DBA centroid or medoid")
      ->check(CLI::IsMember({"dba", "medoid"}))
      ->capture_default_str();
  fit->add_option("--threshold-source", fit_args.threshold_source,
                  "Derive thresholds from the trend or from all member hours")
      ->check(CLI::IsMember({"trend", "members"}))
      ->capture_default_str();
  fit->add_option("-o,--out", fit_args.out_dir, "Output directory")->capture_default_str();
  fit->add_flag("--no-wrap", fit_no_wrap, "Do not merge windows across midnight");

  detail::FitArgs sweep_args;
  int k_min = 0, k_max = 0;
  auto* sweep = app.add_subcommand("sweep", "Fit a range of k values and report inertia");
  detail::add_fit_options(*sweep, sweep_args, false);
  sweep->add_option("--k-min", k_min, "Smallest k")->required();
  sweep->add_option("--k-max", k_max, "Largest k")->required();

  std::string report_path, date_arg, profile_arg;
  auto* plan = app.add_subcommand("plan", "Look up the charge/V2G plan for a day");
  plan->add_option("-r,--report", report_path, "report.json from a fit run")
      ->required()
      ->check(CLI::ExistingFile);
  plan->add_option("--date", date_arg, "Date in the report (YYYY-MM-DD)");
  plan->add_option("--profile", profile_arg,
                   "24 comma-separated hourly values, inline or a file path");

  std::vector<const char*> argv;
  argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (validate->parsed()) return detail::cmd_validate(validate_args, out);
    if (fit->parsed()) {
      fit_args.no_wrap = fit_no_wrap;
      if (fit_args.k < 1) {
        err << "fit: k must be positive\n";
        return kExitConfig;
      }
      return detail::cmd_fit(fit_args, out, err);
    }
    if (sweep->parsed()) return detail::cmd_sweep(sweep_args, k_min, k_max, out, err);
    if (plan->parsed()) {
      if (date_arg.empty() == profile_arg.empty()) {
        err << "plan: supply exactly one of --date or --profile\n";
        return kExitConfig;
      }
      return detail::cmd_plan(report_path, date_arg, profile_arg, out, err);
    }
  } catch (const TooFewDays& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MixedSeriesKind& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BandTooNarrow& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {  // parse, duplicate, IO and other input-side failures
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace loadwin::cli
