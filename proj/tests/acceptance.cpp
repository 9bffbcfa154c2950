// Acceptance suite: every criterion prints one [PASS]/[FAIL] line and the
// binary exits non-zero if any fails.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "loadwin/cli.hpp"
#include "loadwin/clustering.hpp"
#include "loadwin/dtw.hpp"
#include "loadwin/report.hpp"
#include "loadwin/thresholds.hpp"
#include "loadwin/windows.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace loadwin;
namespace fs = std::filesystem;

namespace {

void criterion(int id, const std::string& name, bool ok) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name << std::endl;
  REQUIRE(ok);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run_cli(args, out, err);
}

synthetic::Fixture year_fixture(std::uint64_t seed) {
  auto fx = synthetic::make_days(122, seed);  // 366 days, trim to a year
  fx.days.resize(365);
  fx.labels.resize(365);
  return fx;
}

}  // namespace

TEST_CASE("criterion 1: dtw oracle equivalence") {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20220101);
  const std::array<double, 4> alphabet{0, 1, 2, 5};
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);

  bool all_match = true;
  for (int pair = 0; pair < 10000 && all_match; ++pair) {
    std::vector<double> x(len(rng)), y(len(rng));
    for (auto& v : x) v = alphabet[sym(rng)];
    for (auto& v : y) v = alphabet[sym(rng)];
    const double expect = oracles::dtw_brute_force(x, y);
    if (std::abs(dtw_distance(x, y) - expect) > 1e-9) all_match = false;
  }
  const double elapsed = seconds_since(start);
  criterion(1, "10^4 short sequence pairs match brute-force path enumeration (1e-9), < 5 s",
            all_match && elapsed < 5.0);
}

TEST_CASE("criterion 2: dtw algebra") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> mw(10000.0, 80000.0);
  bool ok = true;
  for (int pair = 0; pair < 1000 && ok; ++pair) {
    std::vector<double> x(24), y(24);
    for (auto& v : x) v = mw(rng);
    for (auto& v : y) v = mw(rng);

    if (dtw_distance(x, x) != 0.0) ok = false;
    if (std::abs(dtw_distance(x, y) - dtw_distance(y, x)) > 1e-12) ok = false;
    double l2 = 0.0;
    for (int h = 0; h < 24; ++h) l2 += (x[h] - y[h]) * (x[h] - y[h]);
    if (std::abs(dtw_distance(x, y, DtwConfig{0}) - std::sqrt(l2)) > 1e-12) ok = false;
  }
  criterion(2, "identity exact, symmetry <= 1e-12, band-0 equals L2 <= 1e-12 on 1000 pairs", ok);
}

TEST_CASE("criterion 3: 1-d k-means exactness") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> pick_k(1, 3);
  bool ok = true;
  for (int trial = 0; trial < 500 && ok; ++trial) {
    const int k = pick_k(rng);
    std::uniform_int_distribution<std::size_t> pick_n(static_cast<std::size_t>(k), 12);
    std::vector<double> values(pick_n(rng));
    for (auto& v : values) v = u(rng);
    const auto got = kmeans_1d_exact(values, k);
    const auto expect = oracles::kmeans_1d_brute_force(values, k);
    if (got.assignment != expect.assignment) ok = false;
    if (std::abs(got.cost - expect.cost) > 1e-9) ok = false;
  }
  criterion(3, "500 random instances (n <= 12, k <= 3) match exhaustive enumeration", ok);
}

TEST_CASE("criterion 4: threshold example") {
  const std::vector<double> values{1, 1, 1, 5, 5, 5, 9, 9, 9};
  const auto thr = derive_thresholds(values);
  bool ok = !thr.degenerate && thr.green == 3.0 && thr.red == 7.0;

  std::array<double, 24> constant{};
  constant.fill(42.5);
  const auto degen = derive_thresholds(constant);
  ok = ok && degen.degenerate && degen.green == degen.red;
  criterion(4, "bands {1,5,9} give green 3 / red 7 exactly; constant input degenerates", ok);
}

TEST_CASE("criterion 5: monotonicity") {
  const auto fx = synthetic::make_days(40, 42);
  ClusteringConfig cfg;
  cfg.k = 3;
  cfg.seed = 42;
  const auto model = cluster_days(fx.days, cfg);
  bool ok = !model.inertia_history.empty();
  for (std::size_t r = 1; r < model.inertia_history.size(); ++r) {
    if (model.inertia_history[r] > model.inertia_history[r - 1] + 1e-9) ok = false;
  }

  // DBA objective, iteration by iteration, on one synthetic family
  std::vector<Profile> members;
  for (std::size_t i = 0; i < fx.days.size(); ++i) {
    if (fx.labels[i] == 2) members.push_back(fx.days[i].values);
  }
  Profile avg = members.front();
  auto objective = [&](const Profile& a) {
    double obj = 0.0;
    for (const auto& m : members) {
      const double d = dtw_distance(m, a);
      obj += d * d;
    }
    return obj;
  };
  double prev = objective(avg);
  for (int it = 0; it < 8; ++it) {
    avg = dba_mean(members, avg, 1);
    const double obj = objective(avg);
    if (obj > prev + 1e-9) ok = false;
    prev = obj;
  }
  criterion(5, "inertia non-increasing per Lloyd round; DBA objective non-increasing", ok);
}

TEST_CASE("criterion 6: synthetic recovery through fit") {
  TempDir dir("acceptance_c6");
  const auto fx = synthetic::make_days(40, 42);
  const fs::path csv = dir.path / "days.csv";
  std::ofstream(csv, std::ios::binary) << synthetic::to_csv(fx.days);

  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli_quiet({"fit", "-i", csv.string(), "--k", "3", "--seed", "42", "-o",
                                  (dir.path / "out").string()});
  const double elapsed = seconds_since(start);

  bool ok = code == 0;
  if (ok) {
    const auto report = report_from_json(json::parse(slurp(dir.path / "out" / "report.json")));
    std::vector<int> assignments(report.model.assignments.size());
    std::vector<int> labels(report.model.assignments.size());
    for (std::size_t i = 0; i < report.model.assignments.size(); ++i) {
      assignments[i] = report.model.assignments[i];
      labels[i] = fx.label_by_date.at(report.model.day_dates[i]);
    }
    ok = synthetic::purity(assignments, labels, 3) >= 0.95;
  }
  criterion(6, "3 noisy families, k=3, seed 42: purity >= 0.95 and fit < 10 s",
            ok && elapsed < 10.0);
}

TEST_CASE("criterion 7: labeling correctness properties") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  bool ok = true;
  for (int trial = 0; trial < 500 && ok; ++trial) {
    Profile trend{};
    for (auto& v : trend) v = u(rng);
    double g = u(rng), r = u(rng);
    if (g > r) std::swap(g, r);
    ThresholdPair thr;
    thr.green = g;
    thr.red = r;
    const auto labels = label_hours(trend, thr);

    for (int h = 0; h < 24; ++h) {
      if (labels[h] == HourLabel::Charge && trend[h] >= g) ok = false;
      if (labels[h] == HourLabel::V2G && trend[h] <= r) ok = false;
    }

    const auto plan = extract_windows(labels);
    HourLabels painted{};
    painted.fill(HourLabel::Neutral);
    auto apply = [&](const std::vector<HourWindow>& windows, HourLabel label) {
      for (const auto& w : windows) {
        if (w.wraps_midnight) {
          for (int h = w.start; h < 24; ++h) painted[h] = label;
          for (int h = 0; h < w.end; ++h) painted[h] = label;
        } else {
          for (int h = w.start; h < w.end; ++h) painted[h] = label;
        }
      }
    };
    apply(plan.charge_windows, HourLabel::Charge);
    apply(plan.v2g_windows, HourLabel::V2G);
    if (painted != labels) ok = false;

    const double s = std::uniform_real_distribution<double>(0.25, 4.0)(rng);
    Profile scaled = trend;
    for (auto& v : scaled) v *= s;
    ThresholdPair thr_s;
    thr_s.green = g * s;
    thr_s.red = r * s;
    if (label_hours(scaled, thr_s) != labels) ok = false;
  }
  criterion(7, "no mislabeled hour, window round-trip exact, joint rescaling invariant", ok);
}

TEST_CASE("criterion 8: determinism") {
  TempDir dir("acceptance_c8");
  const auto fx = synthetic::make_days(15, 8);
  const fs::path csv = dir.path / "days.csv";
  std::ofstream(csv, std::ios::binary) << synthetic::to_csv(fx.days);

  const std::vector<std::string> base{"fit", "-i", csv.string(), "--k", "4", "--seed", "77"};
  auto with_out = [&](const std::string& out) {
    auto args = base;
    args.push_back("-o");
    args.push_back(out);
    return args;
  };
  bool ok = run_cli_quiet(with_out((dir.path / "a").string())) == 0 &&
            run_cli_quiet(with_out((dir.path / "b").string())) == 0;

  if (ok) {
    std::vector<std::string> names{"report.json", "labels.csv"};
    for (int c = 0; c < 4; ++c) names.push_back("cluster_" + std::to_string(c) + ".csv");
    for (const auto& name : names) {
      if (slurp(dir.path / "a" / name) != slurp(dir.path / "b" / name)) ok = false;
    }
  }
  if (ok) {
    const std::string first = slurp(dir.path / "a" / "report.json");
    const std::string second = canonical_dump(to_json(report_from_json(json::parse(first))));
    if (first != second) ok = false;
  }
  criterion(8, "identical flags give byte-identical outputs; serialize round-trip stable", ok);
}

TEST_CASE("criterion 9: scale smoke test") {
  TempDir dir("acceptance_c9");
  const auto fx = year_fixture(2022);
  const fs::path csv = dir.path / "year.csv";
  std::ofstream(csv, std::ios::binary) << synthetic::to_csv(fx.days);

  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli_quiet({"fit", "-i", csv.string(), "--k", "20", "--seed", "20", "-o",
                                  (dir.path / "out").string()});
  const double elapsed = seconds_since(start);

  bool ok = code == 0 && elapsed < 60.0;
  if (ok) {
    int cluster_files = 0;
    for (const auto& entry : fs::directory_iterator(dir.path / "out")) {
      const auto name = entry.path().filename().string();
      if (name.rfind("cluster_", 0) == 0 && name.ends_with(".csv")) ++cluster_files;
    }
    if (cluster_files != 20) ok = false;

    const auto report = report_from_json(json::parse(slurp(dir.path / "out" / "report.json")));
    if (report.clusters.size() != 20) ok = false;
    for (const auto& c : report.clusters) {
      if (c.thresholds.green > c.thresholds.red) ok = false;
      if (c.member_dates.empty()) ok = false;
    }
  }
  criterion(9, "365 days at k=20 fits < 60 s, 20 plot files, green <= red everywhere", ok);
}
