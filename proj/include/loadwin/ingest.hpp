#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "loadwin/errors.hpp"

namespace loadwin {

/// Local calendar date. No timezone math anywhere: hour-of-day is read from
/// the timestamp field as published.
struct Date {
  int year = 0;
  unsigned month = 1;
  unsigned day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;

  bool valid() const {
    return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                       std::chrono::day{day}}
        .ok();
  }
  std::chrono::sys_days to_sys_days() const {
    return std::chrono::sys_days{std::chrono::year_month_day{
        std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
  }
  static Date from_sys_days(std::chrono::sys_days sd) {
    const std::chrono::year_month_day ymd{sd};
    return Date{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
  }
};

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  Date d;
  auto num = [&](std::string_view part, auto& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && p == part.data() + part.size();
  };
  unsigned y = 0;
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), d.month) || !num(s.substr(8, 2), d.day)) {
    return std::nullopt;
  }
  d.year = static_cast<int>(y);
  if (!d.valid()) return std::nullopt;
  return d;
}

enum class SeriesKind { TotalLoad, NetLoad };

inline std::string_view to_string(SeriesKind k) {
  return k == SeriesKind::TotalLoad ? "total_load" : "net_load";
}

/// One hourly observation: the total system load plus per-source renewable
/// generation, all MW.
struct HourlyRecord {
  Date date;
  int hour = 0;  // 0..23
  double total_load = 0.0;
  std::map<std::string, double> renewable_by_source;

  friend bool operator==(const HourlyRecord&, const HourlyRecord&) = default;
};

/// One calendar day as a 24-value hourly profile. NetLoad values may be
/// negative (renewables can exceed load).
struct DaySeries {
  Date date;
  std::array<double, 24> values{};
  SeriesKind kind = SeriesKind::TotalLoad;
  bool repaired = false;

  friend bool operator==(const DaySeries&, const DaySeries&) = default;
};

/// Column-name mapping for parse_hourly_csv.
struct CsvSchema {
  std::string timestamp_col = "ts";
  std::string load_col = "load";
  std::vector<std::string> renewable_cols;
};

/// Missing-hour repair rule for assemble_days: days missing at most
/// max_missing_hours are filled by linear interpolation of neighboring hours
/// (endpoints clamp to the nearest present value); days missing more are
/// rejected. Hours duplicated in the input (fall-back DST) are averaged.
struct RepairPolicy {
  int max_missing_hours = 2;
};

struct RejectedDay {
  Date date;
  std::string reason;
};

struct AssembleResult {
  std::vector<DaySeries> days;  // sorted by date
  std::vector<RejectedDay> rejects;
};

struct DatasetDiagnostics {
  std::size_t day_count = 0;
  std::size_t repaired_count = 0;
  Date span_start, span_end;
  std::vector<Date> gaps;  // dates missing between span_start and span_end
  std::array<double, 24> hour_min{}, hour_max{}, hour_mean{};
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// "YYYY-MM-DDTHH:MM" or "YYYY-MM-DD HH:MM"; hourly data, so minutes must be 00.
inline std::optional<std::pair<Date, int>> parse_timestamp(std::string_view s) {
  if (s.size() != 16 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
  const auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  int hour = 0, minute = 0;
  auto num = [&](std::string_view part, int& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && p == part.data() + part.size();
  };
  if (!num(s.substr(11, 2), hour) || !num(s.substr(14, 2), minute)) return std::nullopt;
  if (hour < 0 || hour > 23 || minute != 0) return std::nullopt;
  return std::make_pair(*date, hour);
}

}  // namespace detail

/// Parses hourly records from CSV text. The header row is required; `schema`
/// names the timestamp and load columns plus zero or more renewable columns.
/// Records come back sorted by timestamp; duplicate timestamps are rejected.
inline std::vector<HourlyRecord> parse_hourly_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) {
    throw MissingColumn("empty input: no header row");
  }
  const auto header = detail::split_csv_line(line);
  std::map<std::string_view, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    col_index.emplace(header[i], i);  // first occurrence wins
  }
  const auto require = [&](const std::string& name) {
    const auto it = col_index.find(name);
    if (it == col_index.end()) throw MissingColumn("missing column: " + name);
    return it->second;
  };
  const std::size_t ts_col = require(schema.timestamp_col);
  const std::size_t load_col = require(schema.load_col);
  std::vector<std::size_t> ren_cols;
  for (const auto& name : schema.renewable_cols) ren_cols.push_back(require(name));

  std::vector<HourlyRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const auto field = [&](std::size_t idx) -> std::string_view {
      if (idx >= fields.size()) {
        throw MalformedRow(line_no, "expected at least " + std::to_string(idx + 1) +
                                        " columns, got " + std::to_string(fields.size()));
      }
      return fields[idx];
    };

    const auto ts = detail::parse_timestamp(field(ts_col));
    if (!ts) throw MalformedRow(line_no, "bad timestamp '" + std::string(field(ts_col)) + "'");

    HourlyRecord rec;
    rec.date = ts->first;
    rec.hour = ts->second;

    const auto load = detail::parse_double(field(load_col));
    if (!load || !std::isfinite(*load) || *load < 0.0) {
      throw MalformedRow(line_no, "bad load value '" + std::string(field(load_col)) + "'");
    }
    rec.total_load = *load;

    for (std::size_t i = 0; i < ren_cols.size(); ++i) {
      const auto v = detail::parse_double(field(ren_cols[i]));
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw MalformedRow(line_no, "bad renewable value '" + std::string(field(ren_cols[i])) +
                                        "' in column " + schema.renewable_cols[i]);
      }
      rec.renewable_by_source[schema.renewable_cols[i]] = *v;
    }
    records.push_back(std::move(rec));
  }

  std::stable_sort(records.begin(), records.end(), [](const HourlyRecord& a, const HourlyRecord& b) {
    return std::tie(a.date, a.hour) < std::tie(b.date, b.hour);
  });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].date == records[i - 1].date && records[i].hour == records[i - 1].hour) {
      throw DuplicateTimestamp("duplicate timestamp " + format_date(records[i].date) + " hour " +
                               std::to_string(records[i].hour));
    }
  }
  return records;
}

/// Groups records into per-day 24-hour profiles. For NetLoad, each value is
/// total_load minus the sum of renewable generation for that hour. Days that
/// cannot be repaired under `policy` land in the rejects list.
inline AssembleResult assemble_days(const std::vector<HourlyRecord>& records, SeriesKind kind,
                                    const RepairPolicy& policy = {}) {
  if (records.empty()) throw EmptyInput("assemble_days: no records");

  struct Slot {
    double sum = 0.0;
    int count = 0;
  };
  std::map<Date, std::array<Slot, 24>> by_date;
  for (const auto& rec : records) {
    double v = rec.total_load;
    if (kind == SeriesKind::NetLoad) {
      for (const auto& [name, mw] : rec.renewable_by_source) v -= mw;
    }
    auto& slot = by_date[rec.date][static_cast<std::size_t>(rec.hour)];
    slot.sum += v;
    slot.count += 1;
  }

  AssembleResult result;
  for (const auto& [date, slots] : by_date) {
    DaySeries day;
    day.date = date;
    day.kind = kind;

    std::array<bool, 24> present{};
    int missing = 0;
    bool duplicated = false;
    for (std::size_t h = 0; h < 24; ++h) {
      if (slots[h].count == 0) {
        ++missing;
      } else {
        present[h] = true;
        day.values[h] = slots[h].sum / slots[h].count;  // duplicated hours averaged
        if (slots[h].count > 1) duplicated = true;
      }
    }
    if (missing > policy.max_missing_hours) {
      result.rejects.push_back(
          {date, "missing " + std::to_string(missing) + " of 24 hours"});
      continue;
    }
    if (missing > 0) {
      for (std::size_t h = 0; h < 24; ++h) {
        if (present[h]) continue;
        int prev = -1, next = -1;
        for (int p = static_cast<int>(h) - 1; p >= 0; --p) {
          if (present[p]) { prev = p; break; }
        }
        for (int q = static_cast<int>(h) + 1; q < 24; ++q) {
          if (present[q]) { next = q; break; }
        }
        if (prev >= 0 && next >= 0) {
          const double t = double(int(h) - prev) / double(next - prev);
          day.values[h] = day.values[prev] + t * (day.values[next] - day.values[prev]);
        } else if (next >= 0) {
          day.values[h] = day.values[next];  // clamp at the start of the day
        } else {
          day.values[h] = day.values[prev];  // clamp at the end of the day
        }
      }
    }
    day.repaired = missing > 0 || duplicated;
    result.days.push_back(std::move(day));
  }
  return result;
}

/// Summarizes an assembled dataset: counts, calendar gaps, per-hour extremes.
inline DatasetDiagnostics validate_dataset(const std::vector<DaySeries>& days) {
  if (days.empty()) throw EmptyInput("validate_dataset: no days");

  DatasetDiagnostics diag;
  diag.day_count = days.size();
  std::vector<Date> dates;
  dates.reserve(days.size());
  for (const auto& d : days) {
    if (d.repaired) ++diag.repaired_count;
    dates.push_back(d.date);
  }
  std::sort(dates.begin(), dates.end());
  diag.span_start = dates.front();
  diag.span_end = dates.back();
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] == dates[i - 1]) continue;
    for (auto sd = dates[i - 1].to_sys_days() + std::chrono::days{1}; sd < dates[i].to_sys_days();
         sd += std::chrono::days{1}) {
      diag.gaps.push_back(Date::from_sys_days(sd));
    }
  }

  diag.hour_min.fill(std::numeric_limits<double>::infinity());
  diag.hour_max.fill(-std::numeric_limits<double>::infinity());
  diag.hour_mean.fill(0.0);
  for (const auto& d : days) {
    for (std::size_t h = 0; h < 24; ++h) {
      diag.hour_min[h] = std::min(diag.hour_min[h], d.values[h]);
      diag.hour_max[h] = std::max(diag.hour_max[h], d.values[h]);
      diag.hour_mean[h] += d.values[h];
    }
  }
  for (auto& m : diag.hour_mean) m /= static_cast<double>(days.size());
  return diag;
}

}  // namespace loadwin
