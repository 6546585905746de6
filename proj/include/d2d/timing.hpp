#pragma once

// Per-(item, analyzer) timing records, aggregate statistics and CSV output.
//
// Durations are kept as integer nanoseconds so sums are exact and independent
// of record order; milliseconds appear only when formatting.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/error.hpp"

namespace d2d::timing {

using Duration = std::chrono::nanoseconds;

struct TimingRecord {
  std::string item_internal_id;
  std::string analyzer_id;
  std::uint64_t file_size_bytes = 0;
  Duration duration{0};

  double duration_ms() const noexcept { return static_cast<double>(duration.count()) / 1e6; }
  friend bool operator==(const TimingRecord&, const TimingRecord&) = default;
};

struct AnalyzerStats {
  std::uint64_t count = 0;
  Duration min{0};
  Duration max{0};
  Duration total{0};

  /// Mean in nanoseconds, rounded down; zero for an empty partition.
  Duration mean() const noexcept { return count ? Duration(total.count() / static_cast<std::int64_t>(count)) : Duration{0}; }
  friend bool operator==(const AnalyzerStats&, const AnalyzerStats&) = default;
};

struct AggregateStats {
  std::map<std::string, AnalyzerStats> per_analyzer;
  std::uint64_t file_count = 0;
  std::uint64_t total_bytes = 0;
  Duration wall{0};

  Duration grand_total() const noexcept {
    Duration sum{0};
    for (const auto& [id, s] : per_analyzer) sum += s.total;
    return sum;
  }
  friend bool operator==(const AggregateStats&, const AggregateStats&) = default;
};

/// Thread-safe append-only record store.
class TimingCollector {
 public:
  void record(std::string item_internal_id, std::string analyzer_id, std::uint64_t size, Duration duration) {
    if (duration < Duration::zero()) throw Error(errc::invalid_argument, "negative duration");
    std::lock_guard lock(mu_);
    records_.push_back({std::move(item_internal_id), std::move(analyzer_id), size, duration});
  }

  std::vector<TimingRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<TimingRecord> records_;
};

/// Files are counted once per distinct item id; their size once as well.
inline AggregateStats aggregate(const std::vector<TimingRecord>& records, Duration wall = Duration{0}) {
  AggregateStats out;
  out.wall = wall;
  std::map<std::string, std::uint64_t> files;
  for (const auto& r : records) {
    AnalyzerStats& s = out.per_analyzer[r.analyzer_id];
    if (s.count == 0) {
      s.min = s.max = r.duration;
    } else {
      s.min = std::min(s.min, r.duration);
      s.max = std::max(s.max, r.duration);
    }
    ++s.count;
    s.total += r.duration;
    files.emplace(r.item_internal_id, r.file_size_bytes);
  }
  out.file_count = files.size();
  for (const auto& [id, size] : files) out.total_bytes += size;
  return out;
}

/// Nanoseconds as milliseconds with six decimals, computed without floating point.
inline std::string format_ms(Duration d) {
  std::int64_t ns = d.count();
  std::string sign = ns < 0 ? "-" : "";
  std::uint64_t v = static_cast<std::uint64_t>(ns < 0 ? -ns : ns);
  std::string frac = std::to_string(v % 1000000);
  frac.insert(0, 6 - frac.size(), '0');
  return sign + std::to_string(v / 1000000) + "." + frac;
}

/// Inverse of format_ms; accepts up to six decimals.
inline Duration parse_ms(std::string_view s) {
  auto bad = [&] { return Error(errc::parse_error, "bad millisecond value '" + std::string(s) + "'"); };
  bool neg = !s.empty() && s.front() == '-';
  if (neg) s.remove_prefix(1);
  auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() || frac.size() > 6) throw bad();
  std::int64_t ns = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') throw bad();
    ns = ns * 10 + (c - '0');
  }
  std::int64_t f = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    char c = i < frac.size() ? frac[i] : '0';
    if (c < '0' || c > '9') throw bad();
    f = f * 10 + (c - '0');
  }
  ns = ns * 1000000 + f;
  return Duration(neg ? -ns : ns);
}

namespace detail {

inline std::string csv_field(std::string_view v) {
  if (v.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline constexpr std::string_view csv_header = "internal_id,analyzer,size_bytes,duration_ms";

/// Detail rows sorted by (analyzer, size_bytes, internal_id), then a
/// "#summary" section per analyzer and an "#overall" section.
inline std::string to_csv(std::vector<TimingRecord> records, const AggregateStats& stats) {
  std::stable_sort(records.begin(), records.end(), [](const TimingRecord& a, const TimingRecord& b) {
    if (a.analyzer_id != b.analyzer_id) return a.analyzer_id < b.analyzer_id;
    if (a.file_size_bytes != b.file_size_bytes) return a.file_size_bytes < b.file_size_bytes;
    return a.item_internal_id < b.item_internal_id;
  });
  std::string out(csv_header);
  out += '\n';
  for (const auto& r : records) {
    out += detail::csv_field(r.item_internal_id) + ',' + detail::csv_field(r.analyzer_id) + ',' +
           std::to_string(r.file_size_bytes) + ',' + format_ms(r.duration) + '\n';
  }
  out += "#summary\nanalyzer,count,min_ms,max_ms,mean_ms,total_ms\n";
  for (const auto& [id, s] : stats.per_analyzer) {
    out += detail::csv_field(id) + ',' + std::to_string(s.count) + ',' + format_ms(s.min) + ',' + format_ms(s.max) +
           ',' + format_ms(s.mean()) + ',' + format_ms(s.total) + '\n';
  }
  out += "#overall\nfile_count,total_bytes,wall_ms\n";
  out += std::to_string(stats.file_count) + ',' + std::to_string(stats.total_bytes) + ',' + format_ms(stats.wall) + '\n';
  return out;
}

inline std::size_t emit_csv(const std::vector<TimingRecord>& records, const AggregateStats& stats, std::ostream& out) {
  std::string csv = to_csv(records, stats);
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) throw Error(errc::io_error, "failed writing timing CSV");
  return csv.size();
}

inline std::size_t emit_csv(const std::vector<TimingRecord>& records, const AggregateStats& stats,
                            const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(errc::io_error, "cannot open " + path);
  std::size_t n = emit_csv(records, stats, f);
  f.close();
  if (!f) throw Error(errc::io_error, "failed closing " + path);
  return n;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(errc::parse_error, "unterminated quoted CSV field");
  return fields;
}

}  // namespace detail

struct ParsedCsv {
  std::vector<TimingRecord> records;
  Duration wall{0};
};

/// Reads back the detail rows and the overall wall time written by to_csv.
/// Quoted fields may not contain line breaks (ids never do).
inline ParsedCsv parse_csv(std::string_view text) {
  ParsedCsv out;
  enum class Section { header, detail, summary, overall } section = Section::header;
  bool overall_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (section == Section::header) {
      if (line != csv_header) throw Error(errc::parse_error, "unexpected CSV header");
      section = Section::detail;
    } else if (line == "#summary") {
      section = Section::summary;
    } else if (line == "#overall") {
      section = Section::overall;
    } else if (section == Section::detail) {
      auto f = detail::split_csv_line(line);
      if (f.size() != 4) throw Error(errc::parse_error, "detail row needs 4 fields");
      out.records.push_back({f[0], f[1], std::stoull(f[2]), parse_ms(f[3])});
    } else if (section == Section::overall) {
      if (!overall_header) {
        overall_header = true;
        continue;
      }
      auto f = detail::split_csv_line(line);
      if (f.size() != 3) throw Error(errc::parse_error, "overall row needs 3 fields");
      out.wall = parse_ms(f[2]);
    }
  }
  return out;
}

}  // namespace d2d::timing
