#pragma once

// End-to-end run: detect, explode, enumerate, analyze, build, serialize,
// self-check, write. Exit status 0 = success, 1 = fatal error (no output
// written), 2 = output written but some analyzer reports are errors.

#include <stdlib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/archive.hpp"
#include "d2d/builtins.hpp"
#include "d2d/didl.hpp"
#include "d2d/framework.hpp"
#include "d2d/schema.hpp"
#include "d2d/timing.hpp"

namespace d2d {

enum exit_status : int { exit_ok = 0, exit_fatal = 1, exit_analyzer_errors = 2 };

struct RunConfig {
  std::filesystem::path archive_path;
  std::filesystem::path output_didl_path;
  std::optional<std::filesystem::path> timing_csv_path;
  std::vector<std::string> analyzers = default_analyzer_ids();
  std::string authority = std::string(default_authority);
  std::optional<std::filesystem::path> workdir;
  std::optional<std::filesystem::path> magic_db_path;
  std::optional<std::filesystem::path> registry_path;
  unsigned workers = 1;
  bool keep_workdir = false;
  std::chrono::nanoseconds timeout = std::chrono::seconds(60);
  IdentifierSource identifier_source = IdentifierSource::path;
  std::string pdi_namespace = std::string(didl::default_daap_ns);
  bool schema_check = true;
  /// Pins every item's lastModified (deterministic output for tests).
  std::optional<std::int64_t> fixed_epoch;
};

struct RunSummary {
  int status = exit_fatal;
  std::size_t items = 0;
  std::size_t reports = 0;
  std::size_t failed_reports = 0;
  std::filesystem::path workdir;
};

namespace detail {

inline void write_file_atomically(const std::filesystem::path& path, std::string_view data) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot open " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(errc::io_error, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(errc::io_error, "cannot move output into place at " + path.string());
  }
}

inline std::filesystem::path make_temp_dir() {
  std::string templ = (std::filesystem::temp_directory_path() / "d2d-XXXXXX").string();
  if (!::mkdtemp(templ.data())) throw Error(errc::io_error, "cannot create a temporary work directory");
  return templ;
}

/// Removes the work directory on scope exit unless told to keep it.
struct WorkdirGuard {
  std::filesystem::path dir;
  bool remove = true;
  ~WorkdirGuard() {
    if (remove && !dir.empty()) {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  }
};

}  // namespace detail

inline void check_config(const RunConfig& c) {
  if (c.analyzers.empty()) throw Error(errc::invalid_argument, "analyzer list is empty");
  std::set<std::string> seen;
  for (const auto& id : c.analyzers)
    if (!seen.insert(id).second) throw Error(errc::invalid_argument, "analyzer '" + id + "' listed twice");
  if (c.workers == 0) throw Error(errc::invalid_argument, "workers must be positive");
  if (c.output_didl_path.empty()) throw Error(errc::invalid_argument, "no output path");
}

inline RunSummary run(const RunConfig& config, std::ostream& diag) {
  RunSummary summary;
  try {
    check_config(config);
    if (!std::filesystem::exists(config.archive_path))
      throw Error(errc::io_error, "archive not found: " + config.archive_path.string());
    ArchiveKind kind = detect_archive_kind(config.archive_path);

    auto magic = std::make_shared<const MagicDb>(config.magic_db_path ? MagicDb::load(config.magic_db_path->string())
                                                                      : MagicDb::builtin());
    auto formats = std::make_shared<const FormatRegistry>(
        config.registry_path ? FormatRegistry::load(config.registry_path->string()) : FormatRegistry::builtin());
    AnalyzerRegistry registry = builtin_registry(magic, formats);
    for (const auto& id : config.analyzers)
      if (!registry.find(id)) throw Error(errc::unknown_analyzer, id);

    detail::WorkdirGuard guard;
    if (config.workdir) {
      guard.dir = *config.workdir;
      guard.remove = false;
    } else {
      guard.dir = detail::make_temp_dir();
      guard.remove = !config.keep_workdir;
    }
    summary.workdir = guard.dir;

    IngestOptions ingest;
    ingest.authority = config.authority;
    ingest.identifier_source = config.identifier_source;
    ingest.fixed_mtime = config.fixed_epoch;
    Workspace ws = explode(config.archive_path, kind, guard.dir, ingest);
    summary.items = ws.items.size();

    timing::TimingCollector timings;
    RunOptions opts;
    opts.workers = config.workers;
    opts.timeout = config.timeout;
    opts.timings = &timings;
    auto started = Clock::now();
    std::vector<AnalyzerReport> reports = run_all(registry, ws, config.analyzers, opts);
    auto wall = std::chrono::duration_cast<timing::Duration>(Clock::now() - started);
    summary.reports = reports.size();
    for (const auto& r : reports) {
      if (!r.failed) continue;
      ++summary.failed_reports;
      const std::string* msg = r.pdi.find("analysisError");
      diag << "d2d: " << r.analyzer_id << " failed on " << r.item.internal() << ": " << (msg ? *msg : "error") << "\n";
    }

    didl::BuildOptions build;
    build.archive_mime = std::string(mime_type(kind));
    build.pdi_namespace = config.pdi_namespace;
    std::string archive_ref = text::percent_encode_name(config.archive_path.filename().string());
    std::string xml_text = didl::serialize(didl::build_document(ws, reports, archive_ref, build));

    if (config.schema_check) {
      auto violations = schema::SchemaSet::builtin(config.pdi_namespace).validate(xml_text);
      if (!violations.empty()) {
        for (const auto& v : violations) diag << "d2d: schema self-check: " << v.str() << "\n";
        throw Error(errc::invalid_document, "generated DIDL failed the schema self-check");
      }
    }
    if (config.timing_csv_path) {
      auto records = timings.records();
      timing::emit_csv(records, timing::aggregate(records, wall), config.timing_csv_path->string());
    }
    detail::write_file_atomically(config.output_didl_path, xml_text);
    summary.status = summary.failed_reports ? exit_analyzer_errors : exit_ok;
  } catch (const std::exception& e) {
    diag << "d2d: " << e.what() << "\n";
    summary.status = exit_fatal;
  }
  return summary;
}

/// Schema check of an existing file: 0 when valid, 1 otherwise.
inline int validate_file(const std::filesystem::path& path, std::ostream& diag,
                         std::string_view pdi_namespace = didl::default_daap_ns) {
  try {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto violations = schema::SchemaSet::builtin(pdi_namespace).validate(ss.str());
    for (const auto& v : violations) diag << path.string() << ": " << v.str() << "\n";
    return violations.empty() ? exit_ok : exit_fatal;
  } catch (const std::exception& e) {
    diag << "d2d: " << e.what() << "\n";
    return exit_fatal;
  }
}

}  // namespace d2d
