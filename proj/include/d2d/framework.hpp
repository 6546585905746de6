#pragma once

// The analysis manager: a registry of analyzers and run_all(), which applies
// every selected analyzer to every item of a workspace, times each call and
// collects the reports.

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "d2d/analyzers.hpp"
#include "d2d/archive.hpp"
#include "d2d/error.hpp"
#include "d2d/model.hpp"
#include "d2d/timing.hpp"

namespace d2d {

struct AnalyzerDescriptor {
  std::string id;
  std::string signature;
  /// When set, the content reader stops after this many bytes.
  std::optional<std::size_t> max_prefix_bytes;
};

using Clock = std::chrono::steady_clock;

/// Unbuffered reader over one extracted file. Counts the bytes it hands out,
/// enforces the analyzer's prefix limit and the per-call deadline.
class ContentReader {
 public:
  ContentReader(const std::filesystem::path& file, std::optional<std::size_t> limit,
                Clock::time_point deadline = Clock::time_point::max())
      : path_(file), limit_(limit), deadline_(deadline) {
    struct stat st {};
    if (::lstat(file.c_str(), &st) != 0) throw Error(errc::io_error, "cannot stat " + file.string() + ": " + std::strerror(errno));
    if (S_ISDIR(st.st_mode))
      kind_ = FileKind::directory;
    else if (S_ISLNK(st.st_mode))
      kind_ = FileKind::symlink;
    else if (!S_ISREG(st.st_mode))
      kind_ = FileKind::special;
    size_ = static_cast<std::uint64_t>(st.st_size);
  }
  ~ContentReader() {
    if (fd_ >= 0) ::close(fd_);
  }
  ContentReader(const ContentReader&) = delete;
  ContentReader& operator=(const ContentReader&) = delete;

  std::size_t read(std::span<std::uint8_t> buf) {
    check_deadline();
    if (kind_ != FileKind::regular) return 0;
    std::size_t want = buf.size();
    if (limit_) want = std::min<std::size_t>(want, *limit_ - std::min<std::uint64_t>(*limit_, bytes_read_));
    if (want == 0) return 0;
    if (fd_ < 0) {
      fd_ = ::open(path_.c_str(), O_RDONLY | O_CLOEXEC);
      if (fd_ < 0) throw Error(errc::io_error, "cannot open " + path_.string() + ": " + std::strerror(errno));
    }
    ssize_t got;
    do {
      got = ::read(fd_, buf.data(), want);
    } while (got < 0 && errno == EINTR);
    if (got < 0) throw Error(errc::io_error, "read failed on " + path_.string() + ": " + std::strerror(errno));
    bytes_read_ += static_cast<std::uint64_t>(got);
    return static_cast<std::size_t>(got);
  }

  /// Reads until the limit or end of file.
  std::vector<std::uint8_t> read_all() {
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buf(analysis::chunk_size);
    while (std::size_t got = read(std::span<std::uint8_t>(buf))) out.insert(out.end(), buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(got));
    return out;
  }

  void check_deadline() const {
    if (Clock::now() > deadline_) throw Error(errc::analysis_timeout, "time limit exceeded on " + path_.filename().string());
  }

  FileKind kind() const noexcept { return kind_; }
  std::uint64_t file_size() const noexcept { return size_; }
  std::uint64_t bytes_read() const noexcept { return bytes_read_; }
  /// True when the limit cut the content short.
  bool truncated() const noexcept { return limit_ && size_ > *limit_; }

 private:
  std::filesystem::path path_;
  std::optional<std::size_t> limit_;
  Clock::time_point deadline_;
  FileKind kind_ = FileKind::regular;
  std::uint64_t size_ = 0;
  std::uint64_t bytes_read_ = 0;
  int fd_ = -1;
};

static_assert(ByteReader<ContentReader>);

using AnalyzeFn = std::function<Pdi(const DigitalItem&, ContentReader&)>;

struct Analyzer {
  AnalyzerDescriptor descriptor;
  AnalyzeFn fn;
};

struct AnalyzerReport {
  Identifier item;
  std::string analyzer_id;
  Pdi pdi;
  timing::Duration duration{0};
  bool failed = false;
  std::uint64_t bytes_read = 0;

  double duration_ms() const noexcept { return static_cast<double>(duration.count()) / 1e6; }
};

class AnalyzerRegistry {
 public:
  AnalyzerRegistry& add(Analyzer a) {
    if (!text::is_token(a.descriptor.id)) throw Error(errc::invalid_argument, "analyzer id must be a token");
    if (a.descriptor.signature.empty()) throw Error(errc::invalid_argument, "analyzer '" + a.descriptor.id + "' has no signature");
    if (!a.fn) throw Error(errc::invalid_argument, "analyzer '" + a.descriptor.id + "' has no callable");
    if (find(a.descriptor.id)) throw Error(errc::duplicate_analyzer, a.descriptor.id);
    analyzers_.push_back(std::move(a));
    return *this;
  }

  const Analyzer* find(std::string_view id) const noexcept {
    for (const auto& a : analyzers_)
      if (a.descriptor.id == id) return &a;
    return nullptr;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (const auto& a : analyzers_) out.push_back(a.descriptor.id);
    return out;
  }

  const std::vector<Analyzer>& analyzers() const noexcept { return analyzers_; }
  std::size_t size() const noexcept { return analyzers_.size(); }

 private:
  std::vector<Analyzer> analyzers_;
};

struct RunOptions {
  unsigned workers = 1;
  std::chrono::nanoseconds timeout = std::chrono::seconds(60);
  timing::TimingCollector* timings = nullptr;
};

namespace detail {

inline std::vector<PdiEntry> reference_entries(const DigitalItem& item) {
  return {make_entry("identifier", item.identifier.external()),
          make_entry("internalIdentifier", item.identifier.internal())};
}

inline Pdi error_pdi(const std::string& signature, const std::string& message) {
  Pdi pdi(signature);
  pdi.add("analysisError", message);
  pdi.set_raw_output(message);
  return pdi;
}

/// Removes entries the framework owns and rejects malformed ones.
inline void check_and_strip(Pdi& pdi) {
  Pdi clean(pdi.signature());
  clean.set_raw_output(pdi.raw_output());
  for (const auto& e : pdi.entries()) {
    if (e.type_name == "identifier" || e.type_name == "internalIdentifier") continue;
    if (!is_known_pdi_type(e.type_name)) throw Error(errc::unknown_pdi_type, e.type_name);
    if (classify(e.type_name) != e.entity)
      throw Error(errc::unknown_pdi_type, e.type_name + " filed under " + std::string(to_string(e.entity)));
    clean.add(e);
  }
  pdi = std::move(clean);
}

inline AnalyzerReport run_one(const Analyzer& a, const DigitalItem& item, const std::filesystem::path& root,
                              std::chrono::nanoseconds timeout) {
  AnalyzerReport r;
  r.item = item.identifier;
  r.analyzer_id = a.descriptor.id;
  auto start = Clock::now();
  auto deadline = timeout.count() > 0 && Clock::time_point::max() - start > timeout ? start + timeout : Clock::time_point::max();
  try {
    ContentReader reader(root / item.relative_path, a.descriptor.max_prefix_bytes, deadline);
    try {
      r.pdi = a.fn(item, reader);
      r.duration = Clock::now() - start;
      r.bytes_read = reader.bytes_read();
      reader.check_deadline();
      if (r.pdi.signature().empty()) r.pdi.set_signature(a.descriptor.signature);
      check_and_strip(r.pdi);
    } catch (...) {
      r.bytes_read = reader.bytes_read();
      throw;
    }
  } catch (const std::exception& e) {
    r.duration = Clock::now() - start;
    r.failed = true;
    r.pdi = error_pdi(a.descriptor.signature, e.what());
  } catch (...) {
    r.duration = Clock::now() - start;
    r.failed = true;
    r.pdi = error_pdi(a.descriptor.signature, "unknown exception");
  }
  r.pdi.prepend(reference_entries(item));
  return r;
}

}  // namespace detail

/// Applies the selected analyzers to every item. Reports come back ordered by
/// item, then by registration order among the selected analyzers, whatever
/// the worker count.
inline std::vector<AnalyzerReport> run_all(const AnalyzerRegistry& registry, const Workspace& workspace,
                                           const std::vector<std::string>& selection, const RunOptions& opts = {}) {
  for (const auto& id : selection)
    if (!registry.find(id)) throw Error(errc::unknown_analyzer, id);
  std::vector<const Analyzer*> chosen;
  for (const auto& a : registry.analyzers())
    if (std::find(selection.begin(), selection.end(), a.descriptor.id) != selection.end()) chosen.push_back(&a);

  const std::size_t total = workspace.items.size() * chosen.size();
  std::vector<AnalyzerReport> reports(total);
  if (total == 0) return reports;

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const DigitalItem& item = workspace.items[i / chosen.size()];
      const Analyzer& a = *chosen[i % chosen.size()];
      reports[i] = detail::run_one(a, item, workspace.root_dir, opts.timeout);
      if (opts.timings)
        opts.timings->record(item.identifier.internal(), a.descriptor.id, item.size_bytes, reports[i].duration);
    }
  };
  unsigned workers = std::max(1u, opts.workers);
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return reports;
}

}  // namespace d2d
