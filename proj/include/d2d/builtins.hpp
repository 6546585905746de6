#pragma once

// The five built-in analyzers wired into the framework.

#include <memory>
#include <string>
#include <vector>

#include "d2d/analyzers.hpp"
#include "d2d/framework.hpp"
#include "d2d/magic.hpp"
#include "d2d/registry.hpp"

namespace d2d {

inline const std::vector<std::string>& default_analyzer_ids() {
  static const std::vector<std::string> ids = {"checksum", "filetype", "strings", "validate", "registry"};
  return ids;
}

namespace detail {

/// Passes bytes through while keeping a copy of the first `keep` of them.
template <ByteReader R>
class PrefixTee {
 public:
  PrefixTee(R& inner, std::size_t keep) : inner_(inner), keep_(keep) {}

  std::size_t read(std::span<std::uint8_t> buf) {
    std::size_t got = inner_.read(buf);
    if (prefix_.size() < keep_) {
      std::size_t take = std::min(got, keep_ - prefix_.size());
      prefix_.insert(prefix_.end(), buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(take));
    }
    total_ += got;
    return got;
  }

  const std::vector<std::uint8_t>& prefix() const noexcept { return prefix_; }
  bool truncated() const noexcept { return total_ > prefix_.size(); }

 private:
  R& inner_;
  std::size_t keep_;
  std::vector<std::uint8_t> prefix_;
  std::uint64_t total_ = 0;
};

inline std::string strip_parameters(std::string_view mime) {
  std::string_view base = mime.substr(0, mime.find(';'));
  while (!base.empty() && base.back() == ' ') base.remove_suffix(1);
  return std::string(base);
}

}  // namespace detail

inline Analyzer make_checksum_analyzer() {
  SpanReader empty(std::string_view{});
  return {{"checksum", checksum_analyze(empty).signature(), std::nullopt},
          [](const DigitalItem&, ContentReader& r) { return checksum_analyze(r); }};
}

inline Analyzer make_filetype_analyzer(std::shared_ptr<const MagicDb> magic,
                                       std::size_t prefix_bytes = analysis::default_prefix_bytes) {
  std::string sig = filetype_analyze({}, FileKind::regular, *magic).signature();
  return {{"filetype", sig, prefix_bytes}, [magic](const DigitalItem&, ContentReader& r) {
            std::vector<std::uint8_t> prefix = r.read_all();
            return filetype_analyze(prefix, r.kind(), *magic, r.truncated());
          }};
}

inline Analyzer make_strings_analyzer(std::size_t min_run = analysis::default_min_run) {
  SpanReader empty(std::string_view{});
  return {{"strings", strings_analyze(empty, min_run).signature(), std::nullopt},
          [min_run](const DigitalItem&, ContentReader& r) { return strings_analyze(r, min_run); }};
}

inline Analyzer make_validate_analyzer() {
  SpanReader empty(std::string_view{});
  return {{"validate", format_validate(DigitalItem{}, empty).signature(), std::nullopt},
          [](const DigitalItem& item, ContentReader& r) { return format_validate(item, r); }};
}

/// Looks up the item's format token first, then its magic-derived media type.
inline Analyzer make_registry_analyzer(std::shared_ptr<const FormatRegistry> registry,
                                       std::shared_ptr<const MagicDb> magic) {
  return {{"registry", registry_signature(), std::nullopt},
          [registry, magic](const DigitalItem&, ContentReader& r) {
            detail::PrefixTee tee(r, analysis::default_prefix_bytes);
            std::string format = profile_content(tee).validation.format;
            Pdi by_format = registry_lookup(format, *registry);
            if (!by_format.entries().empty()) return by_format;
            Pdi typed = filetype_analyze(tee.prefix(), r.kind(), *magic, tee.truncated());
            std::string mime = detail::strip_parameters(*typed.find("mimeType"));
            Pdi by_mime = registry_lookup(mime, *registry);
            if (!by_mime.entries().empty()) return by_mime;
            return registry_lookup(format, *registry);
          }};
}

inline AnalyzerRegistry builtin_registry(std::shared_ptr<const MagicDb> magic,
                                         std::shared_ptr<const FormatRegistry> registry) {
  AnalyzerRegistry reg;
  reg.add(make_checksum_analyzer());
  reg.add(make_filetype_analyzer(magic));
  reg.add(make_strings_analyzer());
  reg.add(make_validate_analyzer());
  reg.add(make_registry_analyzer(std::move(registry), std::move(magic)));
  return reg;
}

inline AnalyzerRegistry builtin_registry() {
  return builtin_registry(std::make_shared<const MagicDb>(MagicDb::builtin()),
                          std::make_shared<const FormatRegistry>(FormatRegistry::builtin()));
}

}  // namespace d2d
