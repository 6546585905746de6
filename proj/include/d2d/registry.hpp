#pragma once

// Local format registry: canonical format names mapped to persistent URIs of
// the form "info:gdfr/fred/f/<slug>". One "format_name<TAB>uri" row per line.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/error.hpp"

namespace d2d {

inline constexpr std::string_view registry_uri_prefix = "info:gdfr/fred/f/";

struct RegistryEntry {
  std::string format_name;
  std::string uri;

  friend bool operator==(const RegistryEntry&, const RegistryEntry&) = default;
};

inline bool is_valid_registry_uri(std::string_view uri) noexcept {
  if (uri.substr(0, registry_uri_prefix.size()) != registry_uri_prefix) return false;
  std::string_view slug = uri.substr(registry_uri_prefix.size());
  if (slug.empty()) return false;
  for (char c : slug)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
  return true;
}

class FormatRegistry {
 public:
  FormatRegistry() = default;
  explicit FormatRegistry(std::vector<RegistryEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_)
      if (!is_valid_registry_uri(e.uri)) throw Error(errc::parse_error, "bad registry URI '" + e.uri + "'");
  }

  static FormatRegistry parse(std::string_view text) {
    std::vector<RegistryEntry> rows;
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(start, nl - start);
      start = nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos || tab == 0)
        throw Error(errc::parse_error, "registry line " + std::to_string(line_no) + ": expected format_name<TAB>uri");
      RegistryEntry e{std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))};
      if (!is_valid_registry_uri(e.uri))
        throw Error(errc::parse_error, "registry line " + std::to_string(line_no) + ": bad URI '" + e.uri + "'");
      rows.push_back(std::move(e));
    }
    return FormatRegistry(std::move(rows));
  }

  static FormatRegistry load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open registry " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  static const FormatRegistry& builtin();

  /// Exact match on the format name, or nullptr.
  const RegistryEntry* find(std::string_view format_name) const noexcept {
    for (const auto& e : entries_)
      if (e.format_name == format_name) return &e;
    return nullptr;
  }

  const std::vector<RegistryEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<RegistryEntry> entries_;
};

inline constexpr std::string_view builtin_registry_text =
    "# format_name\turi\n"
    "ASCII\tinfo:gdfr/fred/f/ascii\n"
    "XML\tinfo:gdfr/fred/f/xml\n"
    "application/pdf\tinfo:gdfr/fred/f/pdf\n"
    "application/postscript\tinfo:gdfr/fred/f/postscript\n"
    "application/zip\tinfo:gdfr/fred/f/zip\n"
    "application/gzip\tinfo:gdfr/fred/f/gzip\n"
    "application/x-tar\tinfo:gdfr/fred/f/tar\n"
    "image/jpeg\tinfo:gdfr/fred/f/jpeg\n"
    "image/png\tinfo:gdfr/fred/f/png\n"
    "image/gif\tinfo:gdfr/fred/f/gif\n"
    "image/tiff\tinfo:gdfr/fred/f/tiff\n"
    "audio/x-wav\tinfo:gdfr/fred/f/wave\n"
    "audio/x-aiff\tinfo:gdfr/fred/f/aiff\n"
    "text/html\tinfo:gdfr/fred/f/html\n"
    "text/rtf\tinfo:gdfr/fred/f/rtf\n"
    "application/x-ole-storage\tinfo:gdfr/fred/f/ole2\n";

inline const FormatRegistry& FormatRegistry::builtin() {
  static const FormatRegistry reg = FormatRegistry::parse(builtin_registry_text);
  return reg;
}

}  // namespace d2d
