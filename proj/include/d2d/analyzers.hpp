#pragma once

// Native analysis techniques. Each takes item content through a byte reader
// (anything with `std::size_t read(std::span<std::uint8_t>)` returning 0 at
// end of stream) and returns a Pdi whose entries are classified per the
// PDI mapping.

#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "d2d/digest.hpp"
#include "d2d/magic.hpp"
#include "d2d/model.hpp"
#include "d2d/registry.hpp"
#include "d2d/text.hpp"
#include "d2d/xml.hpp"

namespace d2d {

template <typename R>
concept ByteReader = requires(R& r, std::span<std::uint8_t> buf) {
  { r.read(buf) } -> std::convertible_to<std::size_t>;
};

/// Reads from an in-memory buffer.
class SpanReader {
 public:
  explicit SpanReader(std::span<const std::uint8_t> data) noexcept : data_(data) {}
  explicit SpanReader(std::string_view s) noexcept : data_(as_bytes(s)) {}

  std::size_t read(std::span<std::uint8_t> buf) noexcept {
    std::size_t n = std::min(buf.size(), data_.size() - pos_);
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), n, buf.begin());
    pos_ += n;
    return n;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

namespace analysis {

inline constexpr std::size_t chunk_size = 64 * 1024;
inline constexpr std::size_t default_prefix_bytes = 8192;
inline constexpr std::size_t default_min_run = 4;

inline std::string environment() {
  std::string env;
#if defined(__clang__)
  env = "clang " __clang_version__;
#elif defined(__GNUC__)
  env = "gcc " __VERSION__;
#else
  env = "unknown compiler";
#endif
#if defined(__linux__)
  env += "; Linux";
#elif defined(__APPLE__)
  env += "; Darwin";
#endif
#if defined(__x86_64__)
  env += " x86_64";
#elif defined(__aarch64__)
  env += " aarch64";
#endif
  return env;
}

inline std::string signature(std::string_view tool, std::string_view detail) {
  return "d2d " + std::string(tool) + " 1.0 (" + std::string(detail) + ") [" + environment() + "]";
}

template <ByteReader R, typename F>
void for_each_chunk(R& reader, F&& f) {
  std::vector<std::uint8_t> buf(chunk_size);
  while (true) {
    std::size_t got = reader.read(std::span<std::uint8_t>(buf));
    if (got == 0) break;
    f(std::span<const std::uint8_t>(buf.data(), got));
  }
}

constexpr bool is_text_byte(std::uint8_t b) noexcept {
  return b == 0x09 || b == 0x0A || b == 0x0D || (b >= 0x20 && b <= 0x7E);
}

constexpr bool is_printable(std::uint8_t b) noexcept { return b == 0x09 || (b >= 0x20 && b <= 0x7E); }

}  // namespace analysis

// ---------------------------------------------------------------------------
// Message digests

/// SHA-1 and MD5 (uppercase hex) in one streaming pass.
template <ByteReader R>
Pdi checksum_analyze(R& reader) {
  Md5 md5;
  Sha1 sha1;
  analysis::for_each_chunk(reader, [&](std::span<const std::uint8_t> chunk) {
    md5.update(chunk);
    sha1.update(chunk);
  });
  std::string sha_hex = to_hex(sha1.finish(), hex_case::upper);
  std::string md5_hex = to_hex(md5.finish(), hex_case::upper);
  Pdi pdi(analysis::signature("checksum", "message digests MD5, SHA-1"));
  pdi.add("SHA", sha_hex);
  pdi.add("MD5", md5_hex);
  pdi.set_raw_output("SHA:" + sha_hex + " MD5:" + md5_hex);
  return pdi;
}

/// CRC-32/IEEE of the stream as 8 lowercase hex digits.
template <ByteReader R>
std::string crc32(R& reader) {
  Crc32 crc;
  analysis::for_each_chunk(reader, [&](std::span<const std::uint8_t> chunk) { crc.update(chunk); });
  return crc.hex();
}

// ---------------------------------------------------------------------------
// File typing

enum class FileKind { regular, directory, symlink, special };

struct FileTypeResult {
  std::string mime;
  std::string description;
};

/// Charset test over a content prefix. A multi-byte sequence cut off by the
/// end of a truncated prefix does not disqualify UTF-8.
inline FileTypeResult classify_text(std::span<const std::uint8_t> prefix, bool truncated) {
  bool ascii = true;
  for (std::uint8_t b : prefix)
    if (!analysis::is_text_byte(b)) {
      ascii = false;
      break;
    }
  if (ascii) return {"text/plain; charset=us-ascii", "ASCII text"};
  std::string_view s(reinterpret_cast<const char*>(prefix.data()), prefix.size());
  bool utf8 = true;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = text::utf8_sequence_length(s, i);
    if (n == 0) {
      // Incomplete trailing sequence of a truncated prefix.
      if (truncated && s.size() - i < 4) {
        unsigned char lead = static_cast<unsigned char>(s[i]);
        std::size_t want = lead >= 0xF0 ? 4 : lead >= 0xE0 ? 3 : lead >= 0xC2 ? 2 : 0;
        bool continuation_ok = want > s.size() - i;
        for (std::size_t k = i + 1; k < s.size() && continuation_ok; ++k)
          continuation_ok = (static_cast<unsigned char>(s[k]) & 0xC0) == 0x80;
        if (continuation_ok) break;
      }
      utf8 = false;
      break;
    }
    std::uint32_t cp = text::decode_utf8(s, i, n);
    if (n == 1 && !analysis::is_text_byte(static_cast<std::uint8_t>(cp))) {
      utf8 = false;
      break;
    }
    i += n;
  }
  if (utf8) return {"text/plain; charset=utf-8", "UTF-8 Unicode text"};
  return {"application/octet-stream", "data"};
}

/// File-system test, then magic rules, then the charset test.
inline Pdi filetype_analyze(std::span<const std::uint8_t> prefix, FileKind kind, const MagicDb& magic_db,
                            bool truncated = false) {
  if (magic_db.empty()) throw Error(errc::invalid_argument, "magic database is empty");
  Pdi pdi(analysis::signature("filetype", "magic " + magic_db.origin() + ", " + std::to_string(magic_db.size()) + " rules"));
  FileTypeResult r;
  switch (kind) {
    case FileKind::directory: r = {"inode/directory", "directory"}; break;
    case FileKind::symlink: r = {"inode/symlink", "symbolic link"}; break;
    case FileKind::special: r = {"inode/x-special", "special file"}; break;
    case FileKind::regular:
      if (prefix.empty()) {
        r = {"application/x-empty", "empty"};
      } else if (const MagicRule* rule = magic_db.match(prefix)) {
        r = {rule->mime, rule->description};
      } else {
        r = classify_text(prefix, truncated);
      }
      break;
  }
  pdi.add("mimeType", r.mime);
  pdi.set_raw_output(r.description);
  return pdi;
}

// ---------------------------------------------------------------------------
// Printable characters

/// Maximal runs of printable bytes (0x20-0x7E, TAB) of at least min_run
/// bytes, joined by single spaces.
template <ByteReader R>
std::string extract_strings(R& reader, std::size_t min_run = analysis::default_min_run) {
  if (min_run == 0) throw Error(errc::invalid_argument, "min_run must be at least 1");
  std::string out;
  std::string run;
  auto flush = [&] {
    if (run.size() >= min_run) {
      if (!out.empty()) out += ' ';
      out += run;
    }
    run.clear();
  };
  analysis::for_each_chunk(reader, [&](std::span<const std::uint8_t> chunk) {
    for (std::uint8_t b : chunk) {
      if (analysis::is_printable(b))
        run.push_back(static_cast<char>(b));
      else if (!run.empty())
        flush();
    }
  });
  flush();
  return out;
}

template <ByteReader R>
Pdi strings_analyze(R& reader, std::size_t min_run = analysis::default_min_run) {
  std::string found = extract_strings(reader, min_run);
  Pdi pdi(analysis::signature("strings", "printable runs >= " + std::to_string(min_run) + " bytes"));
  pdi.add("rawCharacters", found);
  pdi.set_raw_output(found);
  return pdi;
}

// ---------------------------------------------------------------------------
// Format identification and validation

inline constexpr std::string_view status_valid = "Well-formed and valid";
inline constexpr std::string_view status_well_formed = "Well-formed";
inline constexpr std::string_view status_not_well_formed = "Not well-formed";

struct ValidationResult {
  std::string format;
  std::string status;
  std::string mime;
  std::vector<std::pair<std::string, std::string>> properties;
};

/// True when the content starts like an XML document: optional UTF-8 BOM,
/// optional whitespace, then "<?xml" or '<' followed by a name start character.
inline bool sniff_xml(std::span<const std::uint8_t> head) noexcept {
  std::size_t i = 0;
  if (head.size() >= 3 && head[0] == 0xEF && head[1] == 0xBB && head[2] == 0xBF) i = 3;
  while (i < head.size() && (head[i] == ' ' || head[i] == '\t' || head[i] == '\n' || head[i] == '\r')) ++i;
  if (i >= head.size() || head[i] != '<') return false;
  if (i + 1 >= head.size()) return false;
  std::uint8_t c = head[i + 1];
  return c == '?' || c == '!' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' || c >= 0x80;
}

/// ASCII module: "Not well-formed" if any byte is above 0x7F, "Well-formed"
/// if control characters other than TAB/LF/CR occur, otherwise valid.
inline ValidationResult validate_ascii(std::span<const std::uint8_t> content) {
  ValidationResult r{"ASCII", std::string(status_valid), "text/plain; charset=US-ASCII", {}};
  std::size_t lf = 0, cr = 0, crlf = 0;
  for (std::size_t i = 0; i < content.size(); ++i) {
    std::uint8_t b = content[i];
    if (b > 0x7F) {
      r.status = status_not_well_formed;
    } else if (!analysis::is_text_byte(b) && r.status == status_valid) {
      r.status = status_well_formed;
    }
    if (b == '\r') {
      if (i + 1 < content.size() && content[i + 1] == '\n') {
        ++crlf;
        ++i;
      } else {
        ++cr;
      }
    } else if (b == '\n') {
      ++lf;
    }
  }
  int kinds = (lf > 0) + (cr > 0) + (crlf > 0);
  if (kinds > 1)
    r.properties.emplace_back("LineEndings", "mixed");
  else if (lf)
    r.properties.emplace_back("LineEndings", "LF");
  else if (cr)
    r.properties.emplace_back("LineEndings", "CR");
  else if (crlf)
    r.properties.emplace_back("LineEndings", "CRLF");
  return r;
}

/// XML module: well-formedness always; "Well-formed and valid" when every
/// locally checkable constraint holds (namespace well-formedness, no
/// external DTD or schema that would need fetching), "Well-formed" otherwise.
inline ValidationResult validate_xml(std::span<const std::uint8_t> content) {
  ValidationResult r{"XML", std::string(status_not_well_formed), "text/xml", {}};
  std::string_view s(reinterpret_cast<const char*>(content.data()), content.size());
  try {
    xml::Document doc = xml::parse(s);
    bool valid = doc.namespace_errors.empty() && !doc.has_external_subset && !doc.references_schema;
    r.status = valid ? status_valid : status_well_formed;
    r.properties.emplace_back("XMLVersion", doc.version);
    if (!doc.encoding.empty()) r.properties.emplace_back("Encoding", doc.encoding);
    r.properties.emplace_back("RootElement", doc.root.qname);
    if (!doc.namespace_errors.empty()) r.properties.emplace_back("NamespaceError", doc.namespace_errors.front());
  } catch (const Error& e) {
    r.properties.emplace_back("ParseError", e.what());
  }
  return r;
}

inline ValidationResult validate_bytestream() {
  return {"bytestream", std::string(status_valid), "application/octet-stream", {}};
}

/// Everything format_validate learns from one pass over the content.
struct ContentProfile {
  std::uint64_t size = 0;
  std::string crc32;  ///< lowercase
  std::string md5;    ///< lowercase
  std::string sha1;   ///< lowercase
  ValidationResult validation;
};

/// One streaming pass: digests plus module dispatch. A well-formed XML
/// document goes to the XML module; otherwise all-text content goes to the
/// ASCII module and anything else (including empty files) to bytestream.
template <ByteReader R>
ContentProfile profile_content(R& reader) {
  ContentProfile p;
  Crc32 crc;
  Md5 md5;
  Sha1 sha1;
  bool all_text = true;
  bool first = true;
  bool xml_candidate = false;
  std::vector<std::uint8_t> buffered;
  analysis::for_each_chunk(reader, [&](std::span<const std::uint8_t> chunk) {
    if (first) {
      xml_candidate = sniff_xml(chunk);
      first = false;
    }
    crc.update(chunk);
    md5.update(chunk);
    sha1.update(chunk);
    p.size += chunk.size();
    if (all_text)
      for (std::uint8_t b : chunk)
        if (!analysis::is_text_byte(b)) {
          all_text = false;
          break;
        }
    if (xml_candidate || all_text) buffered.insert(buffered.end(), chunk.begin(), chunk.end());
  });
  p.crc32 = crc.hex();
  p.md5 = to_hex(md5.finish());
  p.sha1 = to_hex(sha1.finish());
  std::span<const std::uint8_t> content(buffered);
  if (xml_candidate) {
    ValidationResult xr = validate_xml(content);
    if (xr.status != status_not_well_formed) {
      p.validation = std::move(xr);
      return p;
    }
  }
  if (p.size > 0 && all_text)
    p.validation = validate_ascii(content);
  else
    p.validation = validate_bytestream();
  return p;
}

/// Format token for registry lookups and reports: "XML", "ASCII" or "bytestream".
template <ByteReader R>
std::string identify_format(R& reader) {
  return profile_content(reader).validation.format;
}

namespace detail {

inline std::string jhove_fragment(const DigitalItem& item, const ContentProfile& p) {
  std::string x;
  auto element = [&](std::string_view name, std::string_view value) {
    x += "<";
    x += name;
    x += ">";
    xml::escape_text(x, value);
    x += "</";
    x += name;
    x += ">\n";
  };
  x += "<repInfo uri=\"";
  xml::escape_attribute(x, item.relative_path);
  x += "\">\n";
  element("reportingModule", p.validation.format + "-d2d");
  element("lastModified", item.last_modified);
  element("size", std::to_string(p.size));
  element("format", p.validation.format);
  element("status", p.validation.status);
  element("mimeType", p.validation.mime);
  if (!p.validation.properties.empty()) {
    x += "<properties>\n<property>\n<name>" + p.validation.format + "Metadata</name>\n";
    x += "<values arity=\"List\" type=\"Property\">\n";
    for (const auto& [name, value] : p.validation.properties) {
      x += "<property>\n";
      element("name", name);
      x += "<values arity=\"List\" type=\"String\">\n";
      element("value", value);
      x += "</values>\n</property>\n";
    }
    x += "</values>\n</property>\n</properties>\n";
  }
  x += "<checksums>\n";
  x += "<checksum type=\"CRC32\">" + p.crc32 + "</checksum>\n";
  x += "<checksum type=\"MD5\">" + p.md5 + "</checksum>\n";
  x += "<checksum type=\"SHA-1\">" + p.sha1 + "</checksum>\n";
  x += "</checksums>\n</repInfo>";
  return x;
}

}  // namespace detail

/// Identification, validation and characterization of one item.
template <ByteReader R>
Pdi format_validate(const DigitalItem& item, R& reader) {
  ContentProfile p = profile_content(reader);
  Pdi pdi(analysis::signature("validate", "modules ASCII, XML, bytestream"));
  pdi.add("lastModified", item.last_modified);
  pdi.add("mimeType", p.validation.mime);
  pdi.add("format", p.validation.format);
  pdi.add("status", p.validation.status);
  pdi.add("uri", item.relative_path);
  pdi.add("CRC32", p.crc32);
  pdi.add("MD5", p.md5);
  pdi.add("SHA-1", p.sha1);
  pdi.add("size", std::to_string(p.size));
  pdi.set_raw_output(detail::jhove_fragment(item, p));
  return pdi;
}

// ---------------------------------------------------------------------------
// Format registry

inline std::string registry_signature() { return analysis::signature("registry", "local format registry"); }

inline Pdi registry_lookup(std::string_view format_name, const FormatRegistry& registry) {
  Pdi pdi(registry_signature());
  if (const RegistryEntry* e = registry.find(format_name)) {
    pdi.add("registryUri", e->uri);
    pdi.set_raw_output(e->uri);
  } else {
    pdi.set_raw_output("no registry entry for '" + std::string(format_name) + "'");
  }
  return pdi;
}

}  // namespace d2d
