#pragma once

// Magic-number rules for file typing. The database is a tab-separated text
// file, one rule per line:
//
//   offset <TAB> hex-pattern <TAB> hex-mask or "-" <TAB> mime <TAB> description
//
// '#' starts a comment line. A rule matches when, for every pattern byte,
// (data[offset + i] & mask[i]) == (pattern[i] & mask[i]).

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/error.hpp"

namespace d2d {

struct MagicRule {
  std::size_t offset = 0;
  std::vector<std::uint8_t> pattern;
  std::vector<std::uint8_t> mask;  ///< empty means all bits significant
  std::string mime;
  std::string description;

  bool matches(std::span<const std::uint8_t> data) const noexcept {
    if (offset + pattern.size() > data.size()) return false;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      std::uint8_t m = mask.empty() ? 0xFF : mask[i];
      if ((data[offset + i] & m) != (pattern[i] & m)) return false;
    }
    return true;
  }
  std::size_t extent() const noexcept { return offset + pattern.size(); }
};

/// An ordered rule list: longest pattern first, file order among equals.
class MagicDb {
 public:
  MagicDb() = default;
  explicit MagicDb(std::vector<MagicRule> rules, std::string origin = "custom") : origin_(std::move(origin)) {
    for (const auto& r : rules) check(r, 0);
    rules_ = std::move(rules);
    std::stable_sort(rules_.begin(), rules_.end(),
                     [](const MagicRule& a, const MagicRule& b) { return a.pattern.size() > b.pattern.size(); });
  }

  static MagicDb parse(std::string_view text, std::string origin = "custom") {
    std::vector<MagicRule> rules;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(start, nl - start);
      start = nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      std::vector<std::string> fields;
      std::size_t p = 0;
      while (true) {
        std::size_t tab = line.find('\t', p);
        fields.emplace_back(line.substr(p, tab == std::string_view::npos ? std::string_view::npos : tab - p));
        if (tab == std::string_view::npos) break;
        p = tab + 1;
      }
      if (fields.size() != 5) fail(line_no, "expected 5 tab-separated fields, got " + std::to_string(fields.size()));
      MagicRule r;
      try {
        std::size_t used = 0;
        r.offset = std::stoul(fields[0], &used, 0);
        if (used != fields[0].size()) throw std::invalid_argument("offset");
      } catch (const std::exception&) {
        fail(line_no, "bad offset '" + fields[0] + "'");
      }
      r.pattern = hex_bytes(fields[1], line_no);
      if (fields[2] != "-") r.mask = hex_bytes(fields[2], line_no);
      r.mime = fields[3];
      r.description = fields[4];
      check(r, line_no);
      rules.push_back(std::move(r));
    }
    if (rules.empty()) throw Error(errc::parse_error, "magic database has no rules");
    return MagicDb(std::move(rules), std::move(origin));
  }

  static MagicDb load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open magic database " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  /// The rule set compiled into the library.
  static const MagicDb& builtin();

  /// First matching rule, or nullptr.
  const MagicRule* match(std::span<const std::uint8_t> data) const noexcept {
    for (const auto& r : rules_)
      if (r.matches(data)) return &r;
    return nullptr;
  }

  const std::vector<MagicRule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const std::string& origin() const noexcept { return origin_; }

 private:
  [[noreturn]] static void fail(std::size_t line, const std::string& msg) {
    throw Error(errc::parse_error, "magic line " + std::to_string(line) + ": " + msg);
  }

  static void check(const MagicRule& r, std::size_t line) {
    if (r.pattern.empty()) fail(line, "empty pattern");
    if (!r.mask.empty() && r.mask.size() != r.pattern.size()) fail(line, "mask length differs from pattern length");
    if (r.mime.empty()) fail(line, "empty media type");
  }

  static std::vector<std::uint8_t> hex_bytes(const std::string& s, std::size_t line) {
    if (s.empty() || s.size() % 2 != 0) fail(line, "hex field must have an even, non-zero number of digits");
    auto nibble = [&](char c) -> std::uint8_t {
      if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
      fail(line, "bad hex digit '" + std::string(1, c) + "'");
    };
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < s.size(); i += 2)
      out.push_back(static_cast<std::uint8_t>(nibble(s[i]) << 4 | nibble(s[i + 1])));
    return out;
  }

  std::vector<MagicRule> rules_;
  std::string origin_;
};

inline constexpr std::string_view builtin_magic_text =
    "# offset\tpattern\tmask\tmime\tdescription\n"
    "0\t504b0304\t-\tapplication/zip\tZip archive data\n"
    "0\t504b0506\t-\tapplication/zip\tZip archive data (empty)\n"
    "0\t1f8b\t-\tapplication/gzip\tgzip compressed data\n"
    "257\t7573746172\t-\tapplication/x-tar\tPOSIX tar archive\n"
    "0\t425a68\t-\tapplication/x-bzip2\tbzip2 compressed data\n"
    "0\t377abcaf271c\t-\tapplication/x-7z-compressed\t7-zip archive data\n"
    "0\t255044462d\t-\tapplication/pdf\tPDF document\n"
    "0\t25215053\t-\tapplication/postscript\tPostScript document text\n"
    "0\t7b5c727466\t-\ttext/rtf\tRich Text Format data\n"
    "0\tffd8ff\t-\timage/jpeg\tJPEG image data\n"
    "0\t89504e470d0a1a0a\t-\timage/png\tPNG image data\n"
    "0\t474946383761\t-\timage/gif\tGIF image data, version 87a\n"
    "0\t474946383961\t-\timage/gif\tGIF image data, version 89a\n"
    "0\t49492a00\t-\timage/tiff\tTIFF image data, little-endian\n"
    "0\t4d4d002a\t-\timage/tiff\tTIFF image data, big-endian\n"
    "8\t57415645\t-\taudio/x-wav\tRIFF (little-endian) data, WAVE audio\n"
    "8\t41494646\t-\taudio/x-aiff\tIFF data, AIFF audio\n"
    "0\t494433\t-\taudio/mpeg\tAudio file with ID3 tag\n"
    "0\t4f676753\t-\tapplication/ogg\tOgg data\n"
    "0\t664c6143\t-\taudio/flac\tFLAC audio bitstream data\n"
    "0\t3c3f786d6c\t-\ttext/xml\tXML document text\n"
    "0\tefbbbf3c3f786d6c\t-\ttext/xml\tXML document text (with BOM)\n"
    "0\t3c21444f43545950452048544d4c\tffffdfdfdfdfdfdfdfffdfdfdfdf\ttext/html\tHTML document text\n"
    "0\t3c48544d4c\tffdfdfdfdf\ttext/html\tHTML document text\n"
    "0\td0cf11e0a1b11ae1\t-\tapplication/x-ole-storage\tMicrosoft OLE2 Compound Document\n"
    "0\t7f454c46\t-\tapplication/x-executable\tELF executable\n"
    "0\t2321\t-\ttext/x-shellscript\tscript text executable\n";

inline const MagicDb& MagicDb::builtin() {
  static const MagicDb db = MagicDb::parse(builtin_magic_text, "builtin");
  return db;
}

}  // namespace d2d
