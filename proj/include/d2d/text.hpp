#pragma once

// Small text utilities shared by the ingest, analyzer and emitter modules.

#include <cstdint>
#include <ctime>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/error.hpp"

namespace d2d::text {

/// Length of the well-formed UTF-8 sequence starting at s[i], or 0 when the
/// bytes there are not a complete, shortest-form, non-surrogate sequence.
inline std::size_t utf8_sequence_length(std::string_view s, std::size_t i) noexcept {
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = at(i);
  if (b0 < 0x80) return 1;
  std::size_t need;
  std::uint32_t cp;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    need = 2;
    cp = b0 & 0x1F;
  } else if (b0 >= 0xE0 && b0 <= 0xEF) {
    need = 3;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xF0 && b0 <= 0xF4) {
    need = 4;
    cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + need > s.size()) return 0;
  for (std::size_t k = 1; k < need; ++k) {
    unsigned char c = at(i + k);
    if ((c & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (c & 0x3F);
  }
  if (need == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) return 0;
  if (need == 4 && (cp < 0x10000 || cp > 0x10FFFF)) return 0;
  return need;
}

inline bool is_valid_utf8(std::string_view s) noexcept {
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = utf8_sequence_length(s, i);
    if (n == 0) return false;
    i += n;
  }
  return true;
}

/// Decodes one code point; caller guarantees a valid sequence of length n.
inline std::uint32_t decode_utf8(std::string_view s, std::size_t i, std::size_t n) noexcept {
  auto at = [&](std::size_t k) { return static_cast<std::uint32_t>(static_cast<unsigned char>(s[k])); };
  switch (n) {
    case 1: return at(i);
    case 2: return (at(i) & 0x1F) << 6 | (at(i + 1) & 0x3F);
    case 3: return (at(i) & 0x0F) << 12 | (at(i + 1) & 0x3F) << 6 | (at(i + 2) & 0x3F);
    default:
      return (at(i) & 0x07) << 18 | (at(i + 1) & 0x3F) << 12 | (at(i + 2) & 0x3F) << 6 | (at(i + 3) & 0x3F);
  }
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// XML 1.0 Char production.
constexpr bool is_xml_char(std::uint32_t cp) noexcept {
  return cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) || (cp >= 0xE000 && cp <= 0xFFFD) ||
         (cp >= 0x10000 && cp <= 0x10FFFF);
}

inline constexpr std::string_view replacement_character = "\xEF\xBF\xBD";

/// Replaces every invalid UTF-8 byte and every code point outside the XML 1.0
/// Char production with U+FFFD. The result is always representable in XML.
inline std::string sanitize_xml_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = utf8_sequence_length(s, i);
    if (n == 0) {
      out += replacement_character;
      ++i;
      continue;
    }
    std::uint32_t cp = decode_utf8(s, i, n);
    if (is_xml_char(cp))
      out.append(s.substr(i, n));
    else
      out += replacement_character;
    i += n;
  }
  return out;
}

inline bool is_xml_safe(std::string_view s) noexcept {
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = utf8_sequence_length(s, i);
    if (n == 0 || !is_xml_char(decode_utf8(s, i, n))) return false;
    i += n;
  }
  return true;
}

/// Makes an archive entry name safe for UTF-8 XML output. Names that are valid
/// UTF-8 without control characters are returned unchanged; otherwise every
/// offending byte, and every '%', is written as %XX.
inline std::string percent_encode_name(std::string_view raw) {
  auto clean = [&] {
    for (std::size_t i = 0; i < raw.size();) {
      std::size_t n = utf8_sequence_length(raw, i);
      if (n == 0) return false;
      std::uint32_t cp = decode_utf8(raw, i, n);
      if (cp < 0x20 || cp == 0x7F || !is_xml_char(cp)) return false;
      i += n;
    }
    return true;
  };
  if (clean()) return std::string(raw);
  static constexpr char digits[] = "0123456789ABCDEF";
  std::string out;
  auto encode = [&](unsigned char b) {
    out.push_back('%');
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  };
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t n = utf8_sequence_length(raw, i);
    if (n == 0) {
      encode(static_cast<unsigned char>(raw[i]));
      ++i;
      continue;
    }
    std::uint32_t cp = decode_utf8(raw, i, n);
    if (cp < 0x20 || cp == 0x7F || cp == '%' || !is_xml_char(cp)) {
      for (std::size_t k = 0; k < n; ++k) encode(static_cast<unsigned char>(raw[i + k]));
    } else {
      out.append(raw.substr(i, n));
    }
    i += n;
  }
  return out;
}

inline std::string base64_encode(std::span<const std::uint8_t> data) {
  static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16 | static_cast<std::uint32_t>(data[i + 1]) << 8 | data[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  std::size_t rest = data.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
    if (rest == 2) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? alphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

/// Decodes base64, ignoring XML whitespace. Throws encoding_error on bad input.
inline std::vector<std::uint8_t> base64_decode(std::string_view s) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  int pad = 0;
  for (char c : s) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    if (c == '=') {
      ++pad;
      continue;
    }
    int v = value(c);
    if (v < 0 || pad > 0) throw Error(errc::encoding_error, "invalid base64 input");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> bits));
    }
  }
  if (pad > 2) throw Error(errc::encoding_error, "invalid base64 padding");
  return out;
}

/// ISO-8601 rendering in UTC with an explicit numeric offset, e.g.
/// "2005-12-01T18:21:49+00:00".
inline std::string iso8601_utc(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S+00:00", &tm);
  return buf;
}

/// True when s is non-empty and holds no ASCII whitespace.
inline bool is_token(std::string_view s) noexcept {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return false;
  return true;
}

}  // namespace d2d::text
