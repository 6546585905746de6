#pragma once

// Streaming MD5, SHA-1 (OpenSSL EVP) and CRC-32/IEEE (zlib).
// All three accept data in arbitrary chunks; finish() may be called once.

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace d2d {

inline std::span<const std::uint8_t> as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

enum class hex_case { lower, upper };

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& bytes, hex_case c = hex_case::lower) {
  const char* digits = c == hex_case::lower ? "0123456789abcdef" : "0123456789ABCDEF";
  std::string out;
  out.reserve(N * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0F]);
  }
  return out;
}

/// Case-insensitive comparison of two hex renderings.
inline bool hex_equal(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  auto fold = [](char ch) { return (ch >= 'A' && ch <= 'F') ? static_cast<char>(ch + 32) : ch; };
  return std::equal(a.begin(), a.end(), b.begin(), [&](char x, char y) { return fold(x) == fold(y); });
}

namespace detail {

template <std::size_t N, const EVP_MD* (*Algorithm)()>
class EvpHash {
 public:
  using Digest = std::array<std::uint8_t, N>;

  EvpHash() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), Algorithm(), nullptr) != 1)
      throw std::runtime_error("digest initialisation failed");
  }

  void update(std::span<const std::uint8_t> data) {
    if (!data.empty()) EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
  }
  void update(std::string_view s) { update(as_bytes(s)); }

  Digest finish() {
    Digest out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), out.data(), &len);
    return out;
  }

  static Digest of(std::span<const std::uint8_t> data) {
    EvpHash h;
    h.update(data);
    return h.finish();
  }
  static Digest of(std::string_view s) { return of(as_bytes(s)); }

 private:
  struct Free {
    void operator()(EVP_MD_CTX* c) const noexcept { EVP_MD_CTX_free(c); }
  };
  std::unique_ptr<EVP_MD_CTX, Free> ctx_;
};

}  // namespace detail

using Md5 = detail::EvpHash<16, EVP_md5>;
using Sha1 = detail::EvpHash<20, EVP_sha1>;

/// CRC-32/IEEE as zlib computes it: reflected 0xEDB88320, init and xor-out 0xFFFFFFFF.
class Crc32 {
 public:
  void update(std::span<const std::uint8_t> data) noexcept {
    const std::uint8_t* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      auto n = static_cast<uInt>(std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
      crc_ = ::crc32(crc_, p, n);
      p += n;
      left -= n;
    }
  }
  void update(std::string_view s) noexcept { update(as_bytes(s)); }

  std::uint32_t value() const noexcept { return static_cast<std::uint32_t>(crc_); }

  /// Lowercase 8-digit rendering.
  std::string hex() const {
    std::array<std::uint8_t, 4> be{};
    std::uint32_t v = value();
    for (int i = 0; i < 4; ++i) be[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
    return to_hex(be);
  }

  static std::uint32_t of(std::span<const std::uint8_t> data) noexcept {
    Crc32 c;
    c.update(data);
    return c.value();
  }

 private:
  uLong crc_ = ::crc32(0L, Z_NULL, 0);
};

}  // namespace d2d
