#pragma once

// Fixture builders shared by the suites: archive writers (ustar, gzip, zip on
// zlib), scratch directories and a subprocess runner.

#include <stdlib.h>
#include <sys/wait.h>
#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fixtures {

namespace fs = std::filesystem;

struct Entry {
  std::string name;
  std::string data;
  char type = '0';  // ustar typeflag; '2' symlink (data is the target), '5' directory
};

class TempDir {
 public:
  TempDir() {
    std::string templ = (fs::temp_directory_path() / "d2d-test-XXXXXX").string();
    if (!::mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- ustar -----------------------------------------------------------------

inline void put_octal(char* field, std::size_t len, std::uint64_t v) {
  std::snprintf(field, len, "%0*llo", static_cast<int>(len - 1), static_cast<unsigned long long>(v));
}

inline std::string tar_bytes(const std::vector<Entry>& entries, std::int64_t mtime = 1133461309) {
  std::string out;
  for (const auto& e : entries) {
    std::array<char, 512> h{};
    std::string name = e.name, prefix;
    if (name.size() > 100) {
      std::size_t cut = name.rfind('/', 155);
      if (cut == std::string::npos || name.size() - cut - 1 > 100) throw std::runtime_error("name too long for ustar");
      prefix = name.substr(0, cut);
      name = name.substr(cut + 1);
    }
    std::memcpy(h.data(), name.data(), name.size());
    put_octal(h.data() + 100, 8, e.type == '5' ? 0755 : 0644);
    put_octal(h.data() + 108, 8, 0);
    put_octal(h.data() + 116, 8, 0);
    put_octal(h.data() + 124, 12, e.type == '0' ? e.data.size() : 0);
    put_octal(h.data() + 136, 12, static_cast<std::uint64_t>(mtime));
    std::memset(h.data() + 148, ' ', 8);
    h[156] = e.type;
    if (e.type == '2') std::memcpy(h.data() + 157, e.data.data(), std::min<std::size_t>(e.data.size(), 100));
    std::memcpy(h.data() + 257, "ustar", 6);
    std::memcpy(h.data() + 263, "00", 2);
    std::memcpy(h.data() + 345, prefix.data(), prefix.size());
    unsigned sum = 0;
    for (char c : h) sum += static_cast<unsigned char>(c);
    std::snprintf(h.data() + 148, 8, "%06o", sum);
    h[155] = ' ';
    out.append(h.data(), h.size());
    if (e.type == '0') {
      out += e.data;
      out.append((512 - e.data.size() % 512) % 512, '\0');
    }
  }
  out.append(1024, '\0');
  return out;
}

// ---- zlib wrappers ---------------------------------------------------------

inline std::string deflate_with(std::string_view data, int window_bits) {
  z_stream z{};
  if (deflateInit2(&z, Z_DEFAULT_COMPRESSION, Z_DEFLATED, window_bits, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2");
  std::string out(deflateBound(&z, static_cast<uLong>(data.size())) + 64, '\0');
  z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  z.avail_in = static_cast<uInt>(data.size());
  z.next_out = reinterpret_cast<Bytef*>(out.data());
  z.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&z, Z_FINISH);
  deflateEnd(&z);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate");
  out.resize(z.total_out);
  return out;
}

inline std::string gzip(std::string_view data) { return deflate_with(data, 15 + 16); }

inline std::string tar_gz_bytes(const std::vector<Entry>& entries) { return gzip(tar_bytes(entries)); }

// ---- zip -------------------------------------------------------------------

inline void le(std::string& s, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) s += static_cast<char>((v >> (8 * i)) & 0xFF);
}

/// Regular entries are deflated when that helps; names ending in '/' are
/// directory entries.
inline std::string zip_bytes(const std::vector<Entry>& entries) {
  std::string out, central;
  const std::uint16_t dos_time = (13 << 11) | (21 << 5) | (48 / 2);
  const std::uint16_t dos_date = ((2005 - 1980) << 9) | (12 << 5) | 1;
  for (const auto& e : entries) {
    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(e.data.data()), static_cast<uInt>(e.data.size())));
    std::string packed = deflate_with(e.data, -15);
    std::uint16_t method = 8;
    if (packed.size() >= e.data.size()) {
      packed = e.data;
      method = 0;
    }
    std::uint32_t offset = static_cast<std::uint32_t>(out.size());
    std::string local;
    le(local, 0x04034b50, 4);
    le(local, 20, 2);
    le(local, 0, 2);
    le(local, method, 2);
    le(local, dos_time, 2);
    le(local, dos_date, 2);
    le(local, crc, 4);
    le(local, packed.size(), 4);
    le(local, e.data.size(), 4);
    le(local, e.name.size(), 2);
    le(local, 0, 2);
    out += local + e.name + packed;

    le(central, 0x02014b50, 4);
    le(central, 0x031E, 2);  // made by unix
    le(central, 20, 2);
    le(central, 0, 2);
    le(central, method, 2);
    le(central, dos_time, 2);
    le(central, dos_date, 2);
    le(central, crc, 4);
    le(central, packed.size(), 4);
    le(central, e.data.size(), 4);
    le(central, e.name.size(), 2);
    le(central, 0, 2);
    le(central, 0, 2);
    le(central, 0, 2);
    le(central, 0, 2);
    std::uint32_t mode = e.type == '2' ? 0120777u : (e.name.ends_with('/') ? 040755u : 0100644u);
    le(central, static_cast<std::uint64_t>(mode) << 16, 4);
    le(central, offset, 4);
    central += e.name;
  }
  std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  le(out, 0x06054b50, 4);
  le(out, 0, 2);
  le(out, 0, 2);
  le(out, entries.size(), 2);
  le(out, entries.size(), 2);
  le(out, central.size(), 4);
  le(out, cd_offset, 4);
  le(out, 0, 2);
  return out;
}

// ---- content ---------------------------------------------------------------

/// Deterministic pseudo-random bytes; `text` restricts them to printable ASCII
/// with LF line breaks.
inline std::string random_bytes(std::size_t n, std::uint64_t seed, bool text = false) {
  std::mt19937_64 rng(seed);
  std::string s(n, '\0');
  if (text) {
    std::uniform_int_distribution<int> d(0x20, 0x7E);
    for (std::size_t i = 0; i < n; ++i) s[i] = (i % 72 == 71) ? '\n' : static_cast<char>(d(rng));
  } else {
    std::uniform_int_distribution<int> d(0, 255);
    for (auto& c : s) c = static_cast<char>(d(rng));
  }
  return s;
}

// ---- subprocesses ----------------------------------------------------------

struct ProcessResult {
  int status = -1;
  std::string output;
};

inline std::string shell_quote(std::string_view s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'')
      q += "'\\''";
    else
      q += c;
  }
  return q + "'";
}

/// Runs a shell command, capturing stdout (stderr too when merge_stderr).
inline ProcessResult run(const std::string& command, bool merge_stderr = true) {
  std::string cmd = command + (merge_stderr ? " 2>&1" : "");
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  ProcessResult r;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

inline bool have_python() {
#ifdef D2D_PYTHON
  return std::string_view(D2D_PYTHON).size() > 0 && run(shell_quote(D2D_PYTHON) + " -c pass").status == 0;
#else
  return false;
#endif
}

/// Runs a Python snippet with the given arguments and returns stdout.
inline ProcessResult python(const std::string& code, const std::vector<std::string>& args = {}) {
  std::string cmd = shell_quote(D2D_PYTHON) + " -c " + shell_quote(code);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  return run(cmd);
}

inline bool python_has(std::string_view module) {
  return have_python() && python("import " + std::string(module)).status == 0;
}

inline std::string cli() { return D2D_CLI_PATH; }
inline fs::path source_dir() { return D2D_SOURCE_DIR; }

}  // namespace fixtures
