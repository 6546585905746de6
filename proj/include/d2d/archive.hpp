#pragma once

// Submission phase: identify the archive format, explode it into a working
// directory and enumerate the extracted files as DigitalItems.
//
// Supported inputs are POSIX/GNU tar (with pax and GNU long-name records),
// gzip-compressed tar, zip (stored and deflate, zip64 sizes) and plain
// directories. Only regular files become items; symlinks, hard links and
// device entries are skipped and counted.

#include <fcntl.h>
#include <sys/stat.h>

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/digest.hpp"
#include "d2d/error.hpp"
#include "d2d/model.hpp"
#include "d2d/text.hpp"

namespace d2d {

namespace fs = std::filesystem;

enum class ArchiveKind { tar, tar_gzip, zip, directory };

constexpr std::string_view to_string(ArchiveKind k) noexcept {
  switch (k) {
    case ArchiveKind::tar: return "tar";
    case ArchiveKind::tar_gzip: return "tar+gzip";
    case ArchiveKind::zip: return "zip";
    case ArchiveKind::directory: return "directory";
  }
  return "";
}

/// Media type used for the archive's own by-reference resource.
constexpr std::string_view mime_type(ArchiveKind k) noexcept {
  switch (k) {
    case ArchiveKind::tar: return "application/x-tar";
    case ArchiveKind::tar_gzip: return "application/gzip";
    case ArchiveKind::zip: return "application/zip";
    case ArchiveKind::directory: return "inode/directory";
  }
  return "application/octet-stream";
}

struct Workspace {
  fs::path root_dir;
  std::vector<DigitalItem> items;  ///< sorted by relative_path, byte-wise
  std::size_t skipped_entries = 0;  ///< symlinks, links and special files
};

struct IngestOptions {
  std::string authority = std::string(default_authority);
  IdentifierSource identifier_source = IdentifierSource::path;
  /// When set, every item's last_modified is this epoch instead of the file's.
  std::optional<std::int64_t> fixed_mtime;
};

namespace detail {

inline constexpr std::size_t io_chunk = 64 * 1024;

class ByteSource {
 public:
  virtual ~ByteSource() = default;
  /// Reads up to n bytes; returns 0 only at end of stream.
  virtual std::size_t read(std::uint8_t* buf, std::size_t n) = 0;

  void read_exact(std::uint8_t* buf, std::size_t n, std::string_view what) {
    std::size_t got = 0;
    while (got < n) {
      std::size_t r = read(buf + got, n - got);
      if (r == 0) throw Error(errc::corrupt_archive, "truncated " + std::string(what));
      got += r;
    }
  }
};

class FileSource : public ByteSource {
 public:
  explicit FileSource(const fs::path& p) : in_(p, std::ios::binary) {
    if (!in_) throw Error(errc::io_error, "cannot open " + p.string());
  }
  std::size_t read(std::uint8_t* buf, std::size_t n) override {
    in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (in_.bad()) throw Error(errc::io_error, "read failure");
    return static_cast<std::size_t>(in_.gcount());
  }
  std::ifstream& stream() { return in_; }

 private:
  std::ifstream in_;
};

/// Decompresses a (possibly multi-member) gzip stream.
class GzipSource : public ByteSource {
 public:
  explicit GzipSource(ByteSource& inner) : inner_(inner) {
    std::memset(&zs_, 0, sizeof zs_);
    if (inflateInit2(&zs_, 16 + MAX_WBITS) != Z_OK) throw Error(errc::io_error, "zlib init failed");
  }
  ~GzipSource() override { inflateEnd(&zs_); }
  GzipSource(const GzipSource&) = delete;
  GzipSource& operator=(const GzipSource&) = delete;

  std::size_t read(std::uint8_t* buf, std::size_t n) override {
    if (done_ || n == 0) return 0;
    zs_.next_out = buf;
    zs_.avail_out = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    while (zs_.avail_out > 0) {
      if (zs_.avail_in == 0) {
        std::size_t got = inner_.read(in_.data(), in_.size());
        if (got == 0) {
          if (!member_finished_) throw Error(errc::corrupt_archive, "truncated gzip stream");
          done_ = true;
          break;
        }
        zs_.next_in = in_.data();
        zs_.avail_in = static_cast<uInt>(got);
      }
      if (member_finished_) {
        // Another member follows.
        inflateReset(&zs_);
        member_finished_ = false;
      }
      int rc = inflate(&zs_, Z_NO_FLUSH);
      if (rc == Z_STREAM_END) {
        member_finished_ = true;
      } else if (rc != Z_OK && rc != Z_BUF_ERROR) {
        throw Error(errc::corrupt_archive, std::string("gzip: ") + (zs_.msg ? zs_.msg : "inflate error"));
      }
    }
    return n - zs_.avail_out;
  }

 private:
  ByteSource& inner_;
  z_stream zs_;
  std::array<std::uint8_t, io_chunk> in_{};
  bool member_finished_ = false;
  bool done_ = false;
};

inline std::array<std::uint8_t, 512> read_head(const fs::path& p, std::size_t& got) {
  std::array<std::uint8_t, 512> head{};
  FileSource src(p);
  got = 0;
  while (got < head.size()) {
    std::size_t r = src.read(head.data() + got, head.size() - got);
    if (r == 0) break;
    got += r;
  }
  return head;
}

inline bool has_ustar_magic(const std::uint8_t* block, std::size_t len) {
  return len >= 262 && std::memcmp(block + 257, "ustar", 5) == 0;
}

// Lexically normalizes an archive entry name. Returns an empty string for
// names that denote the root itself; throws path_traversal on escapes.
inline std::string normalize_entry_path(std::string_view raw) {
  std::string name(raw);
  std::replace(name.begin(), name.end(), '\\', '/');
  if (!name.empty() && name.front() == '/') throw Error(errc::path_traversal, "absolute entry path '" + name + "'");
  if (name.size() >= 2 && name[1] == ':' && std::isalpha(static_cast<unsigned char>(name[0])))
    throw Error(errc::path_traversal, "drive-qualified entry path '" + name + "'");
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= name.size()) {
    std::size_t slash = name.find('/', start);
    if (slash == std::string::npos) slash = name.size();
    std::string part = name.substr(start, slash - start);
    start = slash + 1;
    if (part.empty() || part == ".") continue;
    if (part == "..") {
      if (parts.empty()) throw Error(errc::path_traversal, "entry escapes the workspace: '" + name + "'");
      parts.pop_back();
      continue;
    }
    parts.push_back(text::percent_encode_name(part));
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '/';
    out += parts[i];
  }
  return out;
}

inline void set_mtime(const fs::path& p, std::int64_t epoch) {
  struct timespec times[2];
  times[0].tv_sec = static_cast<time_t>(epoch);
  times[0].tv_nsec = 0;
  times[1] = times[0];
  if (::utimensat(AT_FDCWD, p.c_str(), times, 0) != 0)
    throw Error(errc::io_error, "cannot set mtime on " + p.string() + ": " + std::strerror(errno));
}

inline std::int64_t file_mtime(const fs::path& p) {
  struct stat st {};
  if (::stat(p.c_str(), &st) != 0) throw Error(errc::io_error, "cannot stat " + p.string() + ": " + std::strerror(errno));
  return static_cast<std::int64_t>(st.st_mtim.tv_sec);
}

/// Writes extracted entries beneath the destination directory and remembers
/// which regular files exist.
class Extractor {
 public:
  explicit Extractor(fs::path dest) : dest_(std::move(dest)) {}

  void make_directory(std::string_view raw_name) {
    std::string rel = normalize_entry_path(raw_name);
    if (rel.empty()) return;
    fs::path target = dest_ / rel;
    if (files_.count(rel)) throw Error(errc::corrupt_archive, "'" + rel + "' is both a file and a directory");
    std::error_code ec;
    fs::create_directories(target, ec);
    if (ec) throw Error(errc::io_error, "cannot create " + target.string() + ": " + ec.message());
  }

  /// Streams size bytes from src into the entry's file.
  template <typename Reader>
  void write_file(std::string_view raw_name, std::uint64_t size, std::int64_t mtime, Reader&& read_chunk) {
    std::string rel = normalize_entry_path(raw_name);
    if (rel.empty()) throw Error(errc::corrupt_archive, "file entry with an empty name");
    for (std::size_t slash = rel.find('/'); slash != std::string::npos; slash = rel.find('/', slash + 1))
      if (files_.count(rel.substr(0, slash)))
        throw Error(errc::corrupt_archive, "'" + rel.substr(0, slash) + "' is both a file and a directory");
    fs::path target = dest_ / rel;
    std::error_code ec;
    if (fs::is_directory(target, ec)) throw Error(errc::corrupt_archive, "'" + rel + "' is both a file and a directory");
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(errc::io_error, "cannot create " + target.parent_path().string() + ": " + ec.message());
    {
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(errc::io_error, "cannot create " + target.string());
      std::vector<std::uint8_t> buf(io_chunk);
      std::uint64_t left = size;
      while (left > 0) {
        std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(left, buf.size()));
        std::size_t got = read_chunk(buf.data(), want);
        if (got == 0) throw Error(errc::corrupt_archive, "truncated data for '" + rel + "'");
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(got));
        if (!out) throw Error(errc::io_error, "write failure on " + target.string());
        left -= got;
      }
      out.flush();
      if (!out) throw Error(errc::io_error, "write failure on " + target.string());
    }
    set_mtime(target, mtime);
    files_[rel] = true;
  }

  void skip() { ++skipped_; }

  std::vector<std::string> files() const {
    std::vector<std::string> out;
    out.reserve(files_.size());
    for (const auto& [rel, _] : files_) out.push_back(rel);
    return out;  // std::map<std::string> iterates in byte-wise order
  }
  std::size_t skipped() const noexcept { return skipped_; }
  const fs::path& dest() const noexcept { return dest_; }

 private:
  fs::path dest_;
  std::map<std::string, bool> files_;
  std::size_t skipped_ = 0;
};

inline std::uint64_t parse_tar_number(const std::uint8_t* field, std::size_t len) {
  if (field[0] & 0x80) {
    // GNU base-256 encoding.
    std::uint64_t v = field[0] & 0x7F;
    for (std::size_t i = 1; i < len; ++i) {
      if (v >> 55) throw Error(errc::corrupt_archive, "tar numeric field overflow");
      v = (v << 8) | field[i];
    }
    return v;
  }
  std::uint64_t v = 0;
  std::size_t i = 0;
  while (i < len && (field[i] == ' ' || field[i] == 0)) ++i;
  for (; i < len && field[i] != 0 && field[i] != ' '; ++i) {
    if (field[i] < '0' || field[i] > '7') throw Error(errc::corrupt_archive, "bad octal field in tar header");
    if (v >> 60) throw Error(errc::corrupt_archive, "tar numeric field overflow");
    v = (v << 3) | static_cast<std::uint64_t>(field[i] - '0');
  }
  return v;
}

inline std::string tar_string(const std::uint8_t* field, std::size_t len) {
  std::size_t n = 0;
  while (n < len && field[n] != 0) ++n;
  return std::string(reinterpret_cast<const char*>(field), n);
}

inline bool tar_checksum_ok(const std::uint8_t* block) {
  std::uint64_t unsigned_sum = 0;
  std::int64_t signed_sum = 0;
  for (std::size_t i = 0; i < 512; ++i) {
    std::uint8_t b = (i >= 148 && i < 156) ? ' ' : block[i];
    unsigned_sum += b;
    signed_sum += static_cast<std::int8_t>(b);
  }
  std::uint64_t stored = parse_tar_number(block + 148, 8);
  return stored == unsigned_sum || static_cast<std::int64_t>(stored) == signed_sum;
}

inline std::map<std::string, std::string> parse_pax_records(const std::string& data) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t space = data.find(' ', pos);
    if (space == std::string::npos) throw Error(errc::corrupt_archive, "malformed pax header");
    std::size_t len = 0;
    for (std::size_t i = pos; i < space; ++i) {
      if (data[i] < '0' || data[i] > '9') throw Error(errc::corrupt_archive, "malformed pax record length");
      len = len * 10 + static_cast<std::size_t>(data[i] - '0');
    }
    if (len == 0 || pos + len > data.size() || data[pos + len - 1] != '\n')
      throw Error(errc::corrupt_archive, "malformed pax record");
    std::string record = data.substr(space + 1, pos + len - 1 - (space + 1));
    auto eq = record.find('=');
    if (eq == std::string::npos) throw Error(errc::corrupt_archive, "malformed pax record");
    out[record.substr(0, eq)] = record.substr(eq + 1);
    pos += len;
  }
  return out;
}

inline std::string read_tar_payload(ByteSource& src, std::uint64_t size) {
  if (size > (64u << 20)) throw Error(errc::corrupt_archive, "oversized tar metadata record");
  std::string data(static_cast<std::size_t>(size), '\0');
  src.read_exact(reinterpret_cast<std::uint8_t*>(data.data()), data.size(), "tar metadata record");
  std::size_t pad = static_cast<std::size_t>((512 - size % 512) % 512);
  std::array<std::uint8_t, 512> sink{};
  if (pad) src.read_exact(sink.data(), pad, "tar padding");
  return data;
}

inline void extract_tar(ByteSource& src, Extractor& out) {
  std::array<std::uint8_t, 512> block{};
  std::optional<std::string> long_name;
  std::map<std::string, std::string> pax;
  while (true) {
    std::size_t got = 0;
    while (got < block.size()) {
      std::size_t r = src.read(block.data() + got, block.size() - got);
      if (r == 0) break;
      got += r;
    }
    if (got == 0) return;  // end of stream without terminator blocks
    if (got < block.size()) throw Error(errc::corrupt_archive, "truncated tar header");
    if (std::all_of(block.begin(), block.end(), [](std::uint8_t b) { return b == 0; })) return;
    if (!tar_checksum_ok(block.data())) throw Error(errc::corrupt_archive, "tar header checksum mismatch");

    const char type = static_cast<char>(block[156]);
    std::uint64_t size = parse_tar_number(block.data() + 124, 12);
    if (auto it = pax.find("size"); it != pax.end() && (type == '0' || type == '\0' || type == '7')) {
      try {
        size = std::stoull(it->second);
      } catch (...) {
        throw Error(errc::corrupt_archive, "bad pax size");
      }
    }

    if (type == 'L') {
      std::string data = read_tar_payload(src, size);
      long_name = data.substr(0, data.find('\0'));
      continue;
    }
    if (type == 'x') {
      pax = parse_pax_records(read_tar_payload(src, size));
      continue;
    }
    if (type == 'g' || type == 'K') {
      read_tar_payload(src, size);
      continue;
    }

    std::string name;
    if (auto it = pax.find("path"); it != pax.end()) {
      name = it->second;
    } else if (long_name) {
      name = *long_name;
    } else {
      name = tar_string(block.data(), 100);
      // POSIX ustar splits long names into prefix + name.
      if (std::memcmp(block.data() + 257, "ustar\0", 6) == 0) {
        std::string prefix = tar_string(block.data() + 345, 155);
        if (!prefix.empty()) name = prefix + "/" + name;
      }
    }
    std::int64_t mtime = static_cast<std::int64_t>(parse_tar_number(block.data() + 136, 12));
    if (auto it = pax.find("mtime"); it != pax.end()) {
      try {
        mtime = static_cast<std::int64_t>(std::stod(it->second));
      } catch (...) {
        throw Error(errc::corrupt_archive, "bad pax mtime");
      }
    }
    long_name.reset();
    pax.clear();

    std::uint64_t padded = size + (512 - size % 512) % 512;
    auto skip_data = [&](std::uint64_t n) {
      std::array<std::uint8_t, 4096> sink{};
      while (n > 0) {
        std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(n, sink.size()));
        src.read_exact(sink.data(), want, "tar entry data");
        n -= want;
      }
    };

    if (type == '0' || type == '\0' || type == '7') {
      bool is_dir_name = !name.empty() && name.back() == '/';
      if (is_dir_name && size == 0) {
        out.make_directory(name);
        continue;
      }
      out.write_file(name, size, mtime, [&](std::uint8_t* buf, std::size_t n) {
        src.read_exact(buf, n, "tar entry data");
        return n;
      });
      skip_data(padded - size);
    } else if (type == '5') {
      out.make_directory(name);
      skip_data(padded);
    } else {
      // Links, devices, FIFOs, sparse files and vendor extensions.
      normalize_entry_path(name);
      out.skip();
      skip_data(padded);
    }
  }
}

inline std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | p[1] << 8); }
inline std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
inline std::uint64_t le64(const std::uint8_t* p) {
  return static_cast<std::uint64_t>(le32(p)) | static_cast<std::uint64_t>(le32(p + 4)) << 32;
}

// DOS date/time fields are local time without a zone; they are read as UTC.
inline std::int64_t dos_to_epoch(std::uint16_t time, std::uint16_t date) {
  int year = 1980 + (date >> 9);
  unsigned month = (date >> 5) & 0x0F;
  unsigned day = date & 0x1F;
  if (month < 1 || month > 12) month = 1;
  if (day < 1) day = 1;
  // Days from civil, Howard Hinnant's algorithm.
  int y = year - (month <= 2 ? 1 : 0);
  int era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  std::int64_t days = static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
  return days * 86400 + (time >> 11) * 3600 + ((time >> 5) & 0x3F) * 60 + (time & 0x1F) * 2;
}

struct ZipEntry {
  std::string name;
  std::uint16_t flags = 0;
  std::uint16_t method = 0;
  std::uint32_t crc = 0;
  std::uint64_t compressed = 0;
  std::uint64_t uncompressed = 0;
  std::uint64_t local_offset = 0;
  std::int64_t mtime = 0;
  bool symlink = false;
};

inline void extract_zip(const fs::path& path, Extractor& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());
  std::uint64_t file_size = fs::file_size(path);
  auto read_at = [&](std::uint64_t off, std::uint8_t* buf, std::size_t n) {
    if (off + n > file_size) throw Error(errc::corrupt_archive, "zip structure points past end of file");
    in.clear();
    in.seekg(static_cast<std::streamoff>(off));
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw Error(errc::io_error, "short read in zip");
  };

  std::size_t tail_len = static_cast<std::size_t>(std::min<std::uint64_t>(file_size, 22 + 65535 + 20));
  if (tail_len < 22) throw Error(errc::corrupt_archive, "zip too small for an end-of-central-directory record");
  std::vector<std::uint8_t> tail(tail_len);
  read_at(file_size - tail_len, tail.data(), tail_len);
  std::optional<std::size_t> eocd;
  for (std::size_t i = tail_len - 22 + 1; i-- > 0;) {
    if (le32(&tail[i]) == 0x06054b50 && i + 22 + le16(&tail[i + 20]) == tail_len) {
      eocd = i;
      break;
    }
  }
  if (!eocd) throw Error(errc::corrupt_archive, "zip end-of-central-directory record not found");
  std::uint64_t entries = le16(&tail[*eocd + 10]);
  std::uint64_t cd_size = le32(&tail[*eocd + 12]);
  std::uint64_t cd_offset = le32(&tail[*eocd + 16]);
  if (*eocd >= 20 && le32(&tail[*eocd - 20]) == 0x07064b50) {
    std::uint64_t z64_off = le64(&tail[*eocd - 20 + 8]);
    std::array<std::uint8_t, 56> z64{};
    read_at(z64_off, z64.data(), z64.size());
    if (le32(z64.data()) != 0x06064b50) throw Error(errc::corrupt_archive, "bad zip64 end-of-central-directory");
    entries = le64(&z64[32]);
    cd_size = le64(&z64[40]);
    cd_offset = le64(&z64[48]);
  }
  if (cd_offset + cd_size > file_size) throw Error(errc::corrupt_archive, "central directory out of range");
  if (cd_size > (256u << 20)) throw Error(errc::corrupt_archive, "central directory too large");

  std::vector<std::uint8_t> cd(static_cast<std::size_t>(cd_size));
  if (!cd.empty()) read_at(cd_offset, cd.data(), cd.size());
  std::vector<ZipEntry> list;
  std::size_t p = 0;
  for (std::uint64_t i = 0; i < entries; ++i) {
    if (p + 46 > cd.size() || le32(&cd[p]) != 0x02014b50) throw Error(errc::corrupt_archive, "bad central directory entry");
    ZipEntry e;
    std::uint16_t made_by = le16(&cd[p + 4]);
    e.flags = le16(&cd[p + 8]);
    e.method = le16(&cd[p + 10]);
    e.mtime = dos_to_epoch(le16(&cd[p + 12]), le16(&cd[p + 14]));
    e.crc = le32(&cd[p + 16]);
    e.compressed = le32(&cd[p + 20]);
    e.uncompressed = le32(&cd[p + 24]);
    std::size_t nlen = le16(&cd[p + 28]), xlen = le16(&cd[p + 30]), clen = le16(&cd[p + 32]);
    std::uint32_t ext_attr = le32(&cd[p + 38]);
    e.local_offset = le32(&cd[p + 42]);
    if (p + 46 + nlen + xlen + clen > cd.size()) throw Error(errc::corrupt_archive, "central directory entry overflows");
    e.name.assign(reinterpret_cast<const char*>(&cd[p + 46]), nlen);
    const std::uint8_t* x = &cd[p + 46 + nlen];
    for (std::size_t k = 0; k + 4 <= xlen;) {
      std::uint16_t id = le16(x + k), len = le16(x + k + 2);
      if (k + 4 + len > xlen) break;
      const std::uint8_t* d = x + k + 4;
      if (id == 0x0001) {
        std::size_t q = 0;
        auto take = [&](std::uint64_t& field) {
          if (field == 0xFFFFFFFFu && q + 8 <= len) {
            field = le64(d + q);
            q += 8;
          }
        };
        take(e.uncompressed);
        take(e.compressed);
        take(e.local_offset);
      } else if (id == 0x5455 && len >= 5 && (d[0] & 1)) {
        e.mtime = static_cast<std::int32_t>(le32(d + 1));
      }
      k += 4 + len;
    }
    e.symlink = (made_by >> 8) == 3 && ((ext_attr >> 16) & 0170000) == 0120000;
    list.push_back(std::move(e));
    p += 46 + nlen + xlen + clen;
  }

  for (const ZipEntry& e : list) {
    if (e.symlink) {
      normalize_entry_path(e.name);
      out.skip();
      continue;
    }
    if (!e.name.empty() && (e.name.back() == '/' || e.name.back() == '\\')) {
      out.make_directory(e.name);
      continue;
    }
    if (e.flags & 1) throw Error(errc::unsupported_archive, "encrypted zip entry '" + e.name + "'");
    if (e.method != 0 && e.method != 8)
      throw Error(errc::unsupported_archive, "zip compression method " + std::to_string(e.method) + " for '" + e.name + "'");
    std::array<std::uint8_t, 30> lh{};
    read_at(e.local_offset, lh.data(), lh.size());
    if (le32(lh.data()) != 0x04034b50) throw Error(errc::corrupt_archive, "bad local header for '" + e.name + "'");
    std::uint64_t data_off = e.local_offset + 30 + le16(&lh[26]) + le16(&lh[28]);
    if (data_off + e.compressed > file_size) throw Error(errc::corrupt_archive, "entry data out of range for '" + e.name + "'");
    in.clear();
    in.seekg(static_cast<std::streamoff>(data_off));

    Crc32 crc;
    std::uint64_t remaining_in = e.compressed;
    std::uint64_t produced = 0;
    if (e.method == 0) {
      if (e.compressed != e.uncompressed) throw Error(errc::corrupt_archive, "stored entry size mismatch for '" + e.name + "'");
      out.write_file(e.name, e.uncompressed, e.mtime, [&](std::uint8_t* buf, std::size_t n) {
        in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
        std::size_t got = static_cast<std::size_t>(in.gcount());
        crc.update(std::span<const std::uint8_t>(buf, got));
        produced += got;
        return got;
      });
    } else {
      z_stream zs;
      std::memset(&zs, 0, sizeof zs);
      if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(errc::io_error, "zlib init failed");
      struct Guard {
        z_stream* z;
        ~Guard() { inflateEnd(z); }
      } guard{&zs};
      std::vector<std::uint8_t> inbuf(io_chunk);
      bool ended = false;
      out.write_file(e.name, e.uncompressed, e.mtime, [&](std::uint8_t* buf, std::size_t n) -> std::size_t {
        zs.next_out = buf;
        zs.avail_out = static_cast<uInt>(n);
        while (zs.avail_out > 0 && !ended) {
          if (zs.avail_in == 0) {
            std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(remaining_in, inbuf.size()));
            if (want == 0) throw Error(errc::corrupt_archive, "truncated deflate data for '" + e.name + "'");
            in.read(reinterpret_cast<char*>(inbuf.data()), static_cast<std::streamsize>(want));
            std::size_t got = static_cast<std::size_t>(in.gcount());
            if (got == 0) throw Error(errc::corrupt_archive, "truncated deflate data for '" + e.name + "'");
            remaining_in -= got;
            zs.next_in = inbuf.data();
            zs.avail_in = static_cast<uInt>(got);
          }
          int rc = inflate(&zs, Z_NO_FLUSH);
          if (rc == Z_STREAM_END) ended = true;
          else if (rc != Z_OK && rc != Z_BUF_ERROR)
            throw Error(errc::corrupt_archive, "deflate error in '" + e.name + "'");
        }
        std::size_t got = n - zs.avail_out;
        crc.update(std::span<const std::uint8_t>(buf, got));
        produced += got;
        return got;
      });
    }
    if (produced != e.uncompressed || crc.value() != e.crc)
      throw Error(errc::corrupt_archive, "CRC mismatch for '" + e.name + "'");
  }
}

inline void copy_directory(const fs::path& src, Extractor& out) {
  std::error_code ec;
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(src, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    const auto& entry = *it;
    auto status = entry.symlink_status(ec);
    if (ec) break;
    if (fs::is_symlink(status)) {
      out.skip();
      continue;
    }
    if (fs::is_directory(status)) continue;
    if (!fs::is_regular_file(status)) {
      out.skip();
      continue;
    }
    files.push_back(entry.path());
  }
  if (ec) throw Error(errc::io_error, "cannot walk " + src.string() + ": " + ec.message());
  for (const auto& f : files) {
    std::string rel = fs::relative(f, src).generic_string();
    FileSource in(f);
    out.write_file(rel, fs::file_size(f), file_mtime(f),
                   [&](std::uint8_t* buf, std::size_t n) { return in.read(buf, n); });
  }
}

}  // namespace detail

/// Classifies by leading magic bytes; directories bypass the check.
inline ArchiveKind detect_archive_kind(const fs::path& path) {
  std::error_code ec;
  auto st = fs::status(path, ec);
  if (ec || !fs::exists(st)) throw Error(errc::io_error, "cannot access " + path.string());
  if (fs::is_directory(st)) return ArchiveKind::directory;
  std::size_t got = 0;
  auto head = detail::read_head(path, got);
  if (got >= 2 && head[0] == 0x1F && head[1] == 0x8B) {
    detail::FileSource file(path);
    detail::GzipSource gz(file);
    std::array<std::uint8_t, 512> inner{};
    std::size_t n = 0;
    try {
      while (n < inner.size()) {
        std::size_t r = gz.read(inner.data() + n, inner.size() - n);
        if (r == 0) break;
        n += r;
      }
    } catch (const Error& e) {
      if (e.code() != errc::corrupt_archive || n < inner.size()) throw Error(errc::unsupported_archive, path.string() + ": unreadable gzip stream");
    }
    if (detail::has_ustar_magic(inner.data(), n)) return ArchiveKind::tar_gzip;
    throw Error(errc::unsupported_archive, path.string() + ": gzip stream does not contain a tar archive");
  }
  if (detail::has_ustar_magic(head.data(), got)) return ArchiveKind::tar;
  if (got >= 4 && std::memcmp(head.data(), "PK\x03\x04", 4) == 0) return ArchiveKind::zip;
  // An empty zip is just an end-of-central-directory record.
  if (got >= 4 && std::memcmp(head.data(), "PK\x05\x06", 4) == 0) return ArchiveKind::zip;
  throw Error(errc::unsupported_archive, path.string() + ": unrecognized archive format");
}

/// Streams a file once to build its DigitalItem.
inline DigitalItem enumerate_item(const fs::path& file, std::string_view rel, const IngestOptions& opts = {}) {
  detail::FileSource in(file);
  Md5 md5;
  std::uint64_t size = 0;
  std::vector<std::uint8_t> buf(detail::io_chunk);
  while (std::size_t got = in.read(buf.data(), buf.size())) {
    md5.update(std::span<const std::uint8_t>(buf.data(), got));
    size += got;
  }
  DigitalItem item;
  item.relative_path = std::string(rel);
  item.size_bytes = size;
  item.last_modified = text::iso8601_utc(opts.fixed_mtime ? *opts.fixed_mtime : detail::file_mtime(file));
  item.content_md5 = to_hex(md5.finish());
  std::string id_digest =
      opts.identifier_source == IdentifierSource::path ? to_hex(Md5::of(rel)) : item.content_md5;
  item.identifier = make_identifier(id_digest, opts.authority, 0);
  return item;
}

/// Extracts every regular file of the archive under dest (which must be empty
/// or absent) and enumerates them in byte-wise path order.
inline Workspace explode(const fs::path& path, ArchiveKind kind, const fs::path& dest, const IngestOptions& opts = {}) {
  std::error_code ec;
  if (fs::exists(dest, ec)) {
    if (!fs::is_directory(dest, ec) || !fs::is_empty(dest, ec))
      throw Error(errc::invalid_argument, "destination must be an empty directory: " + dest.string());
  } else {
    fs::create_directories(dest, ec);
    if (ec) throw Error(errc::io_error, "cannot create " + dest.string() + ": " + ec.message());
  }
  detail::Extractor out(dest);
  switch (kind) {
    case ArchiveKind::tar: {
      detail::FileSource file(path);
      detail::extract_tar(file, out);
      break;
    }
    case ArchiveKind::tar_gzip: {
      detail::FileSource file(path);
      detail::GzipSource gz(file);
      detail::extract_tar(gz, out);
      break;
    }
    case ArchiveKind::zip: detail::extract_zip(path, out); break;
    case ArchiveKind::directory: detail::copy_directory(path, out); break;
  }
  Workspace ws;
  ws.root_dir = dest;
  ws.skipped_entries = out.skipped();
  for (const std::string& rel : out.files()) ws.items.push_back(enumerate_item(dest / rel, rel, opts));
  return ws;
}

}  // namespace d2d
