#pragma once

// PDI and identifier data model shared by every other module.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "d2d/digest.hpp"
#include "d2d/error.hpp"
#include "d2d/text.hpp"

namespace d2d {

/// The four OAIS preservation description information entities.
enum class PdiEntity { provenance, context, reference, fixity };

inline constexpr std::array<PdiEntity, 4> all_entities = {PdiEntity::provenance, PdiEntity::context,
                                                          PdiEntity::reference, PdiEntity::fixity};

/// Element name used for the entity in serialized PDI.
constexpr std::string_view to_string(PdiEntity e) noexcept {
  switch (e) {
    case PdiEntity::provenance: return "provenance";
    case PdiEntity::context: return "context";
    case PdiEntity::reference: return "reference";
    case PdiEntity::fixity: return "fixity";
  }
  return "";
}

/// Type tokens understood by classify(), one per row of the analyzer mapping tables.
inline constexpr std::array<std::pair<std::string_view, PdiEntity>, 15> pdi_type_table = {{
    {"lastModified", PdiEntity::provenance},
    {"mimeType", PdiEntity::context},
    {"format", PdiEntity::context},
    {"status", PdiEntity::context},
    {"registryUri", PdiEntity::context},
    {"analysisError", PdiEntity::context},
    {"identifier", PdiEntity::reference},
    {"internalIdentifier", PdiEntity::reference},
    {"uri", PdiEntity::reference},
    {"MD5", PdiEntity::fixity},
    {"SHA-1", PdiEntity::fixity},
    {"SHA", PdiEntity::fixity},
    {"CRC32", PdiEntity::fixity},
    {"size", PdiEntity::fixity},
    {"rawCharacters", PdiEntity::fixity},
}};

/// Maps a PDI type token to its entity. Unknown tokens raise unknown_pdi_type.
inline PdiEntity classify(std::string_view type_name) {
  for (const auto& [token, entity] : pdi_type_table)
    if (token == type_name) return entity;
  throw Error(errc::unknown_pdi_type, std::string(type_name));
}

inline bool is_known_pdi_type(std::string_view type_name) noexcept {
  return std::any_of(pdi_type_table.begin(), pdi_type_table.end(),
                     [&](const auto& row) { return row.first == type_name; });
}

struct PdiEntry {
  PdiEntity entity;
  std::string type_name;
  std::string value;

  friend bool operator==(const PdiEntry&, const PdiEntry&) = default;
};

/// Builds an entry whose entity comes from classify(). The value is sanitized
/// so it is always valid UTF-8 that XML can carry.
inline PdiEntry make_entry(std::string_view type_name, std::string_view value) {
  return PdiEntry{classify(type_name), std::string(type_name), text::sanitize_xml_text(value)};
}

/// The metadata bundle produced by one analyzer for one item.
class Pdi {
 public:
  Pdi() = default;
  explicit Pdi(std::string signature) : signature_(std::move(signature)) {}

  const std::string& signature() const noexcept { return signature_; }
  void set_signature(std::string s) { signature_ = std::move(s); }

  const std::string& raw_output() const noexcept { return raw_output_; }
  void set_raw_output(std::string_view s) { raw_output_ = text::sanitize_xml_text(s); }

  /// Entries in insertion order.
  const std::vector<PdiEntry>& entries() const noexcept { return entries_; }

  void add(PdiEntry e) {
    if (!text::is_token(e.type_name))
      throw Error(errc::invalid_argument, "PDI type name must be a non-empty token: '" + e.type_name + "'");
    e.value = text::sanitize_xml_text(e.value);
    entries_.push_back(std::move(e));
  }
  void add(std::string_view type_name, std::string_view value) { add(make_entry(type_name, value)); }

  /// Inserts before every existing entry.
  void prepend(std::vector<PdiEntry> front) {
    for (auto& e : front) e.value = text::sanitize_xml_text(e.value);
    entries_.insert(entries_.begin(), std::make_move_iterator(front.begin()), std::make_move_iterator(front.end()));
  }

  /// Serialization order: provenance, context, reference, fixity; stable within a group.
  std::vector<PdiEntry> ordered_entries() const {
    std::vector<PdiEntry> out(entries_);
    std::stable_sort(out.begin(), out.end(),
                     [](const PdiEntry& a, const PdiEntry& b) { return a.entity < b.entity; });
    return out;
  }

  std::vector<PdiEntry> entries_of(PdiEntity entity) const {
    std::vector<PdiEntry> out;
    for (const auto& e : entries_)
      if (e.entity == entity) out.push_back(e);
    return out;
  }

  /// First value for a type token, or nullptr.
  const std::string* find(std::string_view type_name) const noexcept {
    for (const auto& e : entries_)
      if (e.type_name == type_name) return &e.value;
    return nullptr;
  }

  friend bool operator==(const Pdi&, const Pdi&) = default;

 private:
  std::string signature_;
  std::vector<PdiEntry> entries_;
  std::string raw_output_;
};

inline constexpr std::string_view default_authority = "100.700";

/// Persistent identifier: authority prefix plus a 128-bit digest and a version.
class Identifier {
 public:
  Identifier() = default;

  const std::string& authority() const noexcept { return authority_; }
  const std::string& digest_hex() const noexcept { return digest_hex_; }
  std::uint32_t version() const noexcept { return version_; }

  /// "100.700/5EFFE0D18D8CB5910EECEE5D31337A40"
  std::string external() const { return authority_ + "/" + digest_hex_; }
  /// "5EFFE0D18D8CB5910EECEE5D31337A40.0"
  std::string internal() const { return digest_hex_ + "." + std::to_string(version_); }

  friend bool operator==(const Identifier&, const Identifier&) = default;

 private:
  friend Identifier make_identifier(std::string_view, std::string_view, std::uint32_t);
  std::string authority_;
  std::string digest_hex_;
  std::uint32_t version_ = 0;
};

/// Builds an identifier from a 32-digit hex digest in either case.
inline Identifier make_identifier(std::string_view digest, std::string_view authority = default_authority,
                                  std::uint32_t version = 0) {
  if (digest.size() != 32)
    throw Error(errc::invalid_digest, "expected 32 hex digits, got " + std::to_string(digest.size()));
  std::string upper(digest);
  for (char& c : upper) {
    if (c >= 'a' && c <= 'f') c = static_cast<char>(c - 32);
    if (!((c >= '0' && c <= '9') || (c >= 'A' && c <= 'F')))
      throw Error(errc::invalid_digest, "non-hex digit in '" + std::string(digest) + "'");
  }
  if (authority.empty() || authority.find('/') != std::string_view::npos)
    throw Error(errc::invalid_argument, "authority must be non-empty and contain no '/'");
  Identifier id;
  id.authority_ = std::string(authority);
  id.digest_hex_ = std::move(upper);
  id.version_ = version;
  return id;
}

/// What the identifier digest is computed over.
enum class IdentifierSource {
  path,     ///< MD5 of the archive-relative path
  content,  ///< MD5 of the file bytes
};

/// One file extracted from the submitted archive.
struct DigitalItem {
  std::string relative_path;
  std::uint64_t size_bytes = 0;
  std::string last_modified;  ///< ISO-8601 with numeric offset
  std::string content_md5;    ///< lowercase hex
  Identifier identifier;

  friend bool operator==(const DigitalItem&, const DigitalItem&) = default;
};

}  // namespace d2d
