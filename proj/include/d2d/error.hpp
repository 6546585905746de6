#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace d2d {

enum class errc {
  invalid_digest,
  unknown_pdi_type,
  io_error,
  unsupported_archive,
  path_traversal,
  corrupt_archive,
  duplicate_analyzer,
  unknown_analyzer,
  orphan_report,
  encoding_error,
  parse_error,
  invalid_document,
  invalid_argument,
  analysis_timeout,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::invalid_digest: return "InvalidDigest";
    case errc::unknown_pdi_type: return "UnknownPdiType";
    case errc::io_error: return "IoError";
    case errc::unsupported_archive: return "UnsupportedArchive";
    case errc::path_traversal: return "PathTraversal";
    case errc::corrupt_archive: return "CorruptArchive";
    case errc::duplicate_analyzer: return "DuplicateAnalyzer";
    case errc::unknown_analyzer: return "UnknownAnalyzer";
    case errc::orphan_report: return "OrphanReport";
    case errc::encoding_error: return "EncodingError";
    case errc::parse_error: return "ParseError";
    case errc::invalid_document: return "InvalidDocument";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::analysis_timeout: return "AnalysisTimeout";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message is prefixed with the
/// error kind so diagnostics read well without inspecting code().
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace d2d
