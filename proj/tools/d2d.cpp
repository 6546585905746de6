// d2d: archive in, MPEG-21 DIDL out.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "d2d/pipeline.hpp"

namespace {

// Pins lastModified so repeated runs are byte-identical.
constexpr const char* fixed_epoch_env = "D2D_FIXED_EPOCH";

std::optional<std::int64_t> fixed_epoch_from_env() {
  const char* v = std::getenv(fixed_epoch_env);
  if (!v || !*v) return std::nullopt;
  std::size_t used = 0;
  std::int64_t epoch = std::stoll(v, &used);
  if (used != std::string(v).size()) throw std::invalid_argument(std::string(fixed_epoch_env) + " is not an integer");
  return epoch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analyze every file of an archive and describe it as MPEG-21 DIDL"};
  app.require_subcommand(1);

  d2d::RunConfig config;
  std::string archive, output, timing, workdir, magic, registry, analyzers, id_source = "path";
  double timeout_seconds = 60;
  bool no_schema_check = false;

  auto* analyze = app.add_subcommand("analyze", "explode an archive, run the analyzers, write DIDL");
  analyze->add_option("archive", archive, "tar, tar.gz or zip archive (or a directory)")->required();
  analyze->add_option("-o,--output", output, "DIDL output file")->required();
  analyze->add_option("--timing", timing, "write the timing report as CSV");
  analyze->add_option("--analyzers", analyzers, "comma-separated analyzer ids (default: checksum,filetype,strings,validate,registry)");
  analyze->add_option("--authority", config.authority, "identifier authority prefix")->capture_default_str();
  analyze->add_option("--workers", config.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  analyze->add_option("--magic", magic, "magic rule file replacing the built-in rules")->check(CLI::ExistingFile);
  analyze->add_option("--registry", registry, "format registry file replacing the built-in table")->check(CLI::ExistingFile);
  analyze->add_flag("--keep-workdir", config.keep_workdir, "keep the extracted files");
  analyze->add_option("--workdir", workdir, "extract here instead of a temporary directory (must be empty)");
  analyze->add_option("--timeout", timeout_seconds, "per-analyzer, per-file time limit in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze->add_option("--identifier-source", id_source, "digest identifiers from the relative path or the content")
      ->check(CLI::IsMember({"path", "content"}))
      ->capture_default_str();
  analyze->add_option("--pdi-namespace", config.pdi_namespace, "namespace URI for the PDI vocabulary")->capture_default_str();
  analyze->add_flag("--no-schema-check", no_schema_check, "skip validating the output against the shipped schemas");

  std::string to_validate;
  std::string validate_ns(d2d::didl::default_daap_ns);
  auto* validate = app.add_subcommand("validate", "check a DIDL file against the shipped schemas");
  validate->add_option("didl", to_validate, "DIDL file")->required();
  validate->add_option("--pdi-namespace", validate_ns, "namespace URI of the PDI vocabulary")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    int status = d2d::validate_file(to_validate, std::cerr, validate_ns);
    if (status == d2d::exit_ok) std::cout << to_validate << ": valid\n";
    return status;
  }

  try {
    config.archive_path = archive;
    config.output_didl_path = output;
    if (!timing.empty()) config.timing_csv_path = timing;
    if (!workdir.empty()) config.workdir = workdir;
    if (!magic.empty()) config.magic_db_path = magic;
    if (!registry.empty()) config.registry_path = registry;
    if (!analyzers.empty()) {
      config.analyzers.clear();
      std::size_t start = 0;
      while (start <= analyzers.size()) {
        std::size_t comma = analyzers.find(',', start);
        if (comma == std::string::npos) comma = analyzers.size();
        config.analyzers.push_back(analyzers.substr(start, comma - start));
        start = comma + 1;
      }
    }
    config.timeout = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(timeout_seconds));
    config.identifier_source = id_source == "content" ? d2d::IdentifierSource::content : d2d::IdentifierSource::path;
    config.schema_check = !no_schema_check;
    config.fixed_epoch = fixed_epoch_from_env();
  } catch (const std::exception& e) {
    std::cerr << "d2d: " << e.what() << "\n";
    return d2d::exit_fatal;
  }

  d2d::RunSummary s = d2d::run(config, std::cerr);
  if (s.status != d2d::exit_fatal) {
    std::cerr << "d2d: " << s.items << " items, " << s.reports << " reports";
    if (s.failed_reports) std::cerr << " (" << s.failed_reports << " failed)";
    std::cerr << " -> " << output << "\n";
  }
  if (config.keep_workdir && !s.workdir.empty()) std::cerr << "d2d: extracted files kept in " << s.workdir.string() << "\n";
  return s.status;
}
