#include <gtest/gtest.h>

#include "d2d/didl.hpp"
#include "d2d/schema.hpp"
#include "d2d/timing.hpp"
#include "support/fixtures.hpp"

using namespace d2d;
using fixtures::TempDir;
using fixtures::shell_quote;

namespace {

fixtures::ProcessResult d2d_cli(const std::string& args, const std::string& env = "") {
  return fixtures::run(env + " " + shell_quote(fixtures::cli()) + " " + args);
}

std::string three_file_zip(const TempDir& t) {
  fs::path p = t / "three.zip";
  fixtures::write_file(p, fixtures::zip_bytes({{"a.txt", "alpha\n"}, {"b/c.xml", "<c/>"}, {"d.bin", fixtures::random_bytes(999, 1)}}));
  return p.string();
}

}  // namespace

TEST(Cli, ThreeFileZip) {
  TempDir t;
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote(out) + " --timing " +
                   shell_quote((t / "timing.csv").string()));
  ASSERT_EQ(r.status, 0) << r.output;
  didl::Didl doc = didl::parse_document(fixtures::read_file(out));
  EXPECT_EQ(doc.containers[0].items[0].sub_items.size(), 3u);
  EXPECT_EQ(didl::count_pdi_statements(doc), 15u);
  EXPECT_TRUE(schema::validate_against_schema(fixtures::read_file(out)).empty());
  auto csv = timing::parse_csv(fixtures::read_file(t / "timing.csv"));
  EXPECT_EQ(csv.records.size(), 15u);
  EXPECT_FALSE(fs::exists(out + ".partial"));
}

TEST(Cli, MissingArchiveWritesNothing) {
  TempDir t;
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote((t / "nope.zip").string()) + " -o " + shell_quote(out));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("nope.zip"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, UnknownAnalyzerIsFatal) {
  TempDir t;
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote(out) + " --analyzers checksum,bogus");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("UnknownAnalyzer"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, DuplicateAnalyzerIsFatal) {
  TempDir t;
  auto r = d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote((t / "o.xml").string()) +
                   " --analyzers checksum,checksum");
  EXPECT_EQ(r.status, 1);
}

TEST(Cli, TimeoutGivesExitTwoAndErrorEntry) {
  TempDir t;
  fs::path archive = t / "slow.tar";
  fixtures::write_file(archive, fixtures::tar_bytes({{"big.bin", fixtures::random_bytes(40 << 20, 2)}, {"small.txt", "hi\n"}}));
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote(archive.string()) + " -o " + shell_quote(out) +
                   " --analyzers checksum,strings --timeout 0.002");
  ASSERT_EQ(r.status, 2) << r.output;
  std::string xml_text = fixtures::read_file(out);
  EXPECT_NE(xml_text.find("<daap:type>analysisError</daap:type>"), std::string::npos);
  EXPECT_TRUE(schema::validate_against_schema(xml_text).empty());
}

TEST(Cli, ChecksumOnlyHasFixityAndReference) {
  TempDir t;
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote(out) + " --analyzers checksum");
  ASSERT_EQ(r.status, 0) << r.output;
  didl::Didl doc = didl::parse_document(fixtures::read_file(out));
  std::size_t seen = 0;
  for (const auto& item : doc.containers[0].items[0].sub_items)
    for (const auto& c : item.components)
      for (const auto& d : c.descriptors) {
        const Pdi& p = std::get<Pdi>(d.statement.payload);
        ++seen;
        for (const auto& e : p.entries()) EXPECT_TRUE(e.entity == PdiEntity::fixity || e.entity == PdiEntity::reference) << e.type_name;
      }
  EXPECT_EQ(seen, 3u);
}

TEST(Cli, PinnedEpochMakesRunsIdentical) {
  TempDir t;
  std::string archive = three_file_zip(t);
  std::string a = (t / "a.xml").string(), b = (t / "b.xml").string();
  ASSERT_EQ(d2d_cli("analyze " + shell_quote(archive) + " -o " + shell_quote(a), "D2D_FIXED_EPOCH=1133461309").status, 0);
  ASSERT_EQ(d2d_cli("analyze " + shell_quote(archive) + " -o " + shell_quote(b) + " --workers 3", "D2D_FIXED_EPOCH=1133461309").status, 0);
  std::string first = fixtures::read_file(a);
  EXPECT_EQ(first, fixtures::read_file(b));
  EXPECT_NE(first.find("2005-12-01T18:21:49+00:00"), std::string::npos);
}

TEST(Cli, BadEpochIsFatal) {
  TempDir t;
  auto r = d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote((t / "o.xml").string()), "D2D_FIXED_EPOCH=soon");
  EXPECT_EQ(r.status, 1);
}

TEST(Cli, ValidateSubcommand) {
  TempDir t;
  std::string out = (t / "out.xml").string();
  ASSERT_EQ(d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote(out)).status, 0);
  auto ok = d2d_cli("validate " + shell_quote(out));
  EXPECT_EQ(ok.status, 0) << ok.output;

  std::string broken = fixtures::read_file(out);
  broken.replace(broken.find("<daap:signature>"), 16, "<daap:sig>");
  broken.replace(broken.find("</daap:signature>"), 17, "</daap:sig>");
  fixtures::write_file(t / "broken.xml", broken);
  auto bad = d2d_cli("validate " + shell_quote((t / "broken.xml").string()));
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.output.find("sig"), std::string::npos);
}

TEST(Cli, CustomRegistryAndMagicFiles) {
  TempDir t;
  fixtures::write_file(t / "reg.tsv", "ASCII\tinfo:gdfr/fred/f/plaintext\n");
  fixtures::write_file(t / "magic.tsv", "0\t616c706861\t-\ttext/x-alpha\talpha file\n");
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote(three_file_zip(t)) + " -o " + shell_quote(out) + " --registry " +
                   shell_quote((t / "reg.tsv").string()) + " --magic " + shell_quote((t / "magic.tsv").string()));
  ASSERT_EQ(r.status, 0) << r.output;
  std::string xml_text = fixtures::read_file(out);
  EXPECT_NE(xml_text.find("info:gdfr/fred/f/plaintext"), std::string::npos);
  EXPECT_NE(xml_text.find("text/x-alpha"), std::string::npos);
}

TEST(Cli, DirectoryInputAndKeptWorkdir) {
  TempDir t;
  fixtures::write_file(t / "in/x.txt", "x\n");
  std::string out = (t / "out.xml").string();
  auto r = d2d_cli("analyze " + shell_quote((t / "in").string()) + " -o " + shell_quote(out) + " --workdir " +
                   shell_quote((t / "wd").string()));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(t / "wd/x.txt"));
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(d2d_cli("").status, 0);
  EXPECT_NE(d2d_cli("analyze").status, 0);
  EXPECT_NE(d2d_cli("analyze x.zip").status, 0);  // -o is required
  EXPECT_NE(d2d_cli("analyze x.zip -o y --workers 0").status, 0);
}
