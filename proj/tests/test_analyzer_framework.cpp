#include <gtest/gtest.h>

#include <thread>

#include "d2d/builtins.hpp"
#include "d2d/framework.hpp"
#include "support/fixtures.hpp"

using namespace d2d;
using fixtures::TempDir;

namespace {

Workspace make_workspace(const TempDir& t, const std::vector<fixtures::Entry>& files) {
  fixtures::write_file(t / "a.tar", fixtures::tar_bytes(files));
  return explode(t / "a.tar", ArchiveKind::tar, t / "ws");
}

Analyzer custom(std::string id, AnalyzeFn fn, std::optional<std::size_t> limit = std::nullopt) {
  return {{std::move(id), "custom 0.1", limit}, std::move(fn)};
}

std::vector<fixtures::Entry> small_set() {
  return {{"a.txt", "hello there\n"}, {"b.bin", std::string("\x00\x01\x02\x80", 4)}, {"c.xml", "<a><b/></a>"}, {"d", ""}};
}

}  // namespace

TEST(Registry, DuplicateIdIsRejected) {
  AnalyzerRegistry reg = builtin_registry();
  try {
    reg.add(make_checksum_analyzer());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::duplicate_analyzer);
  }
  EXPECT_EQ(reg.size(), 5u);
}

TEST(Registry, RejectsIncompleteDescriptors) {
  AnalyzerRegistry reg;
  EXPECT_THROW(reg.add({{"", "sig", {}}, [](const DigitalItem&, ContentReader&) { return Pdi(); }}), Error);
  EXPECT_THROW(reg.add({{"x", "", {}}, [](const DigitalItem&, ContentReader&) { return Pdi(); }}), Error);
  EXPECT_THROW(reg.add({{"x", "sig", {}}, nullptr}), Error);
}

TEST(RunAll, FiveBuiltinsPerItemInRegistrationOrder) {
  TempDir t;
  Workspace ws = make_workspace(t, small_set());
  AnalyzerRegistry reg = builtin_registry();
  // Selection order does not matter; registration order does.
  auto reports = run_all(reg, ws, {"registry", "validate", "strings", "filetype", "checksum"});
  ASSERT_EQ(reports.size(), ws.items.size() * 5);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    EXPECT_EQ(reports[i].item, ws.items[i / 5].identifier);
    EXPECT_EQ(reports[i].analyzer_id, default_analyzer_ids()[i % 5]);
    EXPECT_FALSE(reports[i].failed) << reports[i].analyzer_id << ": " << reports[i].pdi.raw_output();
  }
}

TEST(RunAll, ReferenceEntriesAreInjectedFirst) {
  TempDir t;
  Workspace ws = make_workspace(t, {{"only.txt", "abc"}});
  AnalyzerRegistry reg;
  reg.add(custom("noop", [](const DigitalItem&, ContentReader&) { return Pdi(); }));
  auto reports = run_all(reg, ws, {"noop"});
  ASSERT_EQ(reports.size(), 1u);
  const Pdi& p = reports[0].pdi;
  ASSERT_EQ(p.entries().size(), 2u);
  EXPECT_EQ(p.entries()[0].type_name, "identifier");
  EXPECT_EQ(p.entries()[0].value, ws.items[0].identifier.external());
  EXPECT_EQ(p.entries()[1].type_name, "internalIdentifier");
  EXPECT_EQ(p.entries()[1].value, ws.items[0].identifier.internal());
  EXPECT_EQ(p.signature(), "custom 0.1");
}

TEST(RunAll, AnalyzerCannotForgeIdentifiers) {
  TempDir t;
  Workspace ws = make_workspace(t, {{"only.txt", "abc"}});
  AnalyzerRegistry reg;
  reg.add(custom("forger", [](const DigitalItem&, ContentReader&) {
    Pdi p("forger");
    p.add("identifier", "100.700/00000000000000000000000000000000");
    p.add("size", "3");
    return p;
  }));
  auto r = run_all(reg, ws, {"forger"}).at(0);
  EXPECT_EQ(r.pdi.entries_of(PdiEntity::reference).size(), 2u);
  EXPECT_EQ(*r.pdi.find("identifier"), ws.items[0].identifier.external());
}

TEST(RunAll, UnknownSelectionFailsBeforeWork) {
  TempDir t;
  Workspace ws = make_workspace(t, small_set());
  AnalyzerRegistry reg;
  int calls = 0;
  reg.add(custom("counting", [&](const DigitalItem&, ContentReader&) {
    ++calls;
    return Pdi();
  }));
  try {
    run_all(reg, ws, {"counting", "nope"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::unknown_analyzer);
  }
  EXPECT_EQ(calls, 0);
}

TEST(RunAll, EmptyWorkspaceGivesNoReports) {
  TempDir t;
  Workspace ws;
  ws.root_dir = t.path();
  EXPECT_TRUE(run_all(builtin_registry(), ws, default_analyzer_ids()).empty());
}

TEST(RunAll, OneFailureIsContained) {
  TempDir t;
  Workspace ws = make_workspace(t, small_set());
  AnalyzerRegistry reg = builtin_registry();
  reg.add(custom("fragile", [](const DigitalItem& item, ContentReader&) -> Pdi {
    if (item.relative_path == "b.bin") throw std::runtime_error("injected fault");
    Pdi p("fragile");
    p.add("status", "fine");
    return p;
  }));
  std::vector<std::string> sel = default_analyzer_ids();
  sel.push_back("fragile");
  auto reports = run_all(reg, ws, sel);
  ASSERT_EQ(reports.size(), ws.items.size() * 6);
  std::size_t failures = 0;
  for (const auto& r : reports) {
    if (r.failed) {
      ++failures;
      EXPECT_EQ(r.analyzer_id, "fragile");
      EXPECT_EQ(r.item, ws.items[1].identifier);
      ASSERT_NE(r.pdi.find("analysisError"), nullptr);
      EXPECT_NE(r.pdi.find("analysisError")->find("injected fault"), std::string::npos);
      EXPECT_EQ(r.pdi.entries_of(PdiEntity::context).size(), 1u);
    } else {
      EXPECT_EQ(r.pdi.find("analysisError"), nullptr);
    }
  }
  EXPECT_EQ(failures, 1u);
}

TEST(RunAll, MisfiledEntriesBecomeErrors) {
  TempDir t;
  Workspace ws = make_workspace(t, {{"x", "1"}});
  AnalyzerRegistry reg;
  reg.add(custom("liar", [](const DigitalItem&, ContentReader&) {
    Pdi p;
    p.add(PdiEntry{PdiEntity::provenance, "MD5", "abc"});
    return p;
  }));
  auto r = run_all(reg, ws, {"liar"}).at(0);
  EXPECT_TRUE(r.failed);
  EXPECT_NE(r.pdi.find("analysisError")->find("UnknownPdiType"), std::string::npos);
}

TEST(RunAll, WorkerCountDoesNotChangeReports) {
  std::vector<fixtures::Entry> files;
  for (int i = 0; i < 24; ++i) files.push_back({"f" + std::to_string(i), fixtures::random_bytes(static_cast<std::size_t>(i) * 997, static_cast<std::uint64_t>(i), i % 2)});
  TempDir t;
  Workspace ws = make_workspace(t, files);
  AnalyzerRegistry reg = builtin_registry();
  RunOptions one, many;
  many.workers = 4;
  auto a = run_all(reg, ws, default_analyzer_ids(), one);
  auto b = run_all(reg, ws, default_analyzer_ids(), many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].item, b[i].item);
    EXPECT_EQ(a[i].analyzer_id, b[i].analyzer_id);
    EXPECT_EQ(a[i].pdi, b[i].pdi);
  }
}

TEST(RunAll, TimingsAreRecordedPerReport) {
  TempDir t;
  Workspace ws = make_workspace(t, small_set());
  timing::TimingCollector timings;
  RunOptions opts;
  opts.timings = &timings;
  opts.workers = 3;
  auto started = Clock::now();
  auto reports = run_all(builtin_registry(), ws, default_analyzer_ids(), opts);
  auto wall = Clock::now() - started;
  auto records = timings.records();
  ASSERT_EQ(records.size(), reports.size());
  timing::Duration sum{0};
  for (const auto& r : reports) sum += r.duration;
  EXPECT_LE(sum, wall * opts.workers);
}

TEST(RunAll, FiletypeReadsOnlyItsPrefix) {
  TempDir t;
  Workspace ws = make_workspace(t, {{"big", fixtures::random_bytes(300000, 1)}});
  auto r = run_all(builtin_registry(), ws, {"filetype"}).at(0);
  EXPECT_LE(r.bytes_read, analysis::default_prefix_bytes);
  EXPECT_GT(r.bytes_read, 0u);
}

TEST(RunAll, SlowAnalyzerTimesOut) {
  TempDir t;
  Workspace ws = make_workspace(t, {{"a", "1"}, {"b", "2"}});
  AnalyzerRegistry reg;
  reg.add(custom("sleepy", [](const DigitalItem& item, ContentReader&) {
    if (item.relative_path == "b") std::this_thread::sleep_for(std::chrono::milliseconds(60));
    return Pdi();
  }));
  RunOptions opts;
  opts.timeout = std::chrono::milliseconds(20);
  auto reports = run_all(reg, ws, {"sleepy"}, opts);
  EXPECT_FALSE(reports[0].failed);
  ASSERT_TRUE(reports[1].failed);
  EXPECT_NE(reports[1].pdi.find("analysisError")->find("AnalysisTimeout"), std::string::npos);
}

TEST(ContentReader, PrefixLimitAndCounter) {
  TempDir t;
  fixtures::write_file(t / "f", std::string(10000, 'z'));
  ContentReader r(t / "f", 4096);
  auto all = r.read_all();
  EXPECT_EQ(all.size(), 4096u);
  EXPECT_EQ(r.bytes_read(), 4096u);
  EXPECT_TRUE(r.truncated());
  EXPECT_EQ(r.file_size(), 10000u);
}
