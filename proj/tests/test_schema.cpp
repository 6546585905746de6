#include <gtest/gtest.h>

#include "d2d/schema.hpp"
#include "support/fixtures.hpp"
#include "support/runs.hpp"

using namespace d2d;

namespace {

const char* const head =
    "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    "<didl:DIDL xmlns:didl=\"urn:mpeg:mpeg21:2002:02-DIDL-NS\" xmlns:daap=\"urn:x-d2d:daap\">";

std::string pdi(const std::string& body) { return "<daap:PDI>" + body + "</daap:PDI>"; }

std::string entry(const std::string& entity, const std::string& type, const std::string& value) {
  return "<daap:" + entity + "><daap:type>" + type + "</daap:type><daap:value>" + value + "</daap:value></daap:" + entity + ">";
}

std::string statement(const std::string& payload) {
  return "<didl:Descriptor><didl:Statement mimeType=\"text/xml; charset=UTF-8\">" + payload +
         "</didl:Statement></didl:Descriptor>";
}

std::string doc_with_component(const std::string& component_body) {
  return std::string(head) + "<didl:Container><didl:Item><didl:Component>" + component_body +
         "</didl:Component></didl:Item></didl:Container></didl:DIDL>";
}

const std::string good_resource = "<didl:Resource mimeType=\"text/plain\" ref=\"a.txt\"/>";
const std::string good_pdi = pdi("<daap:signature>s</daap:signature>" + entry("provenance", "lastModified", "t") +
                                 entry("fixity", "MD5", "x") + "<daap:rawOutput/>");

struct Case {
  const char* name;
  std::string xml;
  bool valid;
};

std::vector<Case> cases() {
  return {
      {"minimal", doc_with_component(good_resource), true},
      {"with_pdi", doc_with_component(statement(good_pdi) + good_resource), true},
      {"fixity_before_provenance",
       doc_with_component(statement(pdi("<daap:signature>s</daap:signature>" + entry("fixity", "MD5", "x") +
                                        entry("provenance", "lastModified", "t") + "<daap:rawOutput/>")) +
                          good_resource),
       false},
      {"missing_signature",
       doc_with_component(statement(pdi(entry("fixity", "MD5", "x") + "<daap:rawOutput/>")) + good_resource), false},
      {"missing_raw_output", doc_with_component(statement(pdi("<daap:signature>s</daap:signature>")) + good_resource), false},
      {"two_signatures",
       doc_with_component(statement(pdi("<daap:signature>s</daap:signature><daap:signature>t</daap:signature><daap:rawOutput/>")) +
                          good_resource),
       false},
      {"entry_without_type",
       doc_with_component(statement(pdi("<daap:signature>s</daap:signature><daap:context><daap:value>v</daap:value></daap:context><daap:rawOutput/>")) +
                          good_resource),
       false},
      {"unknown_pdi_child",
       doc_with_component(statement(pdi("<daap:signature>s</daap:signature><daap:extra/><daap:rawOutput/>")) + good_resource),
       false},
      {"component_without_resource", doc_with_component(statement(good_pdi)), false},
      {"resource_without_mime", doc_with_component("<didl:Resource ref=\"a\"/>"), false},
      {"resource_bad_encoding", doc_with_component("<didl:Resource mimeType=\"x/y\" encoding=\"hex\">00</didl:Resource>"), false},
      {"resource_base64", doc_with_component("<didl:Resource mimeType=\"x/y\" encoding=\"base64\">AAE=</didl:Resource>"), true},
      {"unknown_attribute", doc_with_component("<didl:Resource mimeType=\"x/y\" colour=\"red\"/>"), false},
      {"foreign_statement_payload",
       doc_with_component("<didl:Descriptor><didl:Statement mimeType=\"text/xml\"><x:any xmlns:x=\"urn:other\"><x:deep/></x:any></didl:Statement></didl:Descriptor>" +
                          good_resource),
       true},
      {"text_statement",
       doc_with_component("<didl:Descriptor><didl:Statement mimeType=\"text/plain\">hello</didl:Statement></didl:Descriptor>" + good_resource),
       true},
      {"statement_without_mime",
       doc_with_component("<didl:Descriptor><didl:Statement/></didl:Descriptor>" + good_resource), false},
      {"empty_container", std::string(head) + "<didl:Container/></didl:DIDL>", false},
      {"empty_didl", std::string(head) + "</didl:DIDL>", false},
      {"item_with_only_descriptor",
       std::string(head) +
           "<didl:Container><didl:Item><didl:Descriptor><didl:Statement mimeType=\"a/b\"/></didl:Descriptor></didl:Item></didl:Container></didl:DIDL>",
       false},
      {"descriptor_after_component",
       std::string(head) + "<didl:Container><didl:Item><didl:Component>" + good_resource +
           "</didl:Component><didl:Descriptor><didl:Statement mimeType=\"a/b\"/></didl:Descriptor></didl:Item></didl:Container></didl:DIDL>",
       false},
      {"nested_containers",
       std::string(head) + "<didl:Container><didl:Container><didl:Item><didl:Component>" + good_resource +
           "</didl:Component></didl:Item></didl:Container></didl:Container></didl:DIDL>",
       true},
      {"text_in_element_only", doc_with_component("stray text" + good_resource), false},
      {"wrong_root", "<didl:Item xmlns:didl=\"urn:mpeg:mpeg21:2002:02-DIDL-NS\"/>", false},
      {"undeclared_root", "<root/>", false},
      {"wrong_namespace",
       "<didl:DIDL xmlns:didl=\"urn:mpeg:mpeg21:2002:01-DIDL-NS\"><didl:Container/></didl:DIDL>", false},
  };
}

}  // namespace

TEST(Schema, FrozenVerdicts) {
  for (const auto& c : cases()) {
    auto v = schema::validate_against_schema(c.xml);
    EXPECT_EQ(v.empty(), c.valid) << c.name << (v.empty() ? "" : ": " + v.front().str());
  }
}

TEST(Schema, ViolationsCarryUsefulMessages) {
  auto v = schema::validate_against_schema(cases()[2].xml);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v.front().str().find("provenance"), std::string::npos) << v.front().str();
  EXPECT_GT(v.front().line, 0u);
}

TEST(Schema, UnparsableInputThrows) {
  try {
    schema::validate_against_schema("<didl:DIDL");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::parse_error);
  }
}

TEST(Schema, RejectsUnsupportedConstructs) {
  schema::SchemaSet s;
  EXPECT_THROW(s.add("<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\"><xs:redefine/></xs:schema>"), Error);
  EXPECT_THROW(s.add("<notaschema/>"), Error);
}

TEST(Schema, EmbeddedCopiesMatchShippedFiles) {
  EXPECT_EQ(fixtures::read_file(fixtures::source_dir() / "schema/didl.xsd"), schema::didl_xsd);
  EXPECT_EQ(fixtures::read_file(fixtures::source_dir() / "schema/daap.xsd"), schema::daap_xsd);
}

TEST(Schema, RealOutputIsValid) {
  fixtures::TempDir t;
  auto run = runs::analyze(t, runs::mixed_files());
  auto v = schema::validate_against_schema(didl::serialize(run.document()));
  EXPECT_TRUE(v.empty()) << v.front().str();
}

// xmlschema (Python) judges the same documents with the shipped XSD files.
TEST(Schema, AgreesWithXmlschemaPackage) {
  if (!fixtures::python_has("xmlschema")) GTEST_SKIP() << "python xmlschema not installed";
  fixtures::TempDir t;
  auto all = cases();
  fixtures::TempDir run_dir;
  auto run = runs::analyze(run_dir, runs::mixed_files());
  all.push_back({"real_output", didl::serialize(run.document()), true});
  for (std::size_t i = 0; i < all.size(); ++i) fixtures::write_file(t / ("case" + std::to_string(i) + ".xml"), all[i].xml);
  auto res = fixtures::python(R"PY(
import sys, xmlschema
root, n = sys.argv[1], int(sys.argv[2])
schema = xmlschema.XMLSchema([root + '/schema/didl.xsd', root + '/schema/daap.xsd'])
for i in range(n):
    print(1 if schema.is_valid('%s/case%d.xml' % (sys.argv[3], i)) else 0)
)PY",
                              {fixtures::source_dir().string(), std::to_string(all.size()), t.path().string()});
  ASSERT_EQ(res.status, 0) << res.output;
  std::istringstream lines(res.output);
  for (const auto& c : all) {
    int verdict = -1;
    lines >> verdict;
    EXPECT_EQ(verdict == 1, c.valid) << "xmlschema disagrees with frozen verdict on " << c.name;
    EXPECT_EQ(schema::validate_against_schema(c.xml).empty(), verdict == 1) << c.name;
  }
}
