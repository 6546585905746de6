#pragma once

// Dissemination: the MPEG-21 DIDL tree, its construction from analyzer
// reports, deterministic serialization and parsing back.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "d2d/archive.hpp"
#include "d2d/error.hpp"
#include "d2d/framework.hpp"
#include "d2d/model.hpp"
#include "d2d/text.hpp"
#include "d2d/xml.hpp"

namespace d2d::didl {

inline constexpr std::string_view didl_ns = "urn:mpeg:mpeg21:2002:02-DIDL-NS";
inline constexpr std::string_view default_daap_ns = "urn:x-d2d:daap";
inline constexpr std::string_view statement_pdi_mime = "text/xml; charset=UTF-8";
inline constexpr std::string_view statement_doc_mime = "text/plain; charset=UTF-8";
inline constexpr std::string_view signature_mime = "text/plain; charset=utf8";

struct ByReference {
  std::string uri;
  friend bool operator==(const ByReference&, const ByReference&) = default;
};

enum class Encoding { none, base64 };

struct ByValue {
  std::string bytes;
  Encoding encoding = Encoding::none;
  friend bool operator==(const ByValue&, const ByValue&) = default;
};

struct Resource {
  std::string mime_type;
  std::variant<ByReference, ByValue> content;
  friend bool operator==(const Resource&, const Resource&) = default;
};

struct Statement {
  std::string mime_type;
  std::variant<std::string, Pdi> payload;
  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Descriptor {
  Statement statement;
  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

struct Component {
  std::vector<Descriptor> descriptors;
  std::vector<Resource> resources;
  friend bool operator==(const Component&, const Component&) = default;
};

struct Item {
  std::vector<Descriptor> descriptors;
  std::vector<Component> components;
  std::vector<Item> sub_items;
  friend bool operator==(const Item&, const Item&) = default;
};

struct Container {
  std::vector<Descriptor> descriptors;
  std::vector<Container> containers;
  std::vector<Item> items;
  friend bool operator==(const Container&, const Container&) = default;
};

struct Didl {
  std::vector<Container> containers;
  std::string pdi_namespace = std::string(default_daap_ns);
  friend bool operator==(const Didl&, const Didl&) = default;
};

// ---------------------------------------------------------------------------
// Structural invariants

namespace detail {

[[noreturn]] inline void invalid(const std::string& msg) { throw Error(errc::invalid_document, msg); }

inline void check(const Component& c) {
  if (c.resources.empty()) invalid("Component without a Resource");
}

inline void check(const Item& it) {
  if (it.components.empty() && it.sub_items.empty()) invalid("Item without a Component or Item");
  for (const auto& c : it.components) check(c);
  for (const auto& s : it.sub_items) check(s);
}

inline void check(const Container& c) {
  if (c.containers.empty() && c.items.empty()) invalid("Container without a Container or Item");
  for (const auto& sub : c.containers) check(sub);
  for (const auto& it : c.items) check(it);
}

}  // namespace detail

/// Throws invalid_document when a cardinality rule of the data model is broken.
inline void check_invariants(const Didl& doc) {
  if (doc.containers.empty()) detail::invalid("DIDL without a Container");
  if (doc.pdi_namespace.empty() || doc.pdi_namespace == didl_ns) detail::invalid("PDI namespace must be distinct");
  for (const auto& c : doc.containers) detail::check(c);
}

// ---------------------------------------------------------------------------
// Construction

struct BuildOptions {
  std::string archive_mime = "application/octet-stream";
  std::string pdi_namespace = std::string(default_daap_ns);
};

namespace detail {

inline Resource signature_resource(const Pdi& pdi) {
  return {std::string(signature_mime), ByValue{text::sanitize_xml_text(pdi.signature()), Encoding::none}};
}

inline std::string item_mime(const std::vector<const AnalyzerReport*>& reports) {
  for (const auto* r : reports)
    if (r->analyzer_id == "filetype")
      if (const std::string* m = r->pdi.find("mimeType")) return *m;
  for (const auto* r : reports)
    if (const std::string* m = r->pdi.find("mimeType")) return *m;
  return "application/octet-stream";
}

}  // namespace detail

/// DIDL > Container > [Descriptor, archive Item > [archive Component, one
/// Item per workspace item]]. Each item Item gets one Component per report in
/// report order; the last one also references the extracted file.
inline Didl build_document(const Workspace& ws, const std::vector<AnalyzerReport>& reports, std::string_view archive_ref,
                           const BuildOptions& opts = {}) {
  // Items sharing an identifier (content-addressed duplicates) take reports
  // positionally: the first item that lacks a report from that analyzer.
  std::map<std::string, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < ws.items.size(); ++i) by_id[ws.items[i].identifier.external()].push_back(i);
  std::vector<std::vector<const AnalyzerReport*>> per_item(ws.items.size());
  for (const auto& r : reports) {
    auto it = by_id.find(r.item.external());
    if (it == by_id.end()) throw Error(errc::orphan_report, r.analyzer_id + " report for " + r.item.external());
    bool placed = false;
    for (std::size_t idx : it->second) {
      auto& mine = per_item[idx];
      bool has = std::any_of(mine.begin(), mine.end(), [&](const AnalyzerReport* p) { return p->analyzer_id == r.analyzer_id; });
      if (!has) {
        mine.push_back(&r);
        placed = true;
        break;
      }
    }
    if (!placed) throw Error(errc::orphan_report, "surplus " + r.analyzer_id + " report for " + r.item.external());
  }

  Item archive;
  archive.components.push_back(Component{{}, {Resource{opts.archive_mime, ByReference{std::string(archive_ref)}}}});
  for (std::size_t i = 0; i < ws.items.size(); ++i) {
    const DigitalItem& di = ws.items[i];
    Item item;
    for (const AnalyzerReport* r : per_item[i]) {
      Component c;
      c.descriptors.push_back(Descriptor{Statement{std::string(statement_pdi_mime), r->pdi}});
      c.resources.push_back(detail::signature_resource(r->pdi));
      item.components.push_back(std::move(c));
    }
    Resource file{detail::item_mime(per_item[i]), ByReference{di.relative_path}};
    if (item.components.empty())
      item.components.push_back(Component{{}, {std::move(file)}});
    else
      item.components.back().resources.push_back(std::move(file));
    archive.sub_items.push_back(std::move(item));
  }

  Container container;
  container.descriptors.push_back(Descriptor{Statement{std::string(statement_doc_mime), std::string()}});
  container.items.push_back(std::move(archive));
  Didl doc;
  doc.pdi_namespace = opts.pdi_namespace;
  doc.containers.push_back(std::move(container));
  return doc;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

using Attrs = std::vector<std::pair<std::string_view, std::string_view>>;

class Writer {
 public:
  explicit Writer(std::string& out) : out_(out) {}

  void open(int depth, std::string_view tag, const Attrs& attrs = {}) {
    start(depth, tag, attrs);
    out_ += ">\n";
  }
  void close(int depth, std::string_view tag) {
    indent(depth);
    out_ += "</";
    out_ += tag;
    out_ += ">\n";
  }
  /// Element with inline text, self-closing when the text is empty.
  void leaf(int depth, std::string_view tag, std::string_view text, const Attrs& attrs = {}) {
    start(depth, tag, attrs);
    if (text.empty()) {
      out_ += "/>\n";
      return;
    }
    out_ += '>';
    if (!text::is_xml_safe(text)) throw Error(errc::encoding_error, "text of <" + std::string(tag) + "> is not XML-safe UTF-8");
    xml::escape_text(out_, text);
    out_ += "</";
    out_ += tag;
    out_ += ">\n";
  }

 private:
  void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 2, ' '); }
  void start(int depth, std::string_view tag, const Attrs& attrs) {
    indent(depth);
    out_ += '<';
    out_ += tag;
    for (const auto& [name, value] : attrs) {
      if (!text::is_xml_safe(value)) throw Error(errc::encoding_error, "attribute " + std::string(name) + " is not XML-safe UTF-8");
      out_ += ' ';
      out_ += name;
      out_ += "=\"";
      xml::escape_attribute(out_, value);
      out_ += '"';
    }
  }

  std::string& out_;
};

inline void write_pdi(Writer& w, const Pdi& pdi, int depth) {
  w.open(depth, "daap:PDI");
  w.leaf(depth + 1, "daap:signature", text::sanitize_xml_text(pdi.signature()));
  for (const auto& e : pdi.ordered_entries()) {
    std::string tag = "daap:" + std::string(to_string(e.entity));
    w.open(depth + 1, tag);
    w.leaf(depth + 2, "daap:type", e.type_name);
    w.leaf(depth + 2, "daap:value", e.value);
    w.close(depth + 1, tag);
  }
  w.leaf(depth + 1, "daap:rawOutput", pdi.raw_output());
  w.close(depth, "daap:PDI");
}

inline void write(Writer& w, const Descriptor& d, int depth) {
  const Statement& s = d.statement;
  w.open(depth, "didl:Descriptor");
  if (const Pdi* pdi = std::get_if<Pdi>(&s.payload)) {
    w.open(depth + 1, "didl:Statement", {{"mimeType", s.mime_type}});
    write_pdi(w, *pdi, depth + 2);
    w.close(depth + 1, "didl:Statement");
  } else {
    w.leaf(depth + 1, "didl:Statement", std::get<std::string>(s.payload), {{"mimeType", s.mime_type}});
  }
  w.close(depth, "didl:Descriptor");
}

inline void write(Writer& w, const Resource& r, int depth) {
  if (const ByReference* ref = std::get_if<ByReference>(&r.content)) {
    w.leaf(depth, "didl:Resource", "", {{"mimeType", r.mime_type}, {"ref", ref->uri}});
    return;
  }
  const ByValue& v = std::get<ByValue>(r.content);
  if (v.encoding == Encoding::base64) {
    w.leaf(depth, "didl:Resource", text::base64_encode(as_bytes(v.bytes)), {{"mimeType", r.mime_type}, {"encoding", "base64"}});
  } else {
    if (!text::is_xml_safe(v.bytes)) throw Error(errc::encoding_error, "by-value Resource is not XML-safe UTF-8; use base64");
    w.leaf(depth, "didl:Resource", v.bytes, {{"mimeType", r.mime_type}});
  }
}

inline void write(Writer& w, const Component& c, int depth) {
  w.open(depth, "didl:Component");
  for (const auto& d : c.descriptors) write(w, d, depth + 1);
  for (const auto& r : c.resources) write(w, r, depth + 1);
  w.close(depth, "didl:Component");
}

inline void write(Writer& w, const Item& it, int depth) {
  w.open(depth, "didl:Item");
  for (const auto& d : it.descriptors) write(w, d, depth + 1);
  for (const auto& c : it.components) write(w, c, depth + 1);
  for (const auto& s : it.sub_items) write(w, s, depth + 1);
  w.close(depth, "didl:Item");
}

inline void write(Writer& w, const Container& c, int depth) {
  w.open(depth, "didl:Container");
  for (const auto& d : c.descriptors) write(w, d, depth + 1);
  for (const auto& sub : c.containers) write(w, sub, depth + 1);
  for (const auto& it : c.items) write(w, it, depth + 1);
  w.close(depth, "didl:Container");
}

}  // namespace detail

/// One Item as it appears at the given nesting depth of a full document.
inline std::string serialize_item(const Item& item, int depth) {
  detail::check(item);
  std::string out;
  detail::Writer w(out);
  detail::write(w, item, depth);
  return out;
}

inline std::string serialize(const Didl& doc) {
  check_invariants(doc);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::string locations = doc.pdi_namespace + " daap.xsd " + std::string(didl_ns) + " didl.xsd";
  detail::Writer w(out);
  w.open(0, "didl:DIDL",
         {{"xmlns:didl", didl_ns},
          {"xmlns:daap", doc.pdi_namespace},
          {"xmlns:xsi", xml::xsi_uri},
          {"xsi:schemaLocation", locations}});
  for (const auto& c : doc.containers) detail::write(w, c, 1);
  w.close(0, "didl:DIDL");
  return out;
}

// ---------------------------------------------------------------------------
// Parsing back

namespace detail {

inline std::vector<const xml::Element*> children(const xml::Element& el) {
  std::vector<const xml::Element*> out;
  for (const auto& c : el.children) out.push_back(&c);
  return out;
}

inline const std::string& required_attr(const xml::Element& el, std::string_view name) {
  const xml::Attribute* a = el.attribute(name);
  if (!a) invalid("<" + el.qname + "> line " + std::to_string(el.line) + " lacks " + std::string(name));
  return a->value;
}

inline std::optional<PdiEntity> entity_named(std::string_view local) {
  for (PdiEntity e : all_entities)
    if (to_string(e) == local) return e;
  return std::nullopt;
}

inline Pdi read_pdi(const xml::Element& el, std::string_view daap) {
  Pdi pdi;
  bool have_signature = false, have_raw = false;
  for (const auto& c : el.children) {
    if (c.ns != daap) invalid("unexpected <" + c.qname + "> in PDI");
    if (c.local == "signature") {
      pdi.set_signature(c.text);
      have_signature = true;
    } else if (c.local == "rawOutput") {
      pdi.set_raw_output(c.text);
      have_raw = true;
    } else if (auto entity = entity_named(c.local)) {
      const xml::Element *type = nullptr, *value = nullptr;
      for (const auto& f : c.children) {
        if (f.is(daap, "type")) type = &f;
        if (f.is(daap, "value")) value = &f;
      }
      if (!type || !value) invalid("PDI entry without type/value");
      pdi.add(PdiEntry{*entity, type->text, value->text});
    } else {
      invalid("unexpected <" + c.qname + "> in PDI");
    }
  }
  if (!have_signature || !have_raw) invalid("PDI lacks signature or rawOutput");
  return pdi;
}

inline Descriptor read_descriptor(const xml::Element& el, std::string_view daap) {
  if (el.children.size() != 1 || !el.children[0].is(didl_ns, "Statement")) invalid("Descriptor must hold one Statement");
  const xml::Element& st = el.children[0];
  Statement s;
  s.mime_type = required_attr(st, "mimeType");
  if (st.children.empty()) {
    s.payload = st.text;
  } else {
    if (st.children.size() != 1 || !st.children[0].is(daap, "PDI")) invalid("Statement payload must be a single PDI");
    s.payload = read_pdi(st.children[0], daap);
  }
  return Descriptor{std::move(s)};
}

inline Resource read_resource(const xml::Element& el) {
  Resource r;
  r.mime_type = required_attr(el, "mimeType");
  if (const xml::Attribute* ref = el.attribute("ref")) {
    r.content = ByReference{ref->value};
  } else if (const xml::Attribute* enc = el.attribute("encoding")) {
    if (enc->value != "base64") invalid("unknown Resource encoding " + enc->value);
    auto bytes = text::base64_decode(el.text);
    r.content = ByValue{std::string(bytes.begin(), bytes.end()), Encoding::base64};
  } else {
    r.content = ByValue{el.text, Encoding::none};
  }
  return r;
}

inline Component read_component(const xml::Element& el, std::string_view daap) {
  Component c;
  for (const auto& ch : el.children) {
    if (ch.is(didl_ns, "Descriptor"))
      c.descriptors.push_back(read_descriptor(ch, daap));
    else if (ch.is(didl_ns, "Resource"))
      c.resources.push_back(read_resource(ch));
    else
      invalid("unexpected <" + ch.qname + "> in Component");
  }
  return c;
}

inline Item read_item(const xml::Element& el, std::string_view daap) {
  Item it;
  for (const auto& ch : el.children) {
    if (ch.is(didl_ns, "Descriptor"))
      it.descriptors.push_back(read_descriptor(ch, daap));
    else if (ch.is(didl_ns, "Component"))
      it.components.push_back(read_component(ch, daap));
    else if (ch.is(didl_ns, "Item"))
      it.sub_items.push_back(read_item(ch, daap));
    else
      invalid("unexpected <" + ch.qname + "> in Item");
  }
  return it;
}

inline Container read_container(const xml::Element& el, std::string_view daap) {
  Container c;
  for (const auto& ch : el.children) {
    if (ch.is(didl_ns, "Descriptor"))
      c.descriptors.push_back(read_descriptor(ch, daap));
    else if (ch.is(didl_ns, "Container"))
      c.containers.push_back(read_container(ch, daap));
    else if (ch.is(didl_ns, "Item"))
      c.items.push_back(read_item(ch, daap));
    else
      invalid("unexpected <" + ch.qname + "> in Container");
  }
  return c;
}

}  // namespace detail

/// Rebuilds the tree from serialized DIDL. The PDI namespace is whatever the
/// root binds to the "daap" prefix.
inline Didl parse_document(std::string_view xml_text) {
  xml::Document parsed = xml::parse(xml_text);
  const xml::Element& root = parsed.root;
  if (!root.is(didl_ns, "DIDL")) detail::invalid("root is not {" + std::string(didl_ns) + "}DIDL");
  Didl doc;
  if (const xml::Attribute* daap = root.attribute("xmlns:daap")) doc.pdi_namespace = daap->value;
  for (const auto& ch : root.children) {
    if (!ch.is(didl_ns, "Container")) detail::invalid("unexpected <" + ch.qname + "> in DIDL");
    doc.containers.push_back(detail::read_container(ch, doc.pdi_namespace));
  }
  return doc;
}

/// Number of Statements whose payload is a PDI.
inline std::size_t count_pdi_statements(const Didl& doc) {
  std::size_t n = 0;
  auto descs = [&](const std::vector<Descriptor>& ds) {
    for (const auto& d : ds) n += std::holds_alternative<Pdi>(d.statement.payload) ? 1 : 0;
  };
  auto item = [&](auto&& self, const Item& it) -> void {
    descs(it.descriptors);
    for (const auto& c : it.components) descs(c.descriptors);
    for (const auto& s : it.sub_items) self(self, s);
  };
  auto container = [&](auto&& self, const Container& c) -> void {
    descs(c.descriptors);
    for (const auto& sub : c.containers) self(self, sub);
    for (const auto& it : c.items) item(item, it);
  };
  for (const auto& c : doc.containers) container(container, c);
  return n;
}

}  // namespace d2d::didl
