#pragma once

// Validation of documents against the shipped XSDs.
//
// This is an interpreter for the subset of XML Schema 1.0 that those schemas
// use: global and local element declarations, element refs, named and
// anonymous complex types (sequence, choice, any, minOccurs/maxOccurs, mixed,
// simpleContent extension, attributes with use="required", anyAttribute),
// and simple types restricted by enumeration. Built-in xs: simple types are
// accepted as strings. Anything outside the subset is rejected when the
// schema is loaded rather than silently ignored.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/error.hpp"
#include "d2d/xml.hpp"

namespace d2d::schema {

inline constexpr std::string_view xsd_ns = "http://www.w3.org/2001/XMLSchema";
inline constexpr std::string_view default_pdi_ns = "urn:x-d2d:daap";

struct QName {
  std::string ns;
  std::string local;
  auto operator<=>(const QName&) const = default;
  std::string str() const { return "{" + ns + "}" + local; }
};

struct Violation {
  std::size_t line = 0;
  std::string message;
  std::string str() const { return "line " + std::to_string(line) + ": " + message; }
};

namespace detail {

inline constexpr std::size_t unbounded = static_cast<std::size_t>(-1);

struct ComplexType;

struct Particle {
  enum class Kind { element, any, sequence, choice } kind = Kind::sequence;
  std::size_t min = 1;
  std::size_t max = 1;
  // element
  QName name;
  bool is_ref = false;
  QName type;
  std::shared_ptr<ComplexType> anonymous;
  // any
  std::string namespaces = "##any";
  std::string owner_ns;
  std::string process = "strict";
  // sequence / choice
  std::vector<Particle> children;
};

struct AttributeDecl {
  std::string name;
  QName type;
  bool required = false;
};

struct ComplexType {
  bool mixed = false;
  bool simple_content = false;
  QName simple_base;
  std::optional<Particle> content;
  std::vector<AttributeDecl> attributes;
  bool any_attribute = false;
};

struct SimpleType {
  QName base;
  std::vector<std::string> enumeration;
};

struct ElementDecl {
  QName name;
  QName type;
  std::shared_ptr<ComplexType> anonymous;
};

}  // namespace detail

class SchemaSet {
 public:
  /// Loads one schema document. Throws parse_error for malformed XML or
  /// constructs outside the supported subset.
  void add(std::string_view xsd_text) {
    xml::Document doc = xml::parse(xsd_text);
    const xml::Element& root = doc.root;
    if (!root.is(xsd_ns, "schema")) fail(root, "root is not xs:schema");
    Loader l{root, attr(root, "targetNamespace")};
    for (const auto& c : root.children) {
      if (c.ns != xsd_ns) fail(c, "unexpected element");
      if (c.local == "element") {
        detail::ElementDecl d;
        d.name = {l.target, required(c, "name")};
        l.element_type(c, d.type, d.anonymous);
        elements_[d.name] = std::move(d);
      } else if (c.local == "complexType") {
        complex_[{l.target, required(c, "name")}] = l.complex_type(c);
      } else if (c.local == "simpleType") {
        simple_[{l.target, required(c, "name")}] = l.simple_type(c);
      } else if (c.local != "annotation" && c.local != "import") {
        fail(c, "unsupported schema construct xs:" + c.local);
      }
    }
  }

  /// The shipped DIDL and PDI schemas, with the PDI vocabulary retargeted to
  /// the given namespace.
  static SchemaSet builtin(std::string_view pdi_namespace = default_pdi_ns);

  /// Violations found in the document; empty means valid. Throws parse_error
  /// when the input is not well-formed XML.
  std::vector<Violation> validate(std::string_view xml_text) const {
    xml::Document doc = xml::parse(xml_text);
    std::vector<Violation> out;
    for (const auto& e : doc.namespace_errors) out.push_back({doc.root.line, "namespace error: " + e});
    QName root{doc.root.ns, doc.root.local};
    auto it = elements_.find(root);
    if (it == elements_.end()) {
      out.push_back({doc.root.line, "no global declaration for root element " + root.str()});
      return out;
    }
    check_element(doc.root, it->second.type, it->second.anonymous.get(), out);
    return out;
  }

  bool has_element(const QName& name) const { return elements_.count(name) > 0; }

 private:
  using Particle = detail::Particle;

  [[noreturn]] static void fail(const xml::Element& el, const std::string& msg) {
    throw Error(errc::parse_error, "schema line " + std::to_string(el.line) + " <" + el.qname + ">: " + msg);
  }

  static std::string attr(const xml::Element& el, std::string_view name) {
    const xml::Attribute* a = el.attribute(name);
    return a ? a->value : std::string();
  }

  static std::string required(const xml::Element& el, std::string_view name) {
    const xml::Attribute* a = el.attribute(name);
    if (!a) fail(el, "missing @" + std::string(name));
    return a->value;
  }

  struct Loader {
    const xml::Element& root;
    std::string target;

    QName resolve(const xml::Element& el, const std::string& qname) const {
      auto colon = qname.find(':');
      std::string prefix = colon == std::string::npos ? "" : qname.substr(0, colon);
      std::string local = colon == std::string::npos ? qname : qname.substr(colon + 1);
      std::string decl = prefix.empty() ? "xmlns" : "xmlns:" + prefix;
      // Prefixes are only looked up on the element itself and the schema root.
      for (const xml::Element* scope : {&el, &root})
        if (const xml::Attribute* a = scope->attribute(decl)) return {a->value, local};
      if (prefix.empty()) return {"", local};
      fail(el, "unbound prefix in '" + qname + "'");
    }

    static std::size_t occurs(const xml::Element& el, std::string_view name) {
      const xml::Attribute* a = el.attribute(name);
      if (!a) return 1;
      if (a->value == "unbounded") return detail::unbounded;
      try {
        std::size_t used = 0;
        unsigned long v = std::stoul(a->value, &used);
        if (used == a->value.size()) return v;
      } catch (const std::exception&) {
      }
      fail(el, "bad @" + std::string(name));
    }

    void element_type(const xml::Element& el, QName& type, std::shared_ptr<detail::ComplexType>& anonymous) {
      if (const xml::Attribute* t = el.attribute("type")) type = resolve(el, t->value);
      for (const auto& c : el.children) {
        if (c.is(xsd_ns, "complexType"))
          anonymous = std::make_shared<detail::ComplexType>(complex_type(c));
        else if (!c.is(xsd_ns, "annotation"))
          fail(c, "unsupported element content");
      }
      if (type.local.empty() && !anonymous) type = {std::string(xsd_ns), "anyType"};
    }

    Particle particle(const xml::Element& el) {
      Particle p;
      p.min = occurs(el, "minOccurs");
      p.max = occurs(el, "maxOccurs");
      if (p.max < p.min) fail(el, "maxOccurs below minOccurs");
      if (el.local == "element") {
        p.kind = Particle::Kind::element;
        if (const xml::Attribute* ref = el.attribute("ref")) {
          p.is_ref = true;
          p.name = resolve(el, ref->value);
        } else {
          p.name = {target, required(el, "name")};
          element_type(el, p.type, p.anonymous);
        }
      } else if (el.local == "any") {
        p.kind = Particle::Kind::any;
        if (const xml::Attribute* a = el.attribute("namespace")) p.namespaces = a->value;
        if (const xml::Attribute* a = el.attribute("processContents")) p.process = a->value;
        p.owner_ns = target;
      } else if (el.local == "sequence" || el.local == "choice") {
        p.kind = el.local == "sequence" ? Particle::Kind::sequence : Particle::Kind::choice;
        for (const auto& c : el.children) {
          if (c.is(xsd_ns, "annotation")) continue;
          if (c.ns != xsd_ns || (c.local != "element" && c.local != "any" && c.local != "sequence" && c.local != "choice"))
            fail(c, "unsupported particle");
          p.children.push_back(particle(c));
        }
      } else {
        fail(el, "unsupported particle");
      }
      return p;
    }

    detail::AttributeDecl attribute(const xml::Element& el) {
      detail::AttributeDecl a;
      a.name = required(el, "name");
      a.type = el.attribute("type") ? resolve(el, required(el, "type")) : QName{std::string(xsd_ns), "string"};
      std::string use = attr(el, "use");
      if (!use.empty() && use != "required" && use != "optional") fail(el, "unsupported @use");
      a.required = use == "required";
      return a;
    }

    void attributes_into(const xml::Element& el, detail::ComplexType& t) {
      if (el.local == "attribute")
        t.attributes.push_back(attribute(el));
      else if (el.local == "anyAttribute")
        t.any_attribute = true;
      else
        fail(el, "unsupported construct");
    }

    detail::ComplexType complex_type(const xml::Element& el) {
      detail::ComplexType t;
      t.mixed = attr(el, "mixed") == "true";
      for (const auto& c : el.children) {
        if (c.ns != xsd_ns) fail(c, "unexpected element");
        if (c.local == "annotation") continue;
        if (c.local == "sequence" || c.local == "choice") {
          if (t.content) fail(c, "second content model");
          t.content = particle(c);
        } else if (c.local == "simpleContent") {
          if (c.children.size() != 1 || !c.children[0].is(xsd_ns, "extension")) fail(c, "only xs:extension is supported");
          const xml::Element& ext = c.children[0];
          t.simple_content = true;
          t.simple_base = resolve(ext, required(ext, "base"));
          for (const auto& a : ext.children) attributes_into(a, t);
        } else {
          attributes_into(c, t);
        }
      }
      return t;
    }

    detail::SimpleType simple_type(const xml::Element& el) {
      detail::SimpleType s;
      if (el.children.size() != 1 || !el.children[0].is(xsd_ns, "restriction")) fail(el, "only xs:restriction is supported");
      const xml::Element& r = el.children[0];
      s.base = resolve(r, required(r, "base"));
      for (const auto& f : r.children) {
        if (!f.is(xsd_ns, "enumeration")) fail(f, "only xs:enumeration facets are supported");
        s.enumeration.push_back(required(f, "value"));
      }
      return s;
    }
  };

  // --- validation --------------------------------------------------------

  static bool namespace_allowed(const Particle& p, const std::string& ns) {
    if (p.namespaces == "##any") return true;
    if (p.namespaces == "##other") return !ns.empty() && ns != p.owner_ns;
    std::size_t start = 0;
    const std::string& list = p.namespaces;
    while (start < list.size()) {
      std::size_t sp = list.find(' ', start);
      std::string tok = list.substr(start, sp == std::string::npos ? std::string::npos : sp - start);
      if (tok == "##targetNamespace" ? ns == p.owner_ns : tok == "##local" ? ns.empty() : tok == ns) return true;
      if (sp == std::string::npos) break;
      start = sp + 1;
    }
    return false;
  }

  using Kids = std::vector<const xml::Element*>;
  using Positions = std::vector<char>;  // Positions[i] set when i children are consumed

  static bool any_set(const Positions& p) { return std::find(p.begin(), p.end(), 1) != p.end(); }

  Positions match_once(const Particle& p, const Kids& kids, const Positions& from) const {
    Positions out(from.size(), 0);
    switch (p.kind) {
      case Particle::Kind::element:
        for (std::size_t i = 0; i + 1 < from.size(); ++i)
          if (from[i] && kids[i]->ns == p.name.ns && kids[i]->local == p.name.local) out[i + 1] = 1;
        break;
      case Particle::Kind::any:
        for (std::size_t i = 0; i + 1 < from.size(); ++i)
          if (from[i] && namespace_allowed(p, kids[i]->ns)) out[i + 1] = 1;
        break;
      case Particle::Kind::sequence: {
        Positions cur = from;
        for (const auto& c : p.children) cur = match(c, kids, cur);
        out = cur;
        break;
      }
      case Particle::Kind::choice:
        for (const auto& c : p.children) {
          Positions r = match(c, kids, from);
          for (std::size_t i = 0; i < out.size(); ++i) out[i] |= r[i];
        }
        break;
    }
    return out;
  }

  /// End positions reachable from `from` by matching p between min and max times.
  Positions match(const Particle& p, const Kids& kids, const Positions& from) const {
    Positions result(from.size(), 0);
    if (p.min == 0) result = from;
    Positions cur = from;
    for (std::size_t count = 1; count <= p.max; ++count) {
      Positions next = match_once(p, kids, cur);
      if (!any_set(next)) break;
      bool grew = false;
      if (count >= p.min) {
        for (std::size_t i = 0; i < result.size(); ++i)
          if (next[i] && !result[i]) result[i] = 1, grew = true;
        if (!grew) break;  // nothing new can appear from here on
      } else if (count > kids.size() + 1 && next == cur) {
        break;  // min exceeds what a nullable particle can add
      }
      cur = std::move(next);
    }
    return result;
  }

  static void collect_elements(const Particle& p, std::vector<const Particle*>& out) {
    if (p.kind == Particle::Kind::element) out.push_back(&p);
    for (const auto& c : p.children) collect_elements(c, out);
  }

  static void collect_wildcards(const Particle& p, std::vector<const Particle*>& out) {
    if (p.kind == Particle::Kind::any) out.push_back(&p);
    for (const auto& c : p.children) collect_wildcards(c, out);
  }

  static std::string describe(const Particle& p) {
    auto suffix = [&] {
      if (p.min == 1 && p.max == 1) return std::string();
      if (p.min == 0 && p.max == 1) return std::string("?");
      if (p.min == 0 && p.max == detail::unbounded) return std::string("*");
      if (p.min == 1 && p.max == detail::unbounded) return std::string("+");
      return "{" + std::to_string(p.min) + "," + (p.max == detail::unbounded ? std::string() : std::to_string(p.max)) + "}";
    };
    switch (p.kind) {
      case Particle::Kind::element: return p.name.local + suffix();
      case Particle::Kind::any: return "any(" + p.namespaces + ")" + suffix();
      default: {
        std::string s = "(";
        for (std::size_t i = 0; i < p.children.size(); ++i) {
          if (i) s += p.kind == Particle::Kind::sequence ? ", " : " | ";
          s += describe(p.children[i]);
        }
        return s + ")" + suffix();
      }
    }
  }

  void check_simple_value(const xml::Element& el, const QName& type, const std::string& value, const std::string& what,
                          std::vector<Violation>& out) const {
    if (type.ns == xsd_ns) return;
    auto it = simple_.find(type);
    if (it == simple_.end()) {
      out.push_back({el.line, "unknown simple type " + type.str()});
      return;
    }
    const auto& en = it->second.enumeration;
    if (!en.empty() && std::find(en.begin(), en.end(), value) == en.end())
      out.push_back({el.line, what + " value '" + value + "' is not in the enumeration of " + type.local});
    check_simple_value(el, it->second.base, value, what, out);
  }

  void check_attributes(const xml::Element& el, const detail::ComplexType* t, std::vector<Violation>& out) const {
    for (const auto& a : el.attributes) {
      if (a.qname == "xmlns" || a.prefix == "xmlns" || a.ns == xml::xsi_uri) continue;
      const detail::AttributeDecl* decl = nullptr;
      if (t && a.ns.empty())
        for (const auto& d : t->attributes)
          if (d.name == a.local) decl = &d;
      if (decl) {
        check_simple_value(el, decl->type, a.value, "attribute " + a.qname, out);
      } else if (!(t && t->any_attribute)) {
        out.push_back({el.line, "attribute " + a.qname + " is not allowed on <" + el.qname + ">"});
      }
    }
    if (t)
      for (const auto& d : t->attributes)
        if (d.required && !el.attribute(d.name))
          out.push_back({el.line, "<" + el.qname + "> lacks required attribute " + d.name});
  }

  static bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

  void check_element(const xml::Element& el, const QName& type, const detail::ComplexType* anonymous,
                     std::vector<Violation>& out) const {
    const detail::ComplexType* ct = anonymous;
    if (!ct && type.ns == xsd_ns && type.local == "anyType") return;
    if (!ct) {
      auto it = complex_.find(type);
      if (it != complex_.end()) ct = &it->second;
    }
    if (!ct) {
      // Simple type: text only, no attributes beyond namespace plumbing.
      if (!el.children.empty()) out.push_back({el.line, "<" + el.qname + "> must not contain elements"});
      check_attributes(el, nullptr, out);
      check_simple_value(el, type, el.text, "<" + el.qname + ">", out);
      return;
    }
    check_attributes(el, ct, out);
    if (ct->simple_content) {
      if (!el.children.empty()) out.push_back({el.line, "<" + el.qname + "> must not contain elements"});
      check_simple_value(el, ct->simple_base, el.text, "<" + el.qname + ">", out);
      return;
    }
    if (!ct->mixed && !blank(el.text)) out.push_back({el.line, "<" + el.qname + "> must not contain text"});

    Kids kids;
    for (const auto& c : el.children) kids.push_back(&c);
    if (!ct->content) {
      if (!kids.empty()) out.push_back({el.line, "<" + el.qname + "> must be empty"});
      return;
    }
    Positions start(kids.size() + 1, 0);
    start[0] = 1;
    Positions end = match(*ct->content, kids, start);
    if (!end[kids.size()]) {
      // Longest prefix that can still be extended, for the message.
      std::size_t ok = 0;
      for (std::size_t n = kids.size(); n > 0; --n) {
        Kids prefix(kids.begin(), kids.begin() + static_cast<std::ptrdiff_t>(n));
        if (can_start(*ct->content, prefix)) {
          ok = n;
          break;
        }
      }
      std::string where = ok < kids.size() ? " at <" + kids[ok]->qname + "> line " + std::to_string(kids[ok]->line)
                                           : " (content ends too early)";
      out.push_back({el.line, "content of <" + el.qname + "> does not match " + describe(*ct->content) + where});
      return;
    }

    std::vector<const Particle*> decls, wildcards;
    collect_elements(*ct->content, decls);
    collect_wildcards(*ct->content, wildcards);
    for (const xml::Element* k : kids) {
      const Particle* d = nullptr;
      for (const Particle* p : decls)
        if (p->name.ns == k->ns && p->name.local == k->local) {
          d = p;
          break;
        }
      if (d) {
        if (d->is_ref) {
          auto g = elements_.find(d->name);
          if (g == elements_.end())
            out.push_back({k->line, "reference to undeclared element " + d->name.str()});
          else
            check_element(*k, g->second.type, g->second.anonymous.get(), out);
        } else {
          check_element(*k, d->type, d->anonymous.get(), out);
        }
        continue;
      }
      // Matched by a wildcard.
      std::string process = "skip";
      for (const Particle* w : wildcards)
        if (namespace_allowed(*w, k->ns)) {
          process = w->process;
          break;
        }
      if (process == "skip") continue;
      auto g = elements_.find(QName{k->ns, k->local});
      if (g != elements_.end())
        check_element(*k, g->second.type, g->second.anonymous.get(), out);
      else if (process == "strict")
        out.push_back({k->line, "no declaration for " + QName{k->ns, k->local}.str() + " under strict wildcard"});
    }
  }

  /// True when the children form a prefix of some word of the content model.
  /// Approximated by matching against the model with every minOccurs waived.
  bool can_start(const Particle& content, const Kids& prefix) const {
    Positions s(prefix.size() + 1, 0);
    s[0] = 1;
    Particle relaxed = relax(content);
    return match(relaxed, prefix, s)[prefix.size()];
  }

  static Particle relax(const Particle& p) {
    Particle r = p;
    r.min = 0;
    for (auto& c : r.children) c = relax(c);
    return r;
  }

  std::map<QName, detail::ElementDecl> elements_;
  std::map<QName, detail::ComplexType> complex_;
  std::map<QName, detail::SimpleType> simple_;
};

/// Violations of the document against the schema set (empty when valid).
inline std::vector<Violation> validate_against_schema(std::string_view xml_text, const SchemaSet& schemas) {
  return schemas.validate(xml_text);
}

inline std::vector<Violation> validate_against_schema(std::string_view xml_text) {
  static const SchemaSet builtin = SchemaSet::builtin();
  return builtin.validate(xml_text);
}

// @@EMBEDDED_SCHEMAS@@ (generated by tools/embed_schemas.py from schema/)
inline constexpr std::string_view didl_xsd = R"xsd(<?xml version="1.0" encoding="UTF-8"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"
           xmlns:didl="urn:mpeg:mpeg21:2002:02-DIDL-NS"
           targetNamespace="urn:mpeg:mpeg21:2002:02-DIDL-NS"
           elementFormDefault="qualified"
           attributeFormDefault="unqualified">

  <xs:element name="DIDL" type="didl:DIDLType"/>
  <xs:element name="Container" type="didl:ContainerType"/>
  <xs:element name="Item" type="didl:ItemType"/>
  <xs:element name="Component" type="didl:ComponentType"/>
  <xs:element name="Descriptor" type="didl:DescriptorType"/>
  <xs:element name="Statement" type="didl:StatementType"/>
  <xs:element name="Resource" type="didl:ResourceType"/>

  <xs:complexType name="DIDLType">
    <xs:sequence>
      <xs:element ref="didl:Container" maxOccurs="unbounded"/>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="ContainerType">
    <xs:sequence>
      <xs:element ref="didl:Descriptor" minOccurs="0" maxOccurs="unbounded"/>
      <xs:choice maxOccurs="unbounded">
        <xs:element ref="didl:Container"/>
        <xs:element ref="didl:Item"/>
      </xs:choice>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="ItemType">
    <xs:sequence>
      <xs:element ref="didl:Descriptor" minOccurs="0" maxOccurs="unbounded"/>
      <xs:choice maxOccurs="unbounded">
        <xs:element ref="didl:Item"/>
        <xs:element ref="didl:Component"/>
      </xs:choice>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="ComponentType">
    <xs:sequence>
      <xs:element ref="didl:Descriptor" minOccurs="0" maxOccurs="unbounded"/>
      <xs:element ref="didl:Resource" maxOccurs="unbounded"/>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="DescriptorType">
    <xs:sequence>
      <xs:element ref="didl:Statement"/>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="StatementType" mixed="true">
    <xs:sequence>
      <xs:any namespace="##other" processContents="lax" minOccurs="0" maxOccurs="unbounded"/>
    </xs:sequence>
    <xs:attribute name="mimeType" type="xs:string" use="required"/>
  </xs:complexType>

  <xs:complexType name="ResourceType">
    <xs:simpleContent>
      <xs:extension base="xs:string">
        <xs:attribute name="mimeType" type="xs:string" use="required"/>
        <xs:attribute name="ref" type="xs:string"/>
        <xs:attribute name="encoding" type="didl:EncodingType"/>
      </xs:extension>
    </xs:simpleContent>
  </xs:complexType>

  <xs:simpleType name="EncodingType">
    <xs:restriction base="xs:string">
      <xs:enumeration value="base64"/>
    </xs:restriction>
  </xs:simpleType>

</xs:schema>
)xsd";
inline constexpr std::string_view daap_xsd = R"xsd(<?xml version="1.0" encoding="UTF-8"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"
           xmlns:daap="urn:x-d2d:daap"
           targetNamespace="urn:x-d2d:daap"
           elementFormDefault="qualified"
           attributeFormDefault="unqualified">

  <xs:element name="PDI" type="daap:PDIType"/>

  <xs:complexType name="PDIType">
    <xs:sequence>
      <xs:element name="signature" type="xs:string"/>
      <xs:element name="provenance" type="daap:EntryType" minOccurs="0" maxOccurs="unbounded"/>
      <xs:element name="context" type="daap:EntryType" minOccurs="0" maxOccurs="unbounded"/>
      <xs:element name="reference" type="daap:EntryType" minOccurs="0" maxOccurs="unbounded"/>
      <xs:element name="fixity" type="daap:EntryType" minOccurs="0" maxOccurs="unbounded"/>
      <xs:element name="rawOutput" type="xs:string"/>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="EntryType">
    <xs:sequence>
      <xs:element name="type" type="xs:string"/>
      <xs:element name="value" type="xs:string"/>
    </xs:sequence>
  </xs:complexType>

</xs:schema>
)xsd";

inline SchemaSet SchemaSet::builtin(std::string_view pdi_namespace) {
  std::string daap(daap_xsd);
  if (pdi_namespace != default_pdi_ns) {
    std::string replacement;
    xml::escape_attribute(replacement, pdi_namespace);
    for (std::size_t at = daap.find(default_pdi_ns); at != std::string::npos;
         at = daap.find(default_pdi_ns, at + replacement.size()))
      daap.replace(at, default_pdi_ns.size(), replacement);
  }
  SchemaSet set;
  set.add(didl_xsd);
  set.add(daap);
  return set;
}
// @@END_EMBEDDED_SCHEMAS@@

}  // namespace d2d::schema
