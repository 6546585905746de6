#pragma once

// Element-tree parsing on top of expat, plus the escaping helpers used by the
// serializers.
//
// expat runs without its own namespace processing so that a document with an
// unbound prefix still counts as well-formed XML 1.0; namespace problems are
// collected in Document::namespace_errors instead. External entities and
// external DTD subsets are never fetched.

#include <expat.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "d2d/error.hpp"

namespace d2d::xml {

inline constexpr std::string_view xmlns_uri = "http://www.w3.org/2000/xmlns/";
inline constexpr std::string_view xml_uri = "http://www.w3.org/XML/1998/namespace";
inline constexpr std::string_view xsi_uri = "http://www.w3.org/2001/XMLSchema-instance";

struct Attribute {
  std::string qname;
  std::string value;
  std::string prefix;
  std::string local;
  std::string ns;  ///< resolved namespace, empty for unprefixed attributes
};

struct Element {
  std::string qname;
  std::string prefix;
  std::string local;
  std::string ns;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  /// Concatenated character data that appears directly inside this element.
  std::string text;
  /// Child elements interleaved with non-whitespace text.
  bool mixed = false;
  /// Some directly contained character data is not whitespace.
  bool has_text = false;
  std::size_t line = 0;

  const Attribute* attribute(std::string_view name) const noexcept {
    for (const auto& a : attributes)
      if (a.qname == name) return &a;
    return nullptr;
  }
  const Attribute* attribute(std::string_view ns_uri, std::string_view local_name) const noexcept {
    for (const auto& a : attributes)
      if (a.ns == ns_uri && a.local == local_name) return &a;
    return nullptr;
  }
  bool is(std::string_view ns_uri, std::string_view local_name) const noexcept {
    return ns == ns_uri && local == local_name;
  }
};

struct Document {
  Element root;
  std::string version = "1.0";
  std::string encoding;  ///< as declared, empty when absent
  bool has_doctype = false;
  bool has_external_subset = false;
  bool references_schema = false;  ///< xsi:schemaLocation or noNamespaceSchemaLocation seen
  /// Namespace constraint violations (unbound prefixes, duplicate expanded
  /// attribute names). A document with entries here is well-formed XML 1.0 but
  /// not namespace-well-formed.
  std::vector<std::string> namespace_errors;
};

struct ParseOptions {
  std::size_t max_depth = 2048;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(Document& doc, ParseOptions opts) : doc_(doc), opts_(opts) {
    Scope base;
    base["xml"] = std::string(xml_uri);
    base["xmlns"] = std::string(xmlns_uri);
    scopes_.push_back(std::move(base));
  }

  void run(std::string_view input) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate(nullptr), &XML_ParserFree);
    if (!parser) throw Error(errc::parse_error, "cannot create XML parser");
    parser_ = parser.get();
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &TreeBuilder::on_start, &TreeBuilder::on_end);
    XML_SetCharacterDataHandler(parser_, &TreeBuilder::on_text);
    XML_SetXmlDeclHandler(parser_, &TreeBuilder::on_decl);
    XML_SetStartDoctypeDeclHandler(parser_, &TreeBuilder::on_doctype);
    XML_SetParamEntityParsing(parser_, XML_PARAM_ENTITY_PARSING_NEVER);

    // Fed in pieces so inputs beyond int range are fine.
    constexpr std::size_t piece = std::size_t{1} << 24;
    std::size_t off = 0;
    do {
      std::size_t n = std::min(piece, input.size() - off);
      bool last = off + n == input.size();
      if (XML_Parse(parser_, input.data() + off, static_cast<int>(n), last) != XML_STATUS_OK) {
        std::string msg = abort_message_.empty() ? XML_ErrorString(XML_GetErrorCode(parser_)) : abort_message_;
        throw Error(errc::parse_error, std::to_string(XML_GetErrorLineNumber(parser_)) + ":" +
                                           std::to_string(XML_GetErrorColumnNumber(parser_) + 1) + ": " + msg);
      }
      off += n;
    } while (off < input.size());
  }

 private:
  using Scope = std::unordered_map<std::string, std::string>;

  static TreeBuilder& self(void* p) { return *static_cast<TreeBuilder*>(p); }

  static void on_decl(void* ud, const XML_Char* version, const XML_Char* encoding, int) {
    if (version) self(ud).doc_.version = version;
    if (encoding) self(ud).doc_.encoding = encoding;
  }

  static void on_doctype(void* ud, const XML_Char*, const XML_Char* sysid, const XML_Char*, int) {
    self(ud).doc_.has_doctype = true;
    if (sysid) self(ud).doc_.has_external_subset = true;
  }

  static void on_start(void* ud, const XML_Char* name, const XML_Char** atts) {
    TreeBuilder& b = self(ud);
    if (b.stack_.size() >= b.opts_.max_depth) {
      b.abort_message_ = "element nesting deeper than " + std::to_string(b.opts_.max_depth);
      XML_StopParser(b.parser_, XML_FALSE);
      return;
    }
    Element el;
    el.qname = name;
    el.line = XML_GetCurrentLineNumber(b.parser_);
    for (std::size_t i = 0; atts[i]; i += 2) el.attributes.push_back(Attribute{atts[i], atts[i + 1], {}, {}, {}});
    if (!b.stack_.empty() && b.stack_.back().has_text) b.stack_.back().mixed = true;
    b.resolve(el);
    b.stack_.push_back(std::move(el));
  }

  static void on_end(void* ud, const XML_Char*) {
    TreeBuilder& b = self(ud);
    Element el = std::move(b.stack_.back());
    b.stack_.pop_back();
    b.scopes_.pop_back();
    if (b.stack_.empty())
      b.doc_.root = std::move(el);
    else
      b.stack_.back().children.push_back(std::move(el));
  }

  static void on_text(void* ud, const XML_Char* s, int len) {
    TreeBuilder& b = self(ud);
    if (b.stack_.empty()) return;
    Element& el = b.stack_.back();
    std::string_view chunk(s, static_cast<std::size_t>(len));
    el.text.append(chunk);
    if (all_space(chunk)) return;
    el.has_text = true;
    if (!el.children.empty()) el.mixed = true;
  }

  static bool all_space(std::string_view s) noexcept {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
  }

  static std::pair<std::string, std::string> split(const std::string& qname) {
    auto colon = qname.find(':');
    if (colon == std::string::npos) return {"", qname};
    return {qname.substr(0, colon), qname.substr(colon + 1)};
  }

  const std::string* lookup(const std::string& prefix) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (auto f = it->find(prefix); f != it->end()) return &f->second;
    return nullptr;
  }

  void resolve(Element& el) {
    auto& errors = doc_.namespace_errors;
    Scope local;
    for (const auto& a : el.attributes) {
      if (a.qname == "xmlns") {
        local[""] = a.value;
      } else if (a.qname.rfind("xmlns:", 0) == 0) {
        std::string p = a.qname.substr(6);
        if (a.value.empty()) errors.push_back("empty namespace for prefix '" + p + "'");
        local[p] = a.value;
      }
    }
    scopes_.push_back(std::move(local));

    auto [prefix, local_name] = split(el.qname);
    if (local_name.empty() || local_name.find(':') != std::string::npos ||
        (el.qname.find(':') != std::string::npos && prefix.empty()))
      errors.push_back("malformed qualified name '" + el.qname + "'");
    el.prefix = prefix;
    el.local = local_name;
    if (const std::string* uri = lookup(prefix))
      el.ns = *uri;
    else if (!prefix.empty())
      errors.push_back("unbound prefix '" + prefix + "' on element '" + el.qname + "'");

    for (auto& a : el.attributes) {
      auto [ap, al] = split(a.qname);
      a.prefix = ap;
      a.local = al;
      if (a.qname == "xmlns" || ap == "xmlns") {
        a.ns = std::string(xmlns_uri);
        continue;
      }
      if (!ap.empty()) {
        if (const std::string* uri = lookup(ap))
          a.ns = *uri;
        else
          errors.push_back("unbound prefix '" + ap + "' on attribute '" + a.qname + "'");
      }
      if (a.ns == xsi_uri && (al == "schemaLocation" || al == "noNamespaceSchemaLocation"))
        doc_.references_schema = true;
    }
    for (std::size_t i = 0; i < el.attributes.size(); ++i)
      for (std::size_t j = i + 1; j < el.attributes.size(); ++j)
        if (!el.attributes[i].ns.empty() && el.attributes[i].ns == el.attributes[j].ns &&
            el.attributes[i].local == el.attributes[j].local)
          errors.push_back("duplicate expanded attribute name '" + el.attributes[i].local + "'");
  }

  Document& doc_;
  ParseOptions opts_;
  XML_Parser parser_ = nullptr;
  std::vector<Element> stack_;
  std::vector<Scope> scopes_;
  std::string abort_message_;
};

}  // namespace detail

/// Parses a complete document. Throws parse_error when it is not well-formed.
inline Document parse(std::string_view input, ParseOptions opts = {}) {
  Document doc;
  detail::TreeBuilder(doc, opts).run(input);
  return doc;
}

/// Escapes character data. CR is written as a character reference so it
/// survives end-of-line normalization on re-parse.
inline void escape_text(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
}

inline void escape_attribute(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\t': out += "&#9;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
}

inline std::string escape_text(std::string_view s) {
  std::string out;
  escape_text(out, s);
  return out;
}

}  // namespace d2d::xml
