#!/usr/bin/env python3
"""Copy schema/*.xsd into include/d2d/schema.hpp as string literals."""
import pathlib
import re

root = pathlib.Path(__file__).resolve().parent.parent
header = root / "include" / "d2d" / "schema.hpp"

block = ["// @@EMBEDDED_SCHEMAS@@ (generated by tools/embed_schemas.py from schema/)"]
for name in ("didl", "daap"):
    text = (root / "schema" / f"{name}.xsd").read_text(encoding="utf-8")
    assert ")xsd\"" not in text
    block.append(f'inline constexpr std::string_view {name}_xsd = R"xsd({text})xsd";')
block.append("""
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
// @@END_EMBEDDED_SCHEMAS@@""")

src = header.read_text(encoding="utf-8")
pattern = re.compile(r"// @@EMBEDDED_SCHEMAS@@.*?(// @@END_EMBEDDED_SCHEMAS@@|$)", re.S | re.M)
start = src.index("// @@EMBEDDED_SCHEMAS@@")
end_marker = "// @@END_EMBEDDED_SCHEMAS@@"
end = src.find(end_marker, start)
end = src.index("\n", start) if end < 0 else end + len(end_marker)
header.write_text(src[:start] + "\n".join(block) + src[end:], encoding="utf-8")
