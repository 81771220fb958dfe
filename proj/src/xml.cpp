#include "xlayer/xml.hpp"

#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "xlayer/errors.hpp"

namespace pt = boost::property_tree;

namespace xlayer::xml {
namespace {

std::string trim(const std::string& text) {
  const char* ws = " \t\r\n";
  auto begin = text.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

struct QName {
  std::string prefix;
  std::string local;
};

QName split_qname(const std::string& qname) {
  auto colon = qname.find(':');
  if (colon == std::string::npos) return {"", qname};
  return {qname.substr(0, colon), qname.substr(colon + 1)};
}

// Prefix -> namespace URI bindings in scope, innermost last.
using NsScope = std::vector<std::pair<std::string, std::string>>;

std::string resolve_prefix(const NsScope& scope, const std::string& prefix) {
  for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
    if (it->first == prefix) return it->second;
  }
  return {};
}

Element convert(const std::string& qname, const pt::ptree& node, NsScope scope) {
  Element element;

  // xmlns declarations open new bindings before the element name resolves.
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    for (const auto& [key, value] : *attrs) {
      if (key == "xmlns") {
        scope.emplace_back("", value.get_value<std::string>());
      } else if (key.rfind("xmlns:", 0) == 0) {
        scope.emplace_back(key.substr(6), value.get_value<std::string>());
      }
    }
    for (const auto& [key, value] : *attrs) {
      if (key == "xmlns" || key.rfind("xmlns:", 0) == 0) continue;
      element.attributes[split_qname(key).local] = value.get_value<std::string>();
    }
  }

  auto [prefix, local] = split_qname(qname);
  element.ns = resolve_prefix(scope, prefix);
  element.name = local;
  element.text = trim(node.get_value<std::string>());

  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>" || key == "<xmlcomment>" || key == "<xmltext>") continue;
    element.children.push_back(convert(key, child, scope));
  }
  return element;
}

}  // namespace

const Element* Element::first_child(const std::string& ns_uri,
                                    const std::string& local_name) const {
  for (const auto& child : children) {
    if (child.ns == ns_uri && child.name == local_name) return &child;
  }
  return nullptr;
}

std::vector<const Element*> Element::children_named(const std::string& ns_uri,
                                                    const std::string& local_name) const {
  std::vector<const Element*> out;
  for (const auto& child : children) {
    if (child.ns == ns_uri && child.name == local_name) out.push_back(&child);
  }
  return out;
}

std::string Element::attribute(const std::string& local_name,
                               const std::string& fallback) const {
  auto it = attributes.find(local_name);
  return it == attributes.end() ? fallback : it->second;
}

bool Element::has_attribute(const std::string& local_name) const {
  return attributes.count(local_name) > 0;
}

Element parse_document(const std::string& content) {
  std::istringstream in(content);
  pt::ptree tree;
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML: " + e.message(), e.line());
  }
  for (const auto& [key, node] : tree) {
    if (key == "<xmlattr>" || key == "<xmlcomment>" || key == "<xmltext>") continue;
    return convert(key, node, {});
  }
  throw ParseError("document contains no root element");
}

}  // namespace xlayer::xml
