#pragma once

#include <map>
#include <string>
#include <vector>

namespace xlayer::xml {

/// A namespace-resolved XML element. Prefixes are resolved against the
/// xmlns declarations in scope; attribute keys are local names.
struct Element {
  std::string ns;
  std::string name;
  std::map<std::string, std::string> attributes;
  std::string text;  // concatenated direct character data, trimmed
  std::vector<Element> children;

  const Element* first_child(const std::string& ns_uri,
                             const std::string& local_name) const;
  std::vector<const Element*> children_named(const std::string& ns_uri,
                                             const std::string& local_name) const;
  std::string attribute(const std::string& local_name,
                        const std::string& fallback = {}) const;
  bool has_attribute(const std::string& local_name) const;
};

/// Parses an XML document. Throws ParseError carrying the line number when
/// the document is not well formed.
Element parse_document(const std::string& content);

}  // namespace xlayer::xml
