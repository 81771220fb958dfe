#pragma once

#include <compare>
#include <string>
#include <vector>

namespace xlayer {

/// The three architecture layers a finding can be located at.
/// Report columns abbreviate them as B, S and I.
enum class Layer { business, design, implementation };

std::string to_string(Layer layer);
Layer layer_from_string(const std::string& text);

/// Subset of layers attached to a finding or risk rule.
struct LayerFlags {
  bool business = false;
  bool design = false;
  bool implementation = false;

  bool any() const { return business || design || implementation; }
  bool contains(Layer layer) const;

  static LayerFlags only(Layer layer);

  /// Layer names in B, S, I order, e.g. {"business", "implementation"}.
  std::vector<std::string> names() const;
  static LayerFlags from_names(const std::vector<std::string>& names);

  friend auto operator<=>(const LayerFlags&, const LayerFlags&) = default;
};

}  // namespace xlayer
