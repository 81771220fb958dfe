#pragma once

#include <string>
#include <vector>

#include "xlayer/layer.hpp"

namespace xlayer {

/// Whether a human or component introduces a weakness or actively exploits
/// one. Mirrors the V/T columns of the risk matrix.
enum class FindingKind { vulnerability, threat };

std::string to_string(FindingKind kind);
FindingKind finding_kind_from_string(const std::string& text);

/// A single analysis result. `source` names the operation or rule that
/// produced it, `subjects` the model ids it refers to.
struct Finding {
  FindingKind kind = FindingKind::vulnerability;
  LayerFlags layers;
  std::string text;
  std::string source;
  std::vector<std::string> subjects;

  friend bool operator==(const Finding&, const Finding&) = default;
};

}  // namespace xlayer
