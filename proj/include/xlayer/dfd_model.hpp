#pragma once

#include <string>
#include <vector>

#include "xlayer/finding.hpp"

namespace xlayer {

enum class ElementKind { process, datastore, external_entity };

std::string to_string(ElementKind kind);
ElementKind element_kind_from_string(const std::string& text);

/// Which identity an element acts under and records: the human subject's
/// (end_user), a fixed technical account (system), or none (anonymous).
enum class IdentityMode { end_user, system, anonymous };

std::string to_string(IdentityMode mode);
IdentityMode identity_mode_from_string(const std::string& text);

struct DfdElement {
  std::string id;
  std::string name;
  ElementKind kind = ElementKind::process;
  IdentityMode identity_mode = IdentityMode::anonymous;
  std::string acting_identity;  // role the element acts as, e.g. "WorkflowSystem"

  friend bool operator==(const DfdElement&, const DfdElement&) = default;
};

struct DataFlow {
  std::string id;
  std::string source;
  std::string target;
  std::string label;

  friend bool operator==(const DataFlow&, const DataFlow&) = default;
};

/// A trust perimeter. Elements outside every boundary live in the ambient
/// external zone (trust level 0); named boundaries must declare level >= 1.
struct TrustBoundary {
  std::string id;
  std::string name;
  int trust_level = 1;
  std::vector<std::string> member_ids;

  friend bool operator==(const TrustBoundary&, const TrustBoundary&) = default;
};

inline constexpr int kExternalTrustLevel = 0;
inline constexpr const char* kExternalZoneId = "external";
inline constexpr const char* kExternalZoneName = "external";

struct DfdModel {
  std::vector<DfdElement> elements;
  std::vector<DataFlow> flows;
  std::vector<TrustBoundary> boundaries;

  const DfdElement* find_element(const std::string& element_id) const;
  /// Boundary containing the element, or nullptr for the ambient zone.
  const TrustBoundary* boundary_of(const std::string& element_id) const;
  int trust_level_of(const std::string& element_id) const;

  friend bool operator==(const DfdModel&, const DfdModel&) = default;
};

/// Parses the DFD JSON document into a validated model.
DfdModel parse_dfd(const std::string& json_text);

/// Checks every model invariant; throws ValidationError naming offending ids.
void validate(const DfdModel& dfd);

/// Non-fatal smells, e.g. self-loop flows.
std::vector<Finding> dfd_warnings(const DfdModel& dfd);

/// Zone a flow endpoint lies in: a named boundary or the ambient zone.
struct ZoneRef {
  std::string id;    // boundary id, or "external"
  std::string name;
  int trust_level = kExternalTrustLevel;

  friend bool operator==(const ZoneRef&, const ZoneRef&) = default;
};

ZoneRef zone_of(const DfdModel& dfd, const std::string& element_id);

struct BoundaryCrossing {
  DataFlow flow;
  ZoneRef source_zone;
  ZoneRef target_zone;

  friend bool operator==(const BoundaryCrossing&, const BoundaryCrossing&) = default;
};

/// Exactly the flows whose endpoints lie in different zones, sorted by
/// flow id.
std::vector<BoundaryCrossing> flows_crossing_boundaries(const DfdModel& dfd);

/// Elements receiving at least one crossing flow from a strictly less
/// trusted zone, sorted by element id.
std::vector<DfdElement> find_entry_points(const DfdModel& dfd);

}  // namespace xlayer
