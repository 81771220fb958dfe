#pragma once

#include <string>
#include <vector>

#include "xlayer/dfd_model.hpp"
#include "xlayer/function_mapping.hpp"

namespace xlayer {

enum class ThreatCategory {
  spoofing,
  tampering,
  repudiation,
  information_disclosure,
  denial_of_service,
  elevation_of_privilege,
};

std::string to_string(ThreatCategory category);
ThreatCategory threat_category_from_string(const std::string& text);

enum class ThreatSubjectKind { process, datastore, external_entity, data_flow, boundary_crossing };

std::string to_string(ThreatSubjectKind kind);
ThreatSubjectKind threat_subject_kind_from_string(const std::string& text);

/// One row of the rule table: which category of threat applies to which kind
/// of DFD subject. The description template may use {id} and {name}.
struct ThreatRule {
  std::string id;
  ThreatSubjectKind applies_to = ThreatSubjectKind::process;
  ThreatCategory category = ThreatCategory::spoofing;
  std::string description_template;

  friend bool operator==(const ThreatRule&, const ThreatRule&) = default;
};

/// Loads a rule file (JSON list of rule records).
std::vector<ThreatRule> parse_threat_rules(const std::string& json_text);

/// A technical threat against one DFD subject. Always located at the
/// implementation layer with kind threat.
struct Threat {
  std::string rule_id;
  std::string subject_id;  // element or flow id
  ThreatCategory category = ThreatCategory::spoofing;
  std::string description;
  std::vector<std::string> subverts_constraints;  // constraints enforced at this subject

  friend bool operator==(const Threat&, const Threat&) = default;
};

/// One threat per (subject, matching rule); boundary-crossing flows
/// additionally match the boundary_crossing rules. Sorted by
/// (subject_id, rule_id).
std::vector<Threat> enumerate_threats(const DfdModel& dfd,
                                      const std::vector<ThreatRule>& rules);

/// Marks threats whose subject enforces business constraints with the ids of
/// the constraints a successful attack could subvert.
void annotate_constraint_exposure(std::vector<Threat>& threats,
                                  const FunctionMapping& mapping);

struct ZoneThreatGroup {
  std::string zone_id;
  std::string zone_name;
  int trust_level = kExternalTrustLevel;
  int threat_count = 0;
  std::vector<std::string> categories;  // sorted unique category names

  friend bool operator==(const ZoneThreatGroup&, const ZoneThreatGroup&) = default;
};

struct EntryPointExposure {
  std::string element_id;
  std::string name;
  std::string zone_id;
  std::vector<std::string> inbound_categories;  // from threats on inbound crossing flows

  friend bool operator==(const EntryPointExposure&, const EntryPointExposure&) = default;
};

struct AttackSurfaceReport {
  std::vector<ZoneThreatGroup> zones;
  std::vector<EntryPointExposure> entry_points;

  friend bool operator==(const AttackSurfaceReport&, const AttackSurfaceReport&) = default;
};

/// Groups threats by zone (flow threats count toward the target's zone) and
/// lists every entry point with the categories arriving over its inbound
/// crossing flows.
AttackSurfaceReport summarize_attack_surface(const DfdModel& dfd,
                                             const std::vector<Threat>& threats);

}  // namespace xlayer
