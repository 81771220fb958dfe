#include "xlayer/threat_analysis.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "xlayer/errors.hpp"

namespace xlayer {

std::string to_string(ThreatCategory category) {
  switch (category) {
    case ThreatCategory::spoofing: return "spoofing";
    case ThreatCategory::tampering: return "tampering";
    case ThreatCategory::repudiation: return "repudiation";
    case ThreatCategory::information_disclosure: return "information_disclosure";
    case ThreatCategory::denial_of_service: return "denial_of_service";
    case ThreatCategory::elevation_of_privilege: return "elevation_of_privilege";
  }
  return {};
}

ThreatCategory threat_category_from_string(const std::string& text) {
  if (text == "spoofing") return ThreatCategory::spoofing;
  if (text == "tampering") return ThreatCategory::tampering;
  if (text == "repudiation") return ThreatCategory::repudiation;
  if (text == "information_disclosure") return ThreatCategory::information_disclosure;
  if (text == "denial_of_service") return ThreatCategory::denial_of_service;
  if (text == "elevation_of_privilege") return ThreatCategory::elevation_of_privilege;
  throw ValidationError("unknown threat category '" + text + "'");
}

std::string to_string(ThreatSubjectKind kind) {
  switch (kind) {
    case ThreatSubjectKind::process: return "process";
    case ThreatSubjectKind::datastore: return "datastore";
    case ThreatSubjectKind::external_entity: return "external_entity";
    case ThreatSubjectKind::data_flow: return "data_flow";
    case ThreatSubjectKind::boundary_crossing: return "boundary_crossing";
  }
  return {};
}

ThreatSubjectKind threat_subject_kind_from_string(const std::string& text) {
  if (text == "process") return ThreatSubjectKind::process;
  if (text == "datastore") return ThreatSubjectKind::datastore;
  if (text == "external_entity") return ThreatSubjectKind::external_entity;
  if (text == "data_flow") return ThreatSubjectKind::data_flow;
  if (text == "boundary_crossing") return ThreatSubjectKind::boundary_crossing;
  throw ValidationError("unknown threat subject kind '" + text + "'");
}

std::vector<ThreatRule> parse_threat_rules(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed threat rules file: ") + e.what());
  }
  const auto& entries = doc.is_object() ? doc.at("rules") : doc;
  if (!entries.is_array()) {
    throw ParseError("threat rules file must contain a JSON array (or an object with 'rules')");
  }
  std::vector<ThreatRule> rules;
  std::set<std::string> ids;
  for (const auto& entry : entries) {
    ThreatRule rule;
    rule.id = entry.value("id", "");
    if (rule.id.empty()) throw ValidationError("threat rule without an id");
    if (!ids.insert(rule.id).second) {
      throw ValidationError("duplicate threat rule id '" + rule.id + "'");
    }
    rule.applies_to = threat_subject_kind_from_string(entry.value("applies_to", ""));
    rule.category = threat_category_from_string(entry.value("category", ""));
    rule.description_template = entry.value("description", "");
    rules.push_back(std::move(rule));
  }
  return rules;
}

namespace {

std::string instantiate(const std::string& tmpl, const std::string& id,
                        const std::string& name) {
  std::string out = tmpl;
  for (const auto& [placeholder, value] :
       {std::pair<std::string, const std::string&>{"{id}", id}, {"{name}", name}}) {
    size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

ThreatSubjectKind subject_kind_of(const DfdElement& element) {
  switch (element.kind) {
    case ElementKind::process: return ThreatSubjectKind::process;
    case ElementKind::datastore: return ThreatSubjectKind::datastore;
    case ElementKind::external_entity: return ThreatSubjectKind::external_entity;
  }
  return ThreatSubjectKind::process;
}

}  // namespace

std::vector<Threat> enumerate_threats(const DfdModel& dfd,
                                      const std::vector<ThreatRule>& rules) {
  std::vector<Threat> threats;
  auto emit = [&](const ThreatRule& rule, const std::string& subject_id,
                  const std::string& subject_name) {
    Threat threat;
    threat.rule_id = rule.id;
    threat.subject_id = subject_id;
    threat.category = rule.category;
    threat.description = instantiate(rule.description_template, subject_id, subject_name);
    threats.push_back(std::move(threat));
  };

  for (const auto& element : dfd.elements) {
    const auto kind = subject_kind_of(element);
    for (const auto& rule : rules) {
      if (rule.applies_to == kind) emit(rule, element.id, element.name);
    }
  }
  for (const auto& flow : dfd.flows) {
    const std::string name = flow.label.empty() ? flow.id : flow.label;
    for (const auto& rule : rules) {
      if (rule.applies_to == ThreatSubjectKind::data_flow) emit(rule, flow.id, name);
    }
  }
  for (const auto& crossing : flows_crossing_boundaries(dfd)) {
    const std::string name =
        crossing.flow.label.empty() ? crossing.flow.id : crossing.flow.label;
    for (const auto& rule : rules) {
      if (rule.applies_to == ThreatSubjectKind::boundary_crossing) {
        emit(rule, crossing.flow.id, name);
      }
    }
  }

  std::sort(threats.begin(), threats.end(), [](const Threat& a, const Threat& b) {
    return std::tie(a.subject_id, a.rule_id) < std::tie(b.subject_id, b.rule_id);
  });
  return threats;
}

void annotate_constraint_exposure(std::vector<Threat>& threats,
                                  const FunctionMapping& mapping) {
  std::map<std::string, std::set<std::string>> constraints_at;  // element -> constraint ids
  for (const auto& [constraint_id, points] : mapping.enforcement_points) {
    for (const auto& point : points) {
      constraints_at[point.element_id].insert(constraint_id);
    }
  }
  for (auto& threat : threats) {
    auto it = constraints_at.find(threat.subject_id);
    if (it == constraints_at.end()) continue;
    threat.subverts_constraints.assign(it->second.begin(), it->second.end());
  }
}

AttackSurfaceReport summarize_attack_surface(const DfdModel& dfd,
                                             const std::vector<Threat>& threats) {
  AttackSurfaceReport report;

  // A flow threat counts toward the zone its data arrives in.
  auto zone_of_subject = [&](const std::string& subject_id) -> ZoneRef {
    if (dfd.find_element(subject_id) != nullptr) return zone_of(dfd, subject_id);
    for (const auto& flow : dfd.flows) {
      if (flow.id == subject_id) return zone_of(dfd, flow.target);
    }
    return {kExternalZoneId, kExternalZoneName, kExternalTrustLevel};
  };

  std::map<std::string, ZoneThreatGroup> groups;
  for (const auto& threat : threats) {
    auto zone = zone_of_subject(threat.subject_id);
    auto& group = groups[zone.id];
    if (group.zone_id.empty()) {
      group.zone_id = zone.id;
      group.zone_name = zone.name;
      group.trust_level = zone.trust_level;
    }
    group.threat_count += 1;
    auto category = to_string(threat.category);
    if (std::find(group.categories.begin(), group.categories.end(), category) ==
        group.categories.end()) {
      group.categories.push_back(std::move(category));
    }
  }
  for (auto& [zone_id, group] : groups) {
    std::sort(group.categories.begin(), group.categories.end());
    report.zones.push_back(std::move(group));
  }

  std::map<std::string, std::set<std::string>> inbound;  // entry element -> crossing flow ids
  for (const auto& crossing : flows_crossing_boundaries(dfd)) {
    if (crossing.source_zone.trust_level < crossing.target_zone.trust_level) {
      inbound[crossing.flow.target].insert(crossing.flow.id);
    }
  }
  for (const auto& element : find_entry_points(dfd)) {
    EntryPointExposure exposure;
    exposure.element_id = element.id;
    exposure.name = element.name;
    exposure.zone_id = zone_of(dfd, element.id).id;
    std::set<std::string> categories;
    for (const auto& threat : threats) {
      if (inbound[element.id].count(threat.subject_id)) {
        categories.insert(to_string(threat.category));
      }
    }
    exposure.inbound_categories.assign(categories.begin(), categories.end());
    report.entry_points.push_back(std::move(exposure));
  }
  return report;
}

}  // namespace xlayer
