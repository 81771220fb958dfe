#include "xlayer/dfd_model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "xlayer/errors.hpp"

namespace xlayer {

std::string to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::process: return "process";
    case ElementKind::datastore: return "datastore";
    case ElementKind::external_entity: return "external_entity";
  }
  return {};
}

ElementKind element_kind_from_string(const std::string& text) {
  if (text == "process") return ElementKind::process;
  if (text == "datastore") return ElementKind::datastore;
  if (text == "external_entity") return ElementKind::external_entity;
  throw ValidationError("unknown element kind '" + text + "'");
}

std::string to_string(IdentityMode mode) {
  switch (mode) {
    case IdentityMode::end_user: return "end_user";
    case IdentityMode::system: return "system";
    case IdentityMode::anonymous: return "anonymous";
  }
  return {};
}

IdentityMode identity_mode_from_string(const std::string& text) {
  if (text == "end_user") return IdentityMode::end_user;
  if (text == "system") return IdentityMode::system;
  if (text == "anonymous") return IdentityMode::anonymous;
  throw ValidationError("unknown identity mode '" + text + "'");
}

const DfdElement* DfdModel::find_element(const std::string& element_id) const {
  for (const auto& element : elements) {
    if (element.id == element_id) return &element;
  }
  return nullptr;
}

const TrustBoundary* DfdModel::boundary_of(const std::string& element_id) const {
  for (const auto& boundary : boundaries) {
    if (std::find(boundary.member_ids.begin(), boundary.member_ids.end(), element_id) !=
        boundary.member_ids.end()) {
      return &boundary;
    }
  }
  return nullptr;
}

int DfdModel::trust_level_of(const std::string& element_id) const {
  const auto* boundary = boundary_of(element_id);
  return boundary == nullptr ? kExternalTrustLevel : boundary->trust_level;
}

DfdModel parse_dfd(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed DFD file: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("DFD file must contain a JSON object");
  }

  DfdModel dfd;
  for (const auto& e : doc.value("elements", nlohmann::json::array())) {
    DfdElement element;
    element.id = e.value("id", "");
    if (element.id.empty()) throw ValidationError("DFD element without an id");
    element.name = e.value("name", element.id);
    element.kind = element_kind_from_string(e.value("kind", ""));
    if (e.contains("identity_mode")) {
      element.identity_mode = identity_mode_from_string(e["identity_mode"].get<std::string>());
    } else if (element.kind == ElementKind::external_entity) {
      element.identity_mode = IdentityMode::anonymous;
    } else {
      throw ValidationError("element '" + element.id + "' declares no identity_mode");
    }
    element.acting_identity = e.value("acting_identity", "");
    dfd.elements.push_back(std::move(element));
  }
  for (const auto& f : doc.value("flows", nlohmann::json::array())) {
    DataFlow flow;
    flow.id = f.value("id", "");
    if (flow.id.empty()) throw ValidationError("data flow without an id");
    flow.source = f.value("source", "");
    flow.target = f.value("target", "");
    flow.label = f.value("label", "");
    dfd.flows.push_back(std::move(flow));
  }
  for (const auto& b : doc.value("boundaries", nlohmann::json::array())) {
    TrustBoundary boundary;
    boundary.id = b.value("id", "");
    if (boundary.id.empty()) throw ValidationError("trust boundary without an id");
    boundary.name = b.value("name", boundary.id);
    boundary.trust_level = b.value("trust_level", 1);
    boundary.member_ids = b.value("members", std::vector<std::string>{});
    dfd.boundaries.push_back(std::move(boundary));
  }

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(dfd.elements.begin(), dfd.elements.end(), by_id);
  std::sort(dfd.flows.begin(), dfd.flows.end(), by_id);
  std::sort(dfd.boundaries.begin(), dfd.boundaries.end(), by_id);
  for (auto& boundary : dfd.boundaries) {
    std::sort(boundary.member_ids.begin(), boundary.member_ids.end());
  }

  validate(dfd);
  return dfd;
}

void validate(const DfdModel& dfd) {
  std::set<std::string> ids;
  for (const auto& element : dfd.elements) {
    if (!ids.insert(element.id).second) {
      throw ValidationError("duplicate identifier '" + element.id + "'");
    }
    if (element.kind == ElementKind::external_entity &&
        element.identity_mode != IdentityMode::anonymous) {
      throw ValidationError("external entity '" + element.id +
                            "' must have identity_mode anonymous");
    }
  }
  for (const auto& flow : dfd.flows) {
    if (!ids.insert(flow.id).second) {
      throw ValidationError("duplicate identifier '" + flow.id + "'");
    }
    for (const auto& endpoint : {flow.source, flow.target}) {
      if (dfd.find_element(endpoint) == nullptr) {
        throw ValidationError("data flow '" + flow.id + "' references unknown element '" +
                              endpoint + "'");
      }
    }
  }
  std::map<std::string, std::string> member_of;  // element -> boundary
  for (const auto& boundary : dfd.boundaries) {
    if (!ids.insert(boundary.id).second) {
      throw ValidationError("duplicate identifier '" + boundary.id + "'");
    }
    if (boundary.trust_level < 1) {
      throw ValidationError("trust boundary '" + boundary.id +
                            "' must declare trust_level >= 1 (0 is the ambient external zone)");
    }
    for (const auto& member : boundary.member_ids) {
      if (dfd.find_element(member) == nullptr) {
        throw ValidationError("trust boundary '" + boundary.id +
                              "' references unknown element '" + member + "'");
      }
      auto [it, inserted] = member_of.emplace(member, boundary.id);
      if (!inserted) {
        throw ValidationError("element '" + member + "' belongs to two trust boundaries ('" +
                              it->second + "' and '" + boundary.id + "')");
      }
    }
  }
}

std::vector<Finding> dfd_warnings(const DfdModel& dfd) {
  std::vector<Finding> warnings;
  for (const auto& flow : dfd.flows) {
    if (flow.source != flow.target) continue;
    Finding finding;
    finding.kind = FindingKind::vulnerability;
    finding.layers = LayerFlags::only(Layer::design);
    finding.text = "data flow '" + flow.id + "' is a self-loop on element '" + flow.source + "'";
    finding.source = "dfd-model";
    finding.subjects = {flow.id};
    warnings.push_back(std::move(finding));
  }
  std::sort(warnings.begin(), warnings.end(),
            [](const auto& a, const auto& b) { return a.subjects < b.subjects; });
  return warnings;
}

ZoneRef zone_of(const DfdModel& dfd, const std::string& element_id) {
  const auto* boundary = dfd.boundary_of(element_id);
  if (boundary == nullptr) {
    return {kExternalZoneId, kExternalZoneName, kExternalTrustLevel};
  }
  return {boundary->id, boundary->name, boundary->trust_level};
}

std::vector<BoundaryCrossing> flows_crossing_boundaries(const DfdModel& dfd) {
  std::vector<BoundaryCrossing> crossings;
  for (const auto& flow : dfd.flows) {
    auto source_zone = zone_of(dfd, flow.source);
    auto target_zone = zone_of(dfd, flow.target);
    if (source_zone.id == target_zone.id) continue;
    crossings.push_back({flow, std::move(source_zone), std::move(target_zone)});
  }
  std::sort(crossings.begin(), crossings.end(),
            [](const auto& a, const auto& b) { return a.flow.id < b.flow.id; });
  return crossings;
}

std::vector<DfdElement> find_entry_points(const DfdModel& dfd) {
  std::set<std::string> entry_ids;
  for (const auto& crossing : flows_crossing_boundaries(dfd)) {
    if (crossing.source_zone.trust_level < crossing.target_zone.trust_level) {
      entry_ids.insert(crossing.flow.target);
    }
  }
  std::vector<DfdElement> entries;
  for (const auto& id : entry_ids) {
    entries.push_back(*dfd.find_element(id));
  }
  return entries;  // set iteration is already sorted by id
}

}  // namespace xlayer
