#include "xlayer/report.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "xlayer/digest.hpp"
#include "xlayer/errors.hpp"

namespace xlayer {
namespace {

nlohmann::json finding_to_json(const Finding& finding) {
  return {{"kind", to_string(finding.kind)},
          {"layers", finding.layers.names()},
          {"source", finding.source},
          {"subjects", finding.subjects},
          {"text", finding.text}};
}

Finding finding_from_json(const nlohmann::json& doc) {
  Finding finding;
  finding.kind = finding_kind_from_string(doc.value("kind", "vulnerability"));
  finding.layers = LayerFlags::from_names(doc.value("layers", std::vector<std::string>{}));
  finding.source = doc.value("source", "");
  finding.subjects = doc.value("subjects", std::vector<std::string>{});
  finding.text = doc.value("text", "");
  return finding;
}

nlohmann::json findings_to_json(const std::vector<Finding>& findings) {
  auto arr = nlohmann::json::array();
  for (const auto& finding : findings) arr.push_back(finding_to_json(finding));
  return arr;
}

std::vector<Finding> findings_from_json(const nlohmann::json& arr) {
  std::vector<Finding> findings;
  for (const auto& entry : arr) findings.push_back(finding_from_json(entry));
  return findings;
}

nlohmann::json zone_to_json(const ZoneRef& zone) {
  return {{"id", zone.id}, {"name", zone.name}, {"trust_level", zone.trust_level}};
}

ZoneRef zone_from_json(const nlohmann::json& doc) {
  return {doc.value("id", ""), doc.value("name", ""), doc.value("trust_level", 0)};
}

nlohmann::json constraint_to_json(const SecurityConstraint& constraint) {
  nlohmann::json c;
  c["id"] = constraint.id;
  c["kind"] = to_string(constraint.kind);
  c["tasks"] = constraint.task_ids;
  if (!constraint.role_name.empty()) c["role"] = constraint.role_name;
  c["declared_layer"] = to_string(constraint.declared_layer);
  return c;
}

SecurityConstraint constraint_from_json(const nlohmann::json& doc) {
  SecurityConstraint constraint;
  constraint.id = doc.value("id", "");
  constraint.kind = constraint_kind_from_string(doc.value("kind", ""));
  constraint.task_ids = doc.value("tasks", std::vector<std::string>{});
  constraint.role_name = doc.value("role", "");
  constraint.declared_layer = layer_from_string(doc.value("declared_layer", "business"));
  return constraint;
}

}  // namespace

nlohmann::json to_json(const AnalysisReport& report, bool include_timestamp) {
  nlohmann::json metadata;
  metadata["tool"] = report.metadata.tool;
  metadata["version"] = report.metadata.version;
  metadata["inputs"] = nlohmann::json::object();
  for (const auto& [kind, input] : report.metadata.inputs) {
    metadata["inputs"][kind] = {{"digest", input.digest}, {"path", input.path}};
  }
  if (include_timestamp) metadata["timestamp"] = report.metadata.timestamp;

  nlohmann::json business;
  business["name"] = "business_process_analysis";
  business["participants"] = nlohmann::json::array();
  for (const auto& entry : report.participants) {
    business["participants"].push_back({{"pool_id", entry.pool_id},
                                        {"pool_name", entry.pool_name},
                                        {"roles", entry.roles}});
  }
  business["constraints"] = nlohmann::json::array();
  for (const auto& constraint : report.constraints) {
    business["constraints"].push_back(constraint_to_json(constraint));
  }
  business["infrastructure"]["data_stores"] = nlohmann::json::array();
  for (const auto& store : report.infrastructure.data_stores) {
    business["infrastructure"]["data_stores"].push_back({{"id", store.id}, {"name", store.name}});
  }
  business["infrastructure"]["automated_tasks"] = nlohmann::json::array();
  for (const auto& task : report.infrastructure.automated_tasks) {
    business["infrastructure"]["automated_tasks"].push_back(
        {{"id", task.id},
         {"name", task.name},
         {"lane_id", task.lane_id},
         {"security_critical", task.security_critical}});
  }
  business["collaboration"]["collaboration"] = report.collaboration.collaboration;
  if (report.collaboration.own_org) {
    business["collaboration"]["own_org"] = *report.collaboration.own_org;
  } else {
    business["collaboration"]["own_org"] = nullptr;
  }
  business["collaboration"]["partners"] = report.collaboration.partners;
  business["collaboration"]["advisory"] = report.collaboration.advisory;
  business["warnings"] = findings_to_json(report.process_warnings);

  nlohmann::json mapping;
  mapping["name"] = "function_mapping";
  mapping["coverage_findings"] = findings_to_json(report.coverage_findings);
  mapping["assumptions"] = report.mapping_assumptions;
  mapping["constraint_traces"] = nlohmann::json::array();
  for (const auto& trace : report.constraint_traces) {
    mapping["constraint_traces"].push_back(
        {{"constraint_id", trace.constraint_id},
         {"declared_layer", to_string(trace.declared_layer)},
         {"enforcing_elements", trace.enforcing_elements},
         {"downstream_gap_elements", trace.downstream_gap_elements},
         {"status", to_string(trace.status)}});
  }

  nlohmann::json technical;
  technical["name"] = "technical_analysis";
  technical["boundary_crossings"] = nlohmann::json::array();
  for (const auto& crossing : report.boundary_crossings) {
    technical["boundary_crossings"].push_back({{"flow",
                                                {{"id", crossing.flow.id},
                                                 {"source", crossing.flow.source},
                                                 {"target", crossing.flow.target},
                                                 {"label", crossing.flow.label}}},
                                               {"source_zone", zone_to_json(crossing.source_zone)},
                                               {"target_zone", zone_to_json(crossing.target_zone)}});
  }
  technical["entry_points"] = report.entry_point_ids;
  technical["threats"] = nlohmann::json::array();
  for (const auto& threat : report.threats) {
    technical["threats"].push_back({{"rule_id", threat.rule_id},
                                    {"subject_id", threat.subject_id},
                                    {"category", to_string(threat.category)},
                                    {"description", threat.description},
                                    {"layer", "implementation"},
                                    {"kind", "threat"},
                                    {"subverts_constraints", threat.subverts_constraints}});
  }
  technical["attack_surface"]["zones"] = nlohmann::json::array();
  for (const auto& zone : report.attack_surface.zones) {
    technical["attack_surface"]["zones"].push_back({{"zone_id", zone.zone_id},
                                                    {"zone_name", zone.zone_name},
                                                    {"trust_level", zone.trust_level},
                                                    {"threat_count", zone.threat_count},
                                                    {"categories", zone.categories}});
  }
  technical["attack_surface"]["entry_points"] = nlohmann::json::array();
  for (const auto& entry : report.attack_surface.entry_points) {
    technical["attack_surface"]["entry_points"].push_back(
        {{"element_id", entry.element_id},
         {"name", entry.name},
         {"zone_id", entry.zone_id},
         {"inbound_categories", entry.inbound_categories}});
  }
  technical["warnings"] = findings_to_json(report.dfd_warnings);

  nlohmann::json human;
  human["name"] = "human_factor_analysis";
  human["selected_tasks"] = report.selected_task_ids;
  human["relevant_roles"] = nlohmann::json::array();
  for (const auto& role : report.relevant_roles) {
    human["relevant_roles"].push_back({{"id", role.id},
                                       {"name", role.name},
                                       {"category", to_string(role.category)},
                                       {"attacker_tags", role.attacker_tags}});
  }
  human["risk_matrix"] = nlohmann::json::array();
  for (const auto& row : report.risk_matrix.rows) {
    human["risk_matrix"].push_back({{"role_id", row.role_id},
                                    {"role_name", row.role_name},
                                    {"layers", row.layers.names()},
                                    {"kind", to_string(row.kind)},
                                    {"risk", row.risk_text},
                                    {"solution", row.solution_text},
                                    {"rule_id", row.rule_id},
                                    {"context_refs", row.context_refs}});
  }

  nlohmann::json doc;
  doc["metadata"] = std::move(metadata);
  doc["sections"] = nlohmann::json::array({std::move(business), std::move(mapping),
                                           std::move(technical), std::move(human)});
  return doc;
}

AnalysisReport report_from_json(const nlohmann::json& doc) {
  AnalysisReport report;
  const auto& metadata = doc.at("metadata");
  report.metadata.tool = metadata.value("tool", "");
  report.metadata.version = metadata.value("version", "");
  report.metadata.timestamp = metadata.value("timestamp", "");
  const auto inputs_doc = metadata.value("inputs", nlohmann::json::object());
  for (const auto& [kind, input] : inputs_doc.items()) {
    report.metadata.inputs[kind] = {input.value("path", ""), input.value("digest", "")};
  }

  for (const auto& section : doc.value("sections", nlohmann::json::array())) {
    const auto name = section.value("name", "");
    if (name == "business_process_analysis") {
      for (const auto& entry : section.value("participants", nlohmann::json::array())) {
        report.participants.push_back({entry.value("pool_id", ""),
                                       entry.value("pool_name", ""),
                                       entry.value("roles", std::vector<std::string>{})});
      }
      for (const auto& entry : section.value("constraints", nlohmann::json::array())) {
        report.constraints.push_back(constraint_from_json(entry));
      }
      if (section.contains("infrastructure")) {
        const auto& infra = section["infrastructure"];
        for (const auto& entry : infra.value("data_stores", nlohmann::json::array())) {
          report.infrastructure.data_stores.push_back(
              {entry.value("id", ""), entry.value("name", "")});
        }
        for (const auto& entry : infra.value("automated_tasks", nlohmann::json::array())) {
          TaskNode task;
          task.id = entry.value("id", "");
          task.name = entry.value("name", "");
          task.kind = TaskKind::automated;
          task.lane_id = entry.value("lane_id", "");
          task.security_critical = entry.value("security_critical", false);
          report.infrastructure.automated_tasks.push_back(std::move(task));
        }
      }
      if (section.contains("collaboration")) {
        const auto& collab = section["collaboration"];
        report.collaboration.collaboration = collab.value("collaboration", false);
        if (collab.contains("own_org") && !collab["own_org"].is_null()) {
          report.collaboration.own_org = collab["own_org"].get<std::string>();
        }
        report.collaboration.partners = collab.value("partners", std::vector<std::string>{});
        report.collaboration.advisory = collab.value("advisory", "");
      }
      report.process_warnings =
          findings_from_json(section.value("warnings", nlohmann::json::array()));
    } else if (name == "function_mapping") {
      report.coverage_findings =
          findings_from_json(section.value("coverage_findings", nlohmann::json::array()));
      report.mapping_assumptions = section.value("assumptions", std::vector<std::string>{});
      for (const auto& entry : section.value("constraint_traces", nlohmann::json::array())) {
        ConstraintTrace trace;
        trace.constraint_id = entry.value("constraint_id", "");
        trace.declared_layer = layer_from_string(entry.value("declared_layer", "business"));
        trace.enforcing_elements = entry.value("enforcing_elements", std::vector<std::string>{});
        trace.downstream_gap_elements =
            entry.value("downstream_gap_elements", std::vector<std::string>{});
        trace.status = trace_status_from_string(entry.value("status", "unenforced"));
        report.constraint_traces.push_back(std::move(trace));
      }
    } else if (name == "technical_analysis") {
      for (const auto& entry : section.value("boundary_crossings", nlohmann::json::array())) {
        BoundaryCrossing crossing;
        const auto& flow = entry.at("flow");
        crossing.flow = {flow.value("id", ""), flow.value("source", ""),
                         flow.value("target", ""), flow.value("label", "")};
        crossing.source_zone = zone_from_json(entry.at("source_zone"));
        crossing.target_zone = zone_from_json(entry.at("target_zone"));
        report.boundary_crossings.push_back(std::move(crossing));
      }
      report.entry_point_ids = section.value("entry_points", std::vector<std::string>{});
      for (const auto& entry : section.value("threats", nlohmann::json::array())) {
        Threat threat;
        threat.rule_id = entry.value("rule_id", "");
        threat.subject_id = entry.value("subject_id", "");
        threat.category = threat_category_from_string(entry.value("category", ""));
        threat.description = entry.value("description", "");
        threat.subverts_constraints =
            entry.value("subverts_constraints", std::vector<std::string>{});
        report.threats.push_back(std::move(threat));
      }
      if (section.contains("attack_surface")) {
        const auto& surface = section["attack_surface"];
        for (const auto& entry : surface.value("zones", nlohmann::json::array())) {
          report.attack_surface.zones.push_back(
              {entry.value("zone_id", ""), entry.value("zone_name", ""),
               entry.value("trust_level", 0), entry.value("threat_count", 0),
               entry.value("categories", std::vector<std::string>{})});
        }
        for (const auto& entry : surface.value("entry_points", nlohmann::json::array())) {
          report.attack_surface.entry_points.push_back(
              {entry.value("element_id", ""), entry.value("name", ""),
               entry.value("zone_id", ""),
               entry.value("inbound_categories", std::vector<std::string>{})});
        }
      }
      report.dfd_warnings = findings_from_json(section.value("warnings", nlohmann::json::array()));
    } else if (name == "human_factor_analysis") {
      report.selected_task_ids = section.value("selected_tasks", std::vector<std::string>{});
      for (const auto& entry : section.value("relevant_roles", nlohmann::json::array())) {
        Role role;
        role.id = entry.value("id", "");
        role.name = entry.value("name", "");
        role.category = role_category_from_string(entry.value("category", ""));
        role.attacker_tags = entry.value("attacker_tags", std::vector<std::string>{});
        report.relevant_roles.push_back(std::move(role));
      }
      for (const auto& entry : section.value("risk_matrix", nlohmann::json::array())) {
        RiskRow row;
        row.role_id = entry.value("role_id", "");
        row.role_name = entry.value("role_name", "");
        row.layers = LayerFlags::from_names(entry.value("layers", std::vector<std::string>{}));
        row.kind = finding_kind_from_string(entry.value("kind", "vulnerability"));
        row.risk_text = entry.value("risk", "");
        row.solution_text = entry.value("solution", "");
        row.rule_id = entry.value("rule_id", "");
        row.context_refs = entry.value("context_refs", std::vector<std::string>{});
        report.risk_matrix.rows.push_back(std::move(row));
      }
    } else {
      throw ValidationError("unknown report section '" + name + "'");
    }
  }
  return report;
}

std::string render_json(const AnalysisReport& report) {
  return to_json(report).dump(2) + "\n";
}

std::string canonical_digest(const AnalysisReport& report) {
  return digest_string(to_json(report, /*include_timestamp=*/false).dump());
}

namespace {

std::string escape_markdown(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

std::string join(const std::vector<std::string>& items, const std::string& separator) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += separator;
    out += items[i];
  }
  return out;
}

const char* kCheck = "✓";

}  // namespace

std::string render_markdown(const AnalysisReport& report) {
  std::ostringstream out;
  out << "# Cross-layer security analysis\n\n";
  out << "Generated by " << report.metadata.tool << " " << report.metadata.version;
  if (!report.metadata.timestamp.empty()) out << " at " << report.metadata.timestamp;
  out << ".\n\n";
  if (!report.metadata.inputs.empty()) {
    out << "Inputs:\n\n";
    for (const auto& [kind, input] : report.metadata.inputs) {
      out << "- " << kind << ": `" << input.path << "` (" << input.digest << ")\n";
    }
    out << "\n";
  }

  out << "## Business process analysis\n\n";
  out << "### Participants\n\n";
  out << "| Pool | Roles |\n|---|---|\n";
  for (const auto& entry : report.participants) {
    out << "| " << escape_markdown(entry.pool_name) << " | "
        << escape_markdown(join(entry.roles, ", ")) << " |\n";
  }
  out << "\n### Security constraints\n\n";
  out << "| Id | Kind | Tasks | Role |\n|---|---|---|---|\n";
  for (const auto& constraint : report.constraints) {
    out << "| " << constraint.id << " | " << to_string(constraint.kind) << " | "
        << escape_markdown(join(constraint.task_ids, ", ")) << " | "
        << escape_markdown(constraint.role_name) << " |\n";
  }
  out << "\n### Infrastructure\n\n";
  out << "Data stores:";
  for (const auto& store : report.infrastructure.data_stores) out << " " << store.name << ";";
  out << "\nAutomated tasks:";
  for (const auto& task : report.infrastructure.automated_tasks) out << " " << task.id << ";";
  out << "\n\n### Collaboration\n\n";
  if (report.collaboration.collaboration) {
    out << "Collaboration detected. Partners: "
        << escape_markdown(join(report.collaboration.partners, ", ")) << ".\n";
    out << escape_markdown(report.collaboration.advisory) << "\n";
  } else {
    out << "Single organization, no collaboration.\n";
  }
  if (!report.process_warnings.empty()) {
    out << "\n### Warnings\n\n";
    for (const auto& warning : report.process_warnings) {
      out << "- " << escape_markdown(warning.text) << "\n";
    }
  }

  out << "\n## Function mapping\n\n";
  if (report.coverage_findings.empty()) {
    out << "All security-critical tasks are bound to system components.\n";
  } else {
    for (const auto& finding : report.coverage_findings) {
      out << "- **coverage**: " << escape_markdown(finding.text) << "\n";
    }
  }
  out << "\n### Constraint traces\n\n";
  out << "| Constraint | Status | Enforcing elements | Attribution gaps |\n|---|---|---|---|\n";
  for (const auto& trace : report.constraint_traces) {
    out << "| " << trace.constraint_id << " | " << to_string(trace.status) << " | "
        << escape_markdown(join(trace.enforcing_elements, ", ")) << " | "
        << escape_markdown(join(trace.downstream_gap_elements, ", ")) << " |\n";
  }
  for (const auto& assumption : report.mapping_assumptions) {
    out << "\n_Assumption: " << escape_markdown(assumption) << "_\n";
  }

  out << "\n## Technical analysis\n\n";
  out << "### Boundary crossings\n\n";
  out << "| Flow | From zone | To zone |\n|---|---|---|\n";
  for (const auto& crossing : report.boundary_crossings) {
    out << "| " << crossing.flow.id << " (" << escape_markdown(crossing.flow.source) << " → "
        << escape_markdown(crossing.flow.target) << ") | "
        << escape_markdown(crossing.source_zone.name) << " | "
        << escape_markdown(crossing.target_zone.name) << " |\n";
  }
  out << "\nEntry points: " << escape_markdown(join(report.entry_point_ids, ", ")) << "\n";
  out << "\n### Threats (" << report.threats.size() << ")\n\n";
  out << "| Subject | Category | Rule | Description | Subverts |\n|---|---|---|---|---|\n";
  for (const auto& threat : report.threats) {
    out << "| " << escape_markdown(threat.subject_id) << " | " << to_string(threat.category)
        << " | " << threat.rule_id << " | " << escape_markdown(threat.description) << " | "
        << escape_markdown(join(threat.subverts_constraints, ", ")) << " |\n";
  }
  out << "\n### Attack surface\n\n";
  out << "| Zone | Trust level | Threats | Categories |\n|---|---|---|---|\n";
  for (const auto& zone : report.attack_surface.zones) {
    out << "| " << escape_markdown(zone.zone_name) << " | " << zone.trust_level << " | "
        << zone.threat_count << " | " << escape_markdown(join(zone.categories, ", ")) << " |\n";
  }
  if (!report.attack_surface.entry_points.empty()) {
    out << "\n| Entry point | Zone | Inbound categories |\n|---|---|---|\n";
    for (const auto& entry : report.attack_surface.entry_points) {
      out << "| " << escape_markdown(entry.name) << " | " << escape_markdown(entry.zone_id)
          << " | " << escape_markdown(join(entry.inbound_categories, ", ")) << " |\n";
    }
  }

  out << "\n## Human factor analysis\n\n";
  out << "Selected tasks: " << escape_markdown(join(report.selected_task_ids, ", ")) << "\n\n";
  out << "| Role | B | S | I | V | T | Security risk | Solution |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : report.risk_matrix.rows) {
    out << "| " << escape_markdown(row.role_name) << " | "
        << (row.layers.business ? kCheck : "") << " | " << (row.layers.design ? kCheck : "")
        << " | " << (row.layers.implementation ? kCheck : "") << " | "
        << (row.kind == FindingKind::vulnerability ? kCheck : "") << " | "
        << (row.kind == FindingKind::threat ? kCheck : "") << " | "
        << escape_markdown(row.risk_text) << " | " << escape_markdown(row.solution_text)
        << " |\n";
  }
  return out.str();
}

namespace {

// DOT double-quoted string: only the quote needs escaping; backslash
// sequences like \n are meaningful in labels and pass through.
std::string dot_quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '\\';
    out += (c == '\n') ? ' ' : c;
  }
  out += '"';
  return out;
}

std::string dot_cluster_id(const std::string& boundary_id) {
  std::string out = "cluster_";
  for (char c : boundary_id) {
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  return out;
}

}  // namespace

std::string render_dot(const DfdModel& dfd,
                       const std::vector<ConstraintTrace>& traces,
                       const std::vector<Threat>& threats) {
  std::set<std::string> gap_elements;
  for (const auto& trace : traces) {
    gap_elements.insert(trace.downstream_gap_elements.begin(),
                        trace.downstream_gap_elements.end());
  }
  std::set<std::string> entry_ids;
  for (const auto& element : find_entry_points(dfd)) entry_ids.insert(element.id);
  std::map<std::string, int> threat_counts;
  for (const auto& threat : threats) threat_counts[threat.subject_id] += 1;
  std::set<std::string> crossing_flow_ids;
  for (const auto& crossing : flows_crossing_boundaries(dfd)) {
    crossing_flow_ids.insert(crossing.flow.id);
  }

  std::ostringstream out;
  out << "digraph dfd {\n";
  out << "  rankdir=LR;\n";
  out << "  node [fontname=\"Helvetica\"];\n";

  auto emit_node = [&](const DfdElement& element, const std::string& indent) {
    const char* shape = "ellipse";
    if (element.kind == ElementKind::datastore) shape = "cylinder";
    if (element.kind == ElementKind::external_entity) shape = "box";
    std::string label = element.name;
    if (auto it = threat_counts.find(element.id); it != threat_counts.end()) {
      label += "\\n" + std::to_string(it->second) + " threats";
    }
    out << indent << dot_quote(element.id) << " [label=" << dot_quote(label)
        << ", shape=" << shape;
    if (gap_elements.count(element.id)) {
      out << ", style=filled, fillcolor=lightcoral";  // attribution gap
    }
    if (entry_ids.count(element.id)) {
      out << ", peripheries=2, color=orange";  // entry point
    }
    out << "];\n";
  };

  std::set<std::string> clustered;
  for (const auto& boundary : dfd.boundaries) {
    out << "  subgraph " << dot_cluster_id(boundary.id) << " {\n";
    out << "    label=" << dot_quote(boundary.name + " (trust level " +
                                     std::to_string(boundary.trust_level) + ")")
        << ";\n";
    out << "    style=dashed;\n";
    for (const auto& member : boundary.member_ids) {
      const auto* element = dfd.find_element(member);
      if (element == nullptr) continue;
      emit_node(*element, "    ");
      clustered.insert(member);
    }
    out << "  }\n";
  }
  for (const auto& element : dfd.elements) {
    if (!clustered.count(element.id)) emit_node(element, "  ");
  }
  for (const auto& flow : dfd.flows) {
    out << "  " << dot_quote(flow.source) << " -> " << dot_quote(flow.target);
    out << " [label=" << dot_quote(flow.label);
    if (crossing_flow_ids.count(flow.id)) out << ", penwidth=2";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace xlayer
