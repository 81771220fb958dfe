#include "xlayer/function_mapping.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <json.hpp>

#include "xlayer/errors.hpp"

namespace xlayer {

std::string to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::fully_traced: return "fully_traced";
    case TraceStatus::attribution_gap: return "attribution_gap";
    case TraceStatus::unenforced: return "unenforced";
  }
  return {};
}

TraceStatus trace_status_from_string(const std::string& text) {
  if (text == "fully_traced") return TraceStatus::fully_traced;
  if (text == "attribution_gap") return TraceStatus::attribution_gap;
  if (text == "unenforced") return TraceStatus::unenforced;
  throw ValidationError("unknown trace status '" + text + "'");
}

bool FunctionMapping::binds(const std::string& task_id, const std::string& element_id) const {
  auto it = task_bindings.find(task_id);
  if (it == task_bindings.end()) return false;
  return std::find(it->second.begin(), it->second.end(), element_id) != it->second.end();
}

FunctionMapping load_mapping(const std::string& json_text,
                             const ProcessModel& process,
                             const DfdModel& dfd) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed mapping file: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("mapping file must contain a JSON object");
  }

  FunctionMapping mapping;
  const auto bindings_doc = doc.value("task_bindings", nlohmann::json::object());
  for (const auto& [task_id, elements] : bindings_doc.items()) {
    if (process.find_task(task_id) == nullptr) {
      throw ValidationError("mapping binds unknown task '" + task_id + "'");
    }
    std::vector<std::string> element_ids;
    for (const auto& element : elements) {
      auto element_id = element.get<std::string>();
      if (dfd.find_element(element_id) == nullptr) {
        throw ValidationError("mapping binds task '" + task_id + "' to unknown element '" +
                              element_id + "'");
      }
      element_ids.push_back(std::move(element_id));
    }
    std::sort(element_ids.begin(), element_ids.end());
    element_ids.erase(std::unique(element_ids.begin(), element_ids.end()), element_ids.end());
    mapping.task_bindings.emplace(task_id, std::move(element_ids));
  }

  auto known_constraint = [&](const std::string& constraint_id) {
    return std::any_of(process.constraints.begin(), process.constraints.end(),
                       [&](const SecurityConstraint& c) { return c.id == constraint_id; });
  };
  const auto enforcement_doc = doc.value("enforcement_points", nlohmann::json::object());
  for (const auto& [constraint_id, points] : enforcement_doc.items()) {
    if (!known_constraint(constraint_id)) {
      throw ValidationError("mapping declares enforcement for unknown constraint '" +
                            constraint_id + "'");
    }
    std::vector<EnforcementPoint> enforcement;
    for (const auto& point : points) {
      EnforcementPoint ep;
      ep.element_id = point.value("element", "");
      if (dfd.find_element(ep.element_id) == nullptr) {
        throw ValidationError("enforcement point for '" + constraint_id +
                              "' references unknown element '" + ep.element_id + "'");
      }
      ep.layer = layer_from_string(point.value("layer", ""));
      if (ep.layer == Layer::business) {
        throw ValidationError("enforcement point for '" + constraint_id +
                              "' cannot be at the business layer; constraints are declared "
                              "there and enforced below");
      }
      enforcement.push_back(std::move(ep));
    }
    std::sort(enforcement.begin(), enforcement.end(), [](const auto& a, const auto& b) {
      return std::tie(a.element_id, a.layer) < std::tie(b.element_id, b.layer);
    });
    mapping.enforcement_points.emplace(constraint_id, std::move(enforcement));
  }
  return mapping;
}

std::vector<Finding> check_mapping_coverage(const ProcessModel& process,
                                            const FunctionMapping& mapping) {
  std::vector<Finding> findings;
  for (const auto* task : process.all_tasks()) {
    if (!task->security_critical) continue;
    auto it = mapping.task_bindings.find(task->id);
    if (it != mapping.task_bindings.end() && !it->second.empty()) continue;
    Finding finding;
    finding.kind = FindingKind::vulnerability;
    finding.layers = LayerFlags::only(Layer::design);
    finding.text = "security-critical task '" + task->id +
                   "' is not bound to any system component";
    finding.source = "check_mapping_coverage";
    finding.subjects = {task->id};
    findings.push_back(std::move(finding));
  }
  std::sort(findings.begin(), findings.end(),
            [](const auto& a, const auto& b) { return a.subjects < b.subjects; });
  return findings;
}

namespace {

// Forward reachability over data flows, excluding the start set itself
// (unless a cycle leads back into it, in which case the start elements are
// still not reported as their own gaps).
std::set<std::string> reachable_from(const DfdModel& dfd, const std::set<std::string>& start) {
  std::multimap<std::string, std::string> edges;
  for (const auto& flow : dfd.flows) {
    edges.emplace(flow.source, flow.target);
  }
  std::set<std::string> visited = start;
  std::deque<std::string> queue(start.begin(), start.end());
  std::set<std::string> reached;
  while (!queue.empty()) {
    auto current = queue.front();
    queue.pop_front();
    auto [begin, end] = edges.equal_range(current);
    for (auto it = begin; it != end; ++it) {
      reached.insert(it->second);
      if (visited.insert(it->second).second) {
        queue.push_back(it->second);
      }
    }
  }
  for (const auto& id : start) reached.erase(id);
  return reached;
}

}  // namespace

ConstraintTrace trace_constraint_enforcement(const SecurityConstraint& constraint,
                                             const FunctionMapping& mapping,
                                             const DfdModel& dfd) {
  ConstraintTrace trace;
  trace.constraint_id = constraint.id;
  trace.declared_layer = constraint.declared_layer;

  std::set<std::string> enforcing;
  if (auto it = mapping.enforcement_points.find(constraint.id);
      it != mapping.enforcement_points.end()) {
    for (const auto& point : it->second) enforcing.insert(point.element_id);
  }
  trace.enforcing_elements.assign(enforcing.begin(), enforcing.end());

  if (enforcing.empty()) {
    trace.status = TraceStatus::unenforced;
    return trace;
  }

  // An element downstream of the enforcement point loses the constraint when
  // it executes one of the constrained tasks without seeing who acts.
  for (const auto& element_id : reachable_from(dfd, enforcing)) {
    const auto* element = dfd.find_element(element_id);
    if (element == nullptr) continue;
    if (element->kind == ElementKind::external_entity) continue;
    if (element->identity_mode == IdentityMode::end_user) continue;
    bool bound = std::any_of(constraint.task_ids.begin(), constraint.task_ids.end(),
                             [&](const std::string& task_id) {
                               return mapping.binds(task_id, element_id);
                             });
    if (bound) trace.downstream_gap_elements.push_back(element_id);
  }
  std::sort(trace.downstream_gap_elements.begin(), trace.downstream_gap_elements.end());

  trace.status = trace.downstream_gap_elements.empty() ? TraceStatus::fully_traced
                                                       : TraceStatus::attribution_gap;
  return trace;
}

}  // namespace xlayer
