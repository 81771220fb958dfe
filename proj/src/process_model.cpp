#include "xlayer/process_model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "xlayer/errors.hpp"

namespace xlayer {

std::string to_string(Layer layer) {
  switch (layer) {
    case Layer::business: return "business";
    case Layer::design: return "design";
    case Layer::implementation: return "implementation";
  }
  return {};
}

Layer layer_from_string(const std::string& text) {
  if (text == "business") return Layer::business;
  if (text == "design") return Layer::design;
  if (text == "implementation") return Layer::implementation;
  throw ValidationError("unknown layer '" + text + "'");
}

bool LayerFlags::contains(Layer layer) const {
  switch (layer) {
    case Layer::business: return business;
    case Layer::design: return design;
    case Layer::implementation: return implementation;
  }
  return false;
}

LayerFlags LayerFlags::only(Layer layer) {
  LayerFlags flags;
  switch (layer) {
    case Layer::business: flags.business = true; break;
    case Layer::design: flags.design = true; break;
    case Layer::implementation: flags.implementation = true; break;
  }
  return flags;
}

std::vector<std::string> LayerFlags::names() const {
  std::vector<std::string> out;
  if (business) out.push_back("business");
  if (design) out.push_back("design");
  if (implementation) out.push_back("implementation");
  return out;
}

LayerFlags LayerFlags::from_names(const std::vector<std::string>& names) {
  LayerFlags flags;
  for (const auto& name : names) {
    switch (layer_from_string(name)) {
      case Layer::business: flags.business = true; break;
      case Layer::design: flags.design = true; break;
      case Layer::implementation: flags.implementation = true; break;
    }
  }
  return flags;
}

std::string to_string(FindingKind kind) {
  return kind == FindingKind::vulnerability ? "vulnerability" : "threat";
}

FindingKind finding_kind_from_string(const std::string& text) {
  if (text == "vulnerability") return FindingKind::vulnerability;
  if (text == "threat") return FindingKind::threat;
  throw ValidationError("unknown finding kind '" + text + "'");
}

std::string to_string(TaskKind kind) {
  return kind == TaskKind::manual ? "manual" : "automated";
}

TaskKind task_kind_from_string(const std::string& text) {
  if (text == "manual") return TaskKind::manual;
  if (text == "automated") return TaskKind::automated;
  throw ValidationError("unknown task kind '" + text + "'");
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::separation_of_duty: return "SoD";
    case ConstraintKind::binding_of_duty: return "BoD";
    case ConstraintKind::role_assignment: return "Role";
  }
  return {};
}

ConstraintKind constraint_kind_from_string(const std::string& text) {
  if (text == "SoD") return ConstraintKind::separation_of_duty;
  if (text == "BoD") return ConstraintKind::binding_of_duty;
  if (text == "Role") return ConstraintKind::role_assignment;
  throw ValidationError("unknown constraint kind '" + text + "'");
}

const TaskNode* Pool::find_task(const std::string& task_id) const {
  for (const auto& task : tasks) {
    if (task.id == task_id) return &task;
  }
  return nullptr;
}

bool Pool::has_node(const std::string& node_id) const {
  if (find_task(node_id) != nullptr) return true;
  return std::find(other_node_ids.begin(), other_node_ids.end(), node_id) !=
         other_node_ids.end();
}

const TaskNode* ProcessModel::find_task(const std::string& task_id) const {
  for (const auto& pool : pools) {
    if (const auto* task = pool.find_task(task_id)) return task;
  }
  return nullptr;
}

const Pool* ProcessModel::find_pool(const std::string& pool_id) const {
  for (const auto& pool : pools) {
    if (pool.id == pool_id) return &pool;
  }
  return nullptr;
}

const Pool* ProcessModel::pool_of_node(const std::string& node_id) const {
  for (const auto& pool : pools) {
    if (pool.id == node_id || pool.has_node(node_id)) return &pool;
  }
  return nullptr;
}

std::vector<const TaskNode*> ProcessModel::all_tasks() const {
  std::vector<const TaskNode*> out;
  for (const auto& pool : pools) {
    for (const auto& task : pool.tasks) out.push_back(&task);
  }
  return out;
}

namespace {

void check_unique(std::set<std::string>& seen, const std::string& id) {
  if (!seen.insert(id).second) {
    throw ValidationError("duplicate identifier '" + id + "'");
  }
}

}  // namespace

void validate(const ProcessModel& model) {
  std::set<std::string> ids;
  for (const auto& pool : model.pools) {
    check_unique(ids, pool.id);
    for (const auto& lane : pool.lanes) check_unique(ids, lane.id);
    for (const auto& task : pool.tasks) check_unique(ids, task.id);
    for (const auto& node_id : pool.other_node_ids) check_unique(ids, node_id);
    for (const auto& flow : pool.sequence_flows) check_unique(ids, flow.id);
  }
  for (const auto& flow : model.message_flows) check_unique(ids, flow.id);
  for (const auto& store : model.data_stores) check_unique(ids, store.id);
  for (const auto& constraint : model.constraints) check_unique(ids, constraint.id);

  for (const auto& pool : model.pools) {
    for (const auto& lane : pool.lanes) {
      for (const auto& task_id : lane.task_ids) {
        if (pool.find_task(task_id) == nullptr) {
          throw ValidationError("lane '" + lane.id + "' references unknown task '" +
                                task_id + "'");
        }
      }
    }
    for (const auto& task : pool.tasks) {
      if (task.lane_id.empty()) continue;
      auto lane = std::find_if(pool.lanes.begin(), pool.lanes.end(),
                               [&](const Lane& l) { return l.id == task.lane_id; });
      if (lane == pool.lanes.end()) {
        throw ValidationError("task '" + task.id + "' references unknown lane '" +
                              task.lane_id + "'");
      }
    }
    for (const auto& flow : pool.sequence_flows) {
      for (const auto& endpoint : {flow.source, flow.target}) {
        if (!pool.has_node(endpoint)) {
          throw ValidationError("sequence flow '" + flow.id +
                                "' references unknown node '" + endpoint + "'");
        }
      }
    }
  }

  for (const auto& flow : model.message_flows) {
    const Pool* source_pool = model.pool_of_node(flow.source);
    const Pool* target_pool = model.pool_of_node(flow.target);
    if (source_pool == nullptr) {
      throw ValidationError("message flow '" + flow.id + "' references unknown node '" +
                            flow.source + "'");
    }
    if (target_pool == nullptr) {
      throw ValidationError("message flow '" + flow.id + "' references unknown node '" +
                            flow.target + "'");
    }
    if (source_pool == target_pool) {
      throw ValidationError("message flow '" + flow.id +
                            "' must connect two distinct pools, both endpoints are in '" +
                            source_pool->id + "'");
    }
  }

  std::set<std::pair<std::string, std::string>> sod_pairs;
  std::set<std::pair<std::string, std::string>> bod_pairs;
  for (const auto& constraint : model.constraints) {
    if (constraint.declared_layer != Layer::business) {
      throw ValidationError("constraint '" + constraint.id +
                            "' must be declared at the business layer");
    }
    for (const auto& task_id : constraint.task_ids) {
      if (model.find_task(task_id) == nullptr) {
        throw ValidationError("constraint '" + constraint.id +
                              "' references unknown task '" + task_id + "'");
      }
    }
    if (constraint.kind == ConstraintKind::role_assignment) {
      if (constraint.task_ids.empty()) {
        throw ValidationError("role assignment '" + constraint.id + "' binds no task");
      }
      if (constraint.role_name.empty()) {
        throw ValidationError("role assignment '" + constraint.id + "' carries no role name");
      }
      continue;
    }
    if (!constraint.role_name.empty()) {
      throw ValidationError("constraint '" + constraint.id +
                            "' carries a role name but is not a role assignment");
    }
    if (constraint.task_ids.size() != 2 || constraint.task_ids[0] == constraint.task_ids[1]) {
      throw ValidationError("constraint '" + constraint.id +
                            "' must reference exactly two distinct tasks");
    }
    auto pair = std::minmax(constraint.task_ids[0], constraint.task_ids[1]);
    auto& own = constraint.kind == ConstraintKind::separation_of_duty ? sod_pairs : bod_pairs;
    const auto& opposite =
        constraint.kind == ConstraintKind::separation_of_duty ? bod_pairs : sod_pairs;
    own.insert(pair);
    if (opposite.count(pair)) {
      throw ContradictionError("contradictory SoD and BoD constraints over tasks '" +
                               pair.first + "' and '" + pair.second + "'");
    }
  }
}

std::vector<Finding> model_warnings(const ProcessModel& model) {
  std::vector<Finding> warnings;
  for (const auto& pool : model.pools) {
    for (const auto& task : pool.tasks) {
      if (!task.lane_id.empty()) continue;
      Finding finding;
      finding.kind = FindingKind::vulnerability;
      finding.layers = LayerFlags::only(Layer::business);
      finding.text = "task '" + task.id + "' is not assigned to any lane; no role is responsible for it";
      finding.source = "process-model";
      finding.subjects = {task.id};
      warnings.push_back(std::move(finding));
    }
  }
  std::sort(warnings.begin(), warnings.end(),
            [](const auto& a, const auto& b) { return a.subjects < b.subjects; });
  return warnings;
}

ParticipantReport extract_participants(const ProcessModel& model) {
  ParticipantReport report;
  for (const auto& pool : model.pools) {
    ParticipantEntry entry;
    entry.pool_id = pool.id;
    entry.pool_name = pool.name;
    for (const auto& lane : pool.lanes) entry.roles.push_back(lane.role_name);
    std::sort(entry.roles.begin(), entry.roles.end());
    report.push_back(std::move(entry));
  }
  std::sort(report.begin(), report.end(),
            [](const auto& a, const auto& b) { return a.pool_id < b.pool_id; });
  return report;
}

std::vector<SecurityConstraint> extract_constraints(const ProcessModel& model) {
  auto constraints = model.constraints;
  std::sort(constraints.begin(), constraints.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return constraints;
}

InfrastructureHints extract_infrastructure(const ProcessModel& model) {
  InfrastructureHints hints;
  hints.data_stores = model.data_stores;
  std::sort(hints.data_stores.begin(), hints.data_stores.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& pool : model.pools) {
    for (const auto& task : pool.tasks) {
      if (task.kind == TaskKind::automated) hints.automated_tasks.push_back(task);
    }
  }
  std::sort(hints.automated_tasks.begin(), hints.automated_tasks.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return hints;
}

CollaborationReport detect_collaborations(const ProcessModel& model,
                                          const std::optional<std::string>& own_org) {
  CollaborationReport report;
  report.collaboration = model.pools.size() >= 2;
  report.own_org = own_org;

  if (own_org) {
    bool found = std::any_of(model.pools.begin(), model.pools.end(),
                             [&](const Pool& pool) { return pool.name == *own_org; });
    if (!found) {
      throw InputError("own organization '" + *own_org + "' does not match any pool");
    }
  }
  if (report.collaboration) {
    for (const auto& pool : model.pools) {
      if (own_org && pool.name == *own_org) continue;
      report.partners.push_back(pool.name);
    }
    std::sort(report.partners.begin(), report.partners.end());
    report.partners.erase(std::unique(report.partners.begin(), report.partners.end()),
                          report.partners.end());
    report.advisory =
        "process spans multiple organizations; exchanged messages may require "
        "security measures such as encryption or digital signatures";
  }
  return report;
}

nlohmann::json to_json(const ProcessModel& model) {
  nlohmann::json doc;
  doc["id"] = model.id;
  doc["pools"] = nlohmann::json::array();
  for (const auto& pool : model.pools) {
    nlohmann::json p;
    p["id"] = pool.id;
    p["name"] = pool.name;
    p["lanes"] = nlohmann::json::array();
    for (const auto& lane : pool.lanes) {
      p["lanes"].push_back({{"id", lane.id},
                            {"role_name", lane.role_name},
                            {"task_ids", lane.task_ids}});
    }
    p["tasks"] = nlohmann::json::array();
    for (const auto& task : pool.tasks) {
      p["tasks"].push_back({{"id", task.id},
                            {"name", task.name},
                            {"kind", to_string(task.kind)},
                            {"lane_id", task.lane_id},
                            {"security_critical", task.security_critical}});
    }
    p["other_node_ids"] = pool.other_node_ids;
    p["sequence_flows"] = nlohmann::json::array();
    for (const auto& flow : pool.sequence_flows) {
      p["sequence_flows"].push_back(
          {{"id", flow.id}, {"source", flow.source}, {"target", flow.target}});
    }
    doc["pools"].push_back(std::move(p));
  }
  doc["message_flows"] = nlohmann::json::array();
  for (const auto& flow : model.message_flows) {
    doc["message_flows"].push_back(
        {{"id", flow.id}, {"source", flow.source}, {"target", flow.target}});
  }
  doc["data_stores"] = nlohmann::json::array();
  for (const auto& store : model.data_stores) {
    doc["data_stores"].push_back({{"id", store.id}, {"name", store.name}});
  }
  doc["constraints"] = nlohmann::json::array();
  for (const auto& constraint : model.constraints) {
    nlohmann::json c;
    c["id"] = constraint.id;
    c["kind"] = to_string(constraint.kind);
    c["tasks"] = constraint.task_ids;
    if (!constraint.role_name.empty()) c["role"] = constraint.role_name;
    c["declared_layer"] = to_string(constraint.declared_layer);
    doc["constraints"].push_back(std::move(c));
  }
  return doc;
}

ProcessModel process_model_from_json(const nlohmann::json& doc) {
  ProcessModel model;
  model.id = doc.value("id", "");
  for (const auto& p : doc.value("pools", nlohmann::json::array())) {
    Pool pool;
    pool.id = p.value("id", "");
    pool.name = p.value("name", "");
    for (const auto& l : p.value("lanes", nlohmann::json::array())) {
      Lane lane;
      lane.id = l.value("id", "");
      lane.role_name = l.value("role_name", "");
      lane.task_ids = l.value("task_ids", std::vector<std::string>{});
      pool.lanes.push_back(std::move(lane));
    }
    for (const auto& t : p.value("tasks", nlohmann::json::array())) {
      TaskNode task;
      task.id = t.value("id", "");
      task.name = t.value("name", "");
      task.kind = task_kind_from_string(t.value("kind", "manual"));
      task.lane_id = t.value("lane_id", "");
      task.security_critical = t.value("security_critical", false);
      pool.tasks.push_back(std::move(task));
    }
    pool.other_node_ids = p.value("other_node_ids", std::vector<std::string>{});
    for (const auto& f : p.value("sequence_flows", nlohmann::json::array())) {
      pool.sequence_flows.push_back(
          {f.value("id", ""), f.value("source", ""), f.value("target", "")});
    }
    model.pools.push_back(std::move(pool));
  }
  for (const auto& f : doc.value("message_flows", nlohmann::json::array())) {
    model.message_flows.push_back(
        {f.value("id", ""), f.value("source", ""), f.value("target", "")});
  }
  for (const auto& s : doc.value("data_stores", nlohmann::json::array())) {
    model.data_stores.push_back({s.value("id", ""), s.value("name", "")});
  }
  for (const auto& c : doc.value("constraints", nlohmann::json::array())) {
    SecurityConstraint constraint;
    constraint.id = c.value("id", "");
    constraint.kind = constraint_kind_from_string(c.value("kind", ""));
    constraint.task_ids = c.value("tasks", std::vector<std::string>{});
    constraint.role_name = c.value("role", "");
    constraint.declared_layer = layer_from_string(c.value("declared_layer", "business"));
    model.constraints.push_back(std::move(constraint));
  }
  validate(model);
  return model;
}

}  // namespace xlayer
