#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlayer/errors.hpp"
#include "xlayer/process_model.hpp"
#include "xlayer/xml.hpp"

namespace xlayer {
namespace {

constexpr const char* kBpmnNs = "http://www.omg.org/spec/BPMN/20100524/MODEL";

const std::set<std::string> kManualTaskElements = {"task", "userTask", "manualTask"};
const std::set<std::string> kAutomatedTaskElements = {
    "serviceTask", "sendTask", "receiveTask", "scriptTask", "businessRuleTask"};
// Accepted but otherwise inert; ids are kept so flows referencing them resolve.
const std::set<std::string> kInertNodeElements = {
    "startEvent", "endEvent", "intermediateCatchEvent", "intermediateThrowEvent",
    "boundaryEvent", "exclusiveGateway", "parallelGateway", "inclusiveGateway",
    "eventBasedGateway", "complexGateway"};

std::string require_id(const xml::Element& element) {
  auto id = element.attribute("id");
  if (id.empty()) {
    throw ValidationError("BPMN element '" + element.name + "' is missing an id");
  }
  return id;
}

TaskNode* find_task_mut(Pool& pool, const std::string& task_id) {
  for (auto& task : pool.tasks) {
    if (task.id == task_id) return &task;
  }
  return nullptr;
}

TaskNode* find_task_mut(ProcessModel& model, const std::string& task_id) {
  for (auto& pool : model.pools) {
    if (auto* task = find_task_mut(pool, task_id)) return task;
  }
  return nullptr;
}

struct ConstraintSpec {
  std::string id;
  ConstraintKind kind;
  std::vector<std::string> task_ids;
  std::string role_name;
};

// Text annotations matching SoD(a, b) / BoD(a, b) / Role(task, role name)
// declare constraints; anything else is ordinary documentation.
std::optional<ConstraintSpec> parse_annotation_text(const std::string& annotation_id,
                                                    const std::string& text) {
  static const std::regex grammar(R"(^\s*(SoD|BoD|Role)\s*\(([^()]*)\)\s*$)");
  std::smatch match;
  if (!std::regex_match(text, match, grammar)) return std::nullopt;

  std::vector<std::string> args;
  std::string rest = match[2];
  size_t pos = 0;
  while (true) {
    size_t comma = rest.find(',', pos);
    std::string piece = rest.substr(pos, comma - pos);
    auto begin = piece.find_first_not_of(" \t\r\n");
    auto end = piece.find_last_not_of(" \t\r\n");
    args.push_back(begin == std::string::npos ? "" : piece.substr(begin, end - begin + 1));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (args.size() != 2 || args[0].empty() || args[1].empty()) {
    throw ValidationError("text annotation '" + annotation_id +
                          "' looks like a constraint but does not take two arguments: " + text);
  }

  ConstraintSpec spec;
  spec.id = annotation_id;
  const std::string kind = match[1];
  if (kind == "SoD") {
    spec.kind = ConstraintKind::separation_of_duty;
    spec.task_ids = {args[0], args[1]};
  } else if (kind == "BoD") {
    spec.kind = ConstraintKind::binding_of_duty;
    spec.task_ids = {args[0], args[1]};
  } else {
    spec.kind = ConstraintKind::role_assignment;
    spec.task_ids = {args[0]};
    spec.role_name = args[1];
  }
  return spec;
}

Pool parse_process_element(const xml::Element& process,
                           const std::map<std::string, std::string>& data_store_names,
                           std::vector<DataStoreRef>& data_stores,
                           std::vector<ConstraintSpec>& annotation_constraints) {
  Pool pool;
  pool.id = require_id(process);
  pool.name = process.attribute("name", pool.id);

  std::map<std::string, std::vector<std::string>> lane_refs;  // lane id -> flowNodeRefs

  for (const auto& child : process.children) {
    if (child.ns != kBpmnNs) continue;

    if (child.name == "laneSet") {
      for (const auto* lane_el : child.children_named(kBpmnNs, "lane")) {
        Lane lane;
        lane.id = require_id(*lane_el);
        lane.role_name = lane_el->attribute("name");
        for (const auto* ref : lane_el->children_named(kBpmnNs, "flowNodeRef")) {
          lane_refs[lane.id].push_back(ref->text);
        }
        pool.lanes.push_back(std::move(lane));
      }
    } else if (kManualTaskElements.count(child.name) || kAutomatedTaskElements.count(child.name)) {
      TaskNode task;
      task.id = require_id(child);
      task.name = child.attribute("name", task.id);
      task.kind = kManualTaskElements.count(child.name) ? TaskKind::manual : TaskKind::automated;
      pool.tasks.push_back(std::move(task));
    } else if (kInertNodeElements.count(child.name)) {
      pool.other_node_ids.push_back(require_id(child));
    } else if (child.name == "sequenceFlow") {
      SequenceFlow flow;
      flow.id = require_id(child);
      flow.source = child.attribute("sourceRef");
      flow.target = child.attribute("targetRef");
      pool.sequence_flows.push_back(std::move(flow));
    } else if (child.name == "dataStoreReference") {
      DataStoreRef store;
      store.id = require_id(child);
      store.name = child.attribute("name");
      if (store.name.empty()) {
        auto it = data_store_names.find(child.attribute("dataStoreRef"));
        store.name = it == data_store_names.end() ? store.id : it->second;
      }
      data_stores.push_back(std::move(store));
    } else if (child.name == "textAnnotation") {
      const auto* text_el = child.first_child(kBpmnNs, "text");
      if (text_el != nullptr) {
        if (auto spec = parse_annotation_text(require_id(child), text_el->text)) {
          annotation_constraints.push_back(std::move(*spec));
        }
      }
    }
    // Everything else in the BPMN namespace (associations, data objects,
    // message definitions, ...) is outside the subset and skipped.
  }

  // Resolve lane membership. References to events or gateways are legal BPMN
  // and simply not recorded; unknown references are dangling.
  std::set<std::string> inert_ids(pool.other_node_ids.begin(), pool.other_node_ids.end());
  for (auto& lane : pool.lanes) {
    for (const auto& ref : lane_refs[lane.id]) {
      if (auto* task = find_task_mut(pool, ref)) {
        if (!task->lane_id.empty() && task->lane_id != lane.id) {
          throw ValidationError("task '" + ref + "' is assigned to more than one lane");
        }
        task->lane_id = lane.id;
        lane.task_ids.push_back(ref);
      } else if (!inert_ids.count(ref)) {
        throw ValidationError("lane '" + lane.id + "' references unknown flow node '" + ref + "'");
      }
    }
  }
  return pool;
}

void parse_sidecar(const std::string& annotations_json,
                   std::vector<ConstraintSpec>& specs,
                   std::set<std::string>& security_critical) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(annotations_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed constraint file: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("constraint file must contain a JSON object");
  }

  for (const auto& entry : doc.value("constraints", nlohmann::json::array())) {
    ConstraintSpec spec;
    spec.id = entry.value("id", "");
    if (spec.id.empty()) {
      throw ValidationError("constraint entry without an id");
    }
    spec.kind = constraint_kind_from_string(entry.value("kind", ""));
    for (const auto& task : entry.value("tasks", nlohmann::json::array())) {
      spec.task_ids.push_back(task.get<std::string>());
    }
    spec.role_name = entry.value("role", "");
    specs.push_back(std::move(spec));
  }
  for (const auto& task : doc.value("security_critical", nlohmann::json::array())) {
    security_critical.insert(task.get<std::string>());
  }
}

std::vector<std::string> sorted_task_set(const ConstraintSpec& spec) {
  auto tasks = spec.task_ids;
  std::sort(tasks.begin(), tasks.end());
  return tasks;
}

// Merge the sidecar and annotation channels: identical redeclarations
// collapse (the lexicographically smallest id survives), the same id with
// different content and SoD/BoD over the same pair contradict.
std::vector<SecurityConstraint> merge_constraints(std::vector<ConstraintSpec> specs) {
  std::map<std::string, ConstraintSpec> by_id;
  for (auto& spec : specs) {
    auto [it, inserted] = by_id.emplace(spec.id, spec);
    if (!inserted) {
      const auto& other = it->second;
      if (other.kind != spec.kind || sorted_task_set(other) != sorted_task_set(spec) ||
          other.role_name != spec.role_name) {
        throw ContradictionError("constraint id '" + spec.id +
                                 "' is declared twice with different content");
      }
    }
  }

  struct Key {
    ConstraintKind kind;
    std::vector<std::string> tasks;
    std::string role;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, ConstraintSpec> deduped;
  for (const auto& [id, spec] : by_id) {
    Key key{spec.kind, sorted_task_set(spec), spec.role_name};
    auto [it, inserted] = deduped.emplace(key, spec);
    if (!inserted && spec.id < it->second.id) {
      it->second = spec;
    }
  }

  std::vector<SecurityConstraint> constraints;
  for (const auto& [key, spec] : deduped) {
    SecurityConstraint constraint;
    constraint.id = spec.id;
    constraint.kind = spec.kind;
    constraint.task_ids = spec.task_ids;
    constraint.role_name = spec.role_name;
    constraint.declared_layer = Layer::business;
    constraints.push_back(std::move(constraint));
  }
  std::sort(constraints.begin(), constraints.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return constraints;
}

void sort_model(ProcessModel& model) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  for (auto& pool : model.pools) {
    std::sort(pool.lanes.begin(), pool.lanes.end(), by_id);
    std::sort(pool.tasks.begin(), pool.tasks.end(), by_id);
    std::sort(pool.other_node_ids.begin(), pool.other_node_ids.end());
    std::sort(pool.sequence_flows.begin(), pool.sequence_flows.end(), by_id);
    for (auto& lane : pool.lanes) {
      std::sort(lane.task_ids.begin(), lane.task_ids.end());
    }
  }
  std::sort(model.pools.begin(), model.pools.end(), by_id);
  std::sort(model.message_flows.begin(), model.message_flows.end(), by_id);
  std::sort(model.data_stores.begin(), model.data_stores.end(), by_id);
}

}  // namespace

ProcessModel parse_process_model(const std::string& bpmn_xml,
                                 const std::optional<std::string>& annotations_json) {
  xml::Element root = xml::parse_document(bpmn_xml);
  if (root.ns != kBpmnNs || root.name != "definitions") {
    throw ParseError("root element is not a BPMN definitions element (namespace " +
                     std::string(kBpmnNs) + ")");
  }

  ProcessModel model;
  model.id = root.attribute("id", "definitions");

  std::map<std::string, std::string> data_store_names;
  for (const auto* store : root.children_named(kBpmnNs, "dataStore")) {
    data_store_names[store->attribute("id")] = store->attribute("name");
  }

  std::vector<ConstraintSpec> constraint_specs;

  std::map<std::string, Pool> processes;  // process id -> parsed content
  for (const auto* process : root.children_named(kBpmnNs, "process")) {
    Pool pool = parse_process_element(*process, data_store_names, model.data_stores,
                                      constraint_specs);
    auto id = pool.id;
    processes.emplace(std::move(id), std::move(pool));
  }

  const auto* collaboration = root.first_child(kBpmnNs, "collaboration");
  if (collaboration != nullptr) {
    for (const auto* participant : collaboration->children_named(kBpmnNs, "participant")) {
      Pool pool;
      pool.id = require_id(*participant);
      pool.name = participant->attribute("name", pool.id);
      auto process_ref = participant->attribute("processRef");
      if (!process_ref.empty()) {
        auto it = processes.find(process_ref);
        if (it == processes.end()) {
          throw ValidationError("participant '" + pool.id +
                                "' references unknown process '" + process_ref + "'");
        }
        pool.lanes = std::move(it->second.lanes);
        pool.tasks = std::move(it->second.tasks);
        pool.other_node_ids = std::move(it->second.other_node_ids);
        pool.sequence_flows = std::move(it->second.sequence_flows);
        processes.erase(it);
      }
      model.pools.push_back(std::move(pool));
    }
    for (const auto* flow : collaboration->children_named(kBpmnNs, "messageFlow")) {
      MessageFlow message_flow;
      message_flow.id = require_id(*flow);
      message_flow.source = flow->attribute("sourceRef");
      message_flow.target = flow->attribute("targetRef");
      model.message_flows.push_back(std::move(message_flow));
    }
  }
  // Processes not referenced by any participant stand as their own pools.
  for (auto& [id, pool] : processes) {
    model.pools.push_back(std::move(pool));
  }

  std::set<std::string> security_critical;
  if (annotations_json) {
    parse_sidecar(*annotations_json, constraint_specs, security_critical);
  }
  model.constraints = merge_constraints(std::move(constraint_specs));

  for (const auto& task_id : security_critical) {
    auto* task = find_task_mut(model, task_id);
    if (task == nullptr) {
      throw ValidationError("security_critical lists unknown task '" + task_id + "'");
    }
    task->security_critical = true;
  }

  sort_model(model);
  validate(model);
  return model;
}

}  // namespace xlayer
