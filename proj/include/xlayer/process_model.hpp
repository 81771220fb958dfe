#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlayer/finding.hpp"
#include "xlayer/layer.hpp"

namespace xlayer {

enum class TaskKind { manual, automated };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& text);

struct TaskNode {
  std::string id;
  std::string name;
  TaskKind kind = TaskKind::manual;
  std::string lane_id;  // empty when the task sits in no lane
  bool security_critical = false;

  friend bool operator==(const TaskNode&, const TaskNode&) = default;
};

struct Lane {
  std::string id;
  std::string role_name;
  std::vector<std::string> task_ids;

  friend bool operator==(const Lane&, const Lane&) = default;
};

struct SequenceFlow {
  std::string id;
  std::string source;
  std::string target;

  friend bool operator==(const SequenceFlow&, const SequenceFlow&) = default;
};

/// A BPMN participant. Lanes carry the roles, tasks the work items.
/// Events and gateways are kept as bare ids so sequence flows referencing
/// them still validate.
struct Pool {
  std::string id;
  std::string name;
  std::vector<Lane> lanes;
  std::vector<TaskNode> tasks;
  std::vector<std::string> other_node_ids;
  std::vector<SequenceFlow> sequence_flows;

  const TaskNode* find_task(const std::string& task_id) const;
  bool has_node(const std::string& node_id) const;

  friend bool operator==(const Pool&, const Pool&) = default;
};

struct MessageFlow {
  std::string id;
  std::string source;
  std::string target;

  friend bool operator==(const MessageFlow&, const MessageFlow&) = default;
};

struct DataStoreRef {
  std::string id;
  std::string name;

  friend bool operator==(const DataStoreRef&, const DataStoreRef&) = default;
};

enum class ConstraintKind { separation_of_duty, binding_of_duty, role_assignment };

std::string to_string(ConstraintKind kind);  // "SoD", "BoD", "Role"
ConstraintKind constraint_kind_from_string(const std::string& text);

/// An access-control constraint declared at the business layer: SoD and BoD
/// bind an unordered pair of tasks, role assignments bind tasks to a role.
struct SecurityConstraint {
  std::string id;
  ConstraintKind kind = ConstraintKind::role_assignment;
  std::vector<std::string> task_ids;
  std::string role_name;  // role_assignment only
  Layer declared_layer = Layer::business;

  friend bool operator==(const SecurityConstraint&, const SecurityConstraint&) = default;
};

struct ProcessModel {
  std::string id;
  std::vector<Pool> pools;
  std::vector<MessageFlow> message_flows;
  std::vector<DataStoreRef> data_stores;
  std::vector<SecurityConstraint> constraints;

  const TaskNode* find_task(const std::string& task_id) const;
  const Pool* find_pool(const std::string& pool_id) const;
  /// Pool owning the given node id; also resolves pool ids themselves.
  const Pool* pool_of_node(const std::string& node_id) const;
  std::vector<const TaskNode*> all_tasks() const;

  friend bool operator==(const ProcessModel&, const ProcessModel&) = default;
};

/// Parses a BPMN document (subset: pools, lanes, tasks, sequence and message
/// flows, data store references, text annotations, gateways) plus an optional
/// sidecar constraint file into a validated ProcessModel.
///
/// Constraints come from two channels: the sidecar JSON and BPMN text
/// annotations of the form SoD(a, b) / BoD(a, b) / Role(task, role name).
/// Entries duplicated across channels are merged; contradictory ones throw.
ProcessModel parse_process_model(const std::string& bpmn_xml,
                                 const std::optional<std::string>& annotations_json = std::nullopt);

/// Checks every model invariant; throws ValidationError or ContradictionError.
void validate(const ProcessModel& model);

/// Non-fatal model smells, e.g. tasks not assigned to any lane.
std::vector<Finding> model_warnings(const ProcessModel& model);

struct ParticipantEntry {
  std::string pool_id;
  std::string pool_name;
  std::vector<std::string> roles;  // lane role names, sorted

  friend bool operator==(const ParticipantEntry&, const ParticipantEntry&) = default;
};

using ParticipantReport = std::vector<ParticipantEntry>;

/// Lists every pool with its lane roles, sorted by pool id.
ParticipantReport extract_participants(const ProcessModel& model);

/// All business-layer constraints, sorted by constraint id.
std::vector<SecurityConstraint> extract_constraints(const ProcessModel& model);

struct InfrastructureHints {
  std::vector<DataStoreRef> data_stores;
  std::vector<TaskNode> automated_tasks;

  friend bool operator==(const InfrastructureHints&, const InfrastructureHints&) = default;
};

/// Infrastructure visible at the business layer: data stores and automated
/// tasks, both sorted by id.
InfrastructureHints extract_infrastructure(const ProcessModel& model);

struct CollaborationReport {
  bool collaboration = false;
  std::optional<std::string> own_org;
  std::vector<std::string> partners;  // pool names, sorted
  std::string advisory;               // non-empty when collaboration is true

  friend bool operator==(const CollaborationReport&, const CollaborationReport&) = default;
};

/// Flags multi-pool models as collaborations. Partners are all pool names
/// other than the designated own organization; throws InputError when the
/// own-organization name does not match any pool.
CollaborationReport detect_collaborations(const ProcessModel& model,
                                          const std::optional<std::string>& own_org);

nlohmann::json to_json(const ProcessModel& model);
ProcessModel process_model_from_json(const nlohmann::json& doc);

}  // namespace xlayer
