#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlayer/dfd_model.hpp"
#include "xlayer/finding.hpp"
#include "xlayer/process_model.hpp"

namespace xlayer {

struct EnforcementPoint {
  std::string element_id;
  Layer layer = Layer::implementation;  // design or implementation

  friend bool operator==(const EnforcementPoint&, const EnforcementPoint&) = default;
};

/// Binds business-process tasks to the DFD components realizing them, and
/// constraints to the components enforcing them.
struct FunctionMapping {
  std::map<std::string, std::vector<std::string>> task_bindings;
  std::map<std::string, std::vector<EnforcementPoint>> enforcement_points;

  bool binds(const std::string& task_id, const std::string& element_id) const;

  friend bool operator==(const FunctionMapping&, const FunctionMapping&) = default;
};

/// Parses the mapping JSON and resolves every reference against the process
/// model and the DFD; throws ValidationError naming unresolved ids.
FunctionMapping load_mapping(const std::string& json_text,
                             const ProcessModel& process,
                             const DfdModel& dfd);

/// One vulnerability finding per security-critical task with no component
/// binding, sorted by task id.
std::vector<Finding> check_mapping_coverage(const ProcessModel& process,
                                            const FunctionMapping& mapping);

enum class TraceStatus { fully_traced, attribution_gap, unenforced };

std::string to_string(TraceStatus status);
TraceStatus trace_status_from_string(const std::string& text);

/// Where a business-layer constraint ends up being enforced, and which
/// downstream components lose the acting user's identity on the data path.
struct ConstraintTrace {
  std::string constraint_id;
  Layer declared_layer = Layer::business;
  std::vector<std::string> enforcing_elements;
  std::vector<std::string> downstream_gap_elements;
  TraceStatus status = TraceStatus::unenforced;

  friend bool operator==(const ConstraintTrace&, const ConstraintTrace&) = default;
};

/// Follows data flows forward from the constraint's enforcement points. A
/// reachable element is an attribution gap when it is a process or datastore,
/// acts under a system or anonymous identity, and is bound to one of the
/// constraint's tasks. A constraint without enforcement points is unenforced.
ConstraintTrace trace_constraint_enforcement(const SecurityConstraint& constraint,
                                             const FunctionMapping& mapping,
                                             const DfdModel& dfd);

}  // namespace xlayer
