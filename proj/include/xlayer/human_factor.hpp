#pragma once

#include <string>
#include <vector>

#include "xlayer/dfd_model.hpp"
#include "xlayer/finding.hpp"
#include "xlayer/function_mapping.hpp"
#include "xlayer/process_model.hpp"

namespace xlayer {

/// When and how a role touches the system: governance roles steer the whole
/// process landscape, design_time roles build it, runtime roles execute it,
/// passive roles are acted upon, partners collaborate across organizations,
/// outsiders attack from outside.
enum class RoleCategory { governance, design_time, runtime, passive, partner, outsider };

std::string to_string(RoleCategory category);
RoleCategory role_category_from_string(const std::string& text);

struct Role {
  std::string id;
  std::string name;
  RoleCategory category = RoleCategory::runtime;
  std::vector<std::string> attacker_tags;  // outsider sub-types

  friend bool operator==(const Role&, const Role&) = default;
};

struct RoleCatalog {
  std::vector<Role> roles;

  const Role* find(const std::string& role_id) const;

  friend bool operator==(const RoleCatalog&, const RoleCatalog&) = default;
};

RoleCatalog parse_role_catalog(const std::string& json_text);

/// Closed predicate language gating context-sensitive rules.
enum class RulePredicate { always, has_datastore, has_collaboration, has_boundary_crossing };

std::string to_string(RulePredicate predicate);
RulePredicate rule_predicate_from_string(const std::string& text);

/// One knowledge-base entry: a risk a role can introduce (vulnerability) or
/// pose (threat) at the flagged layers, with the recommended solution.
struct RiskRule {
  std::string id;
  std::string role_id;
  LayerFlags layers;
  FindingKind kind = FindingKind::vulnerability;
  std::string risk_text;
  std::string solution_text;
  RulePredicate predicate = RulePredicate::always;

  friend bool operator==(const RiskRule&, const RiskRule&) = default;
};

/// Loads risk rules and validates every role reference against the catalog.
std::vector<RiskRule> parse_risk_rules(const std::string& json_text,
                                       const RoleCatalog& catalog);

/// Everything the human-factor step needs from the earlier pipeline steps.
/// Pointers may be null in reduced setups; predicates then evaluate false.
struct AnalysisContext {
  std::vector<TaskNode> tasks;  // selected (security-critical) tasks
  const ProcessModel* process = nullptr;
  const FunctionMapping* mapping = nullptr;
  const DfdModel* dfd = nullptr;
  bool collaboration = false;
  bool subject_interaction = false;
};

/// Role selection for a per-task analysis: design-time, runtime and outsider
/// roles always participate; governance roles never do; passive roles only
/// when a manual task interacts with a subject; partner roles only when the
/// process is a collaboration and a selected task exchanges messages with
/// another pool. Sorted by role id.
std::vector<Role> relevant_roles(const AnalysisContext& context,
                                 const RoleCatalog& catalog);

struct RiskRow {
  std::string role_id;
  std::string role_name;
  LayerFlags layers;
  FindingKind kind = FindingKind::vulnerability;
  std::string risk_text;
  std::string solution_text;
  std::string rule_id;
  std::vector<std::string> context_refs;  // task ids the analysis ran over

  friend bool operator==(const RiskRow&, const RiskRow&) = default;
};

struct RiskMatrix {
  std::vector<RiskRow> rows;  // sorted by (role_id, rule_id)

  friend bool operator==(const RiskMatrix&, const RiskMatrix&) = default;
};

/// One row per rule whose role is selected and whose predicate holds; layer
/// flags, kind and texts are carried over verbatim.
RiskMatrix evaluate_risk_rules(const std::vector<Role>& roles,
                               const AnalysisContext& context,
                               const std::vector<RiskRule>& rules);

}  // namespace xlayer
