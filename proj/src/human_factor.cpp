#include "xlayer/human_factor.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "xlayer/errors.hpp"

namespace xlayer {

std::string to_string(RoleCategory category) {
  switch (category) {
    case RoleCategory::governance: return "governance";
    case RoleCategory::design_time: return "design_time";
    case RoleCategory::runtime: return "runtime";
    case RoleCategory::passive: return "passive";
    case RoleCategory::partner: return "partner";
    case RoleCategory::outsider: return "outsider";
  }
  return {};
}

RoleCategory role_category_from_string(const std::string& text) {
  if (text == "governance") return RoleCategory::governance;
  if (text == "design_time") return RoleCategory::design_time;
  if (text == "runtime") return RoleCategory::runtime;
  if (text == "passive") return RoleCategory::passive;
  if (text == "partner") return RoleCategory::partner;
  if (text == "outsider") return RoleCategory::outsider;
  throw ValidationError("unknown role category '" + text + "'");
}

std::string to_string(RulePredicate predicate) {
  switch (predicate) {
    case RulePredicate::always: return "always";
    case RulePredicate::has_datastore: return "has_datastore";
    case RulePredicate::has_collaboration: return "has_collaboration";
    case RulePredicate::has_boundary_crossing: return "has_boundary_crossing";
  }
  return {};
}

RulePredicate rule_predicate_from_string(const std::string& text) {
  if (text == "always") return RulePredicate::always;
  if (text == "has_datastore") return RulePredicate::has_datastore;
  if (text == "has_collaboration") return RulePredicate::has_collaboration;
  if (text == "has_boundary_crossing") return RulePredicate::has_boundary_crossing;
  throw ValidationError("unknown rule predicate '" + text + "'");
}

const Role* RoleCatalog::find(const std::string& role_id) const {
  for (const auto& role : roles) {
    if (role.id == role_id) return &role;
  }
  return nullptr;
}

RoleCatalog parse_role_catalog(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed role catalog: ") + e.what());
  }
  const auto& entries = doc.is_object() ? doc.at("roles") : doc;
  if (!entries.is_array()) {
    throw ParseError("role catalog must contain a JSON array (or an object with 'roles')");
  }
  RoleCatalog catalog;
  std::set<std::string> ids;
  for (const auto& entry : entries) {
    Role role;
    role.id = entry.value("id", "");
    if (role.id.empty()) throw ValidationError("role without an id");
    if (!ids.insert(role.id).second) {
      throw ValidationError("duplicate role id '" + role.id + "'");
    }
    role.name = entry.value("name", role.id);
    role.category = role_category_from_string(entry.value("category", ""));
    role.attacker_tags = entry.value("attacker_tags", std::vector<std::string>{});
    catalog.roles.push_back(std::move(role));
  }
  return catalog;
}

std::vector<RiskRule> parse_risk_rules(const std::string& json_text,
                                       const RoleCatalog& catalog) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed risk rules file: ") + e.what());
  }
  const auto& entries = doc.is_object() ? doc.at("rules") : doc;
  if (!entries.is_array()) {
    throw ParseError("risk rules file must contain a JSON array (or an object with 'rules')");
  }
  std::vector<RiskRule> rules;
  std::set<std::string> ids;
  for (const auto& entry : entries) {
    RiskRule rule;
    rule.id = entry.value("id", "");
    if (rule.id.empty()) throw ValidationError("risk rule without an id");
    if (!ids.insert(rule.id).second) {
      throw ValidationError("duplicate risk rule id '" + rule.id + "'");
    }
    rule.role_id = entry.value("role", "");
    if (catalog.find(rule.role_id) == nullptr) {
      throw ValidationError("risk rule '" + rule.id + "' references unknown role '" +
                            rule.role_id + "'");
    }
    rule.layers = LayerFlags::from_names(entry.value("layers", std::vector<std::string>{}));
    if (!rule.layers.any()) {
      throw ValidationError("risk rule '" + rule.id + "' flags no layer");
    }
    rule.kind = finding_kind_from_string(entry.value("kind", ""));
    rule.risk_text = entry.value("risk", "");
    rule.solution_text = entry.value("solution", "");
    rule.predicate = rule_predicate_from_string(entry.value("requires", "always"));
    rules.push_back(std::move(rule));
  }
  return rules;
}

namespace {

bool selected_task_exchanges_messages(const AnalysisContext& context) {
  if (context.process == nullptr) return false;
  for (const auto& task : context.tasks) {
    const Pool* own_pool = context.process->pool_of_node(task.id);
    for (const auto& flow : context.process->message_flows) {
      const std::string* other = nullptr;
      if (flow.source == task.id) other = &flow.target;
      if (flow.target == task.id) other = &flow.source;
      if (other == nullptr) continue;
      const Pool* other_pool = context.process->pool_of_node(*other);
      if (other_pool != nullptr && other_pool != own_pool) return true;
    }
  }
  return false;
}

bool predicate_holds(RulePredicate predicate, const AnalysisContext& context) {
  switch (predicate) {
    case RulePredicate::always:
      return true;
    case RulePredicate::has_datastore: {
      if (context.mapping == nullptr || context.dfd == nullptr) return false;
      for (const auto& task : context.tasks) {
        auto it = context.mapping->task_bindings.find(task.id);
        if (it == context.mapping->task_bindings.end()) continue;
        for (const auto& element_id : it->second) {
          const auto* element = context.dfd->find_element(element_id);
          if (element != nullptr && element->kind == ElementKind::datastore) return true;
        }
      }
      return false;
    }
    case RulePredicate::has_collaboration:
      return context.collaboration;
    case RulePredicate::has_boundary_crossing:
      return context.dfd != nullptr && !flows_crossing_boundaries(*context.dfd).empty();
  }
  return false;
}

}  // namespace

std::vector<Role> relevant_roles(const AnalysisContext& context, const RoleCatalog& catalog) {
  std::vector<Role> roles;
  const bool partners_participate =
      context.collaboration && selected_task_exchanges_messages(context);
  for (const auto& role : catalog.roles) {
    switch (role.category) {
      case RoleCategory::governance:
        break;  // steers the whole process landscape, not the analyzed tasks
      case RoleCategory::design_time:
      case RoleCategory::runtime:
      case RoleCategory::outsider:
        roles.push_back(role);
        break;
      case RoleCategory::passive:
        if (context.subject_interaction) roles.push_back(role);
        break;
      case RoleCategory::partner:
        if (partners_participate) roles.push_back(role);
        break;
    }
  }
  std::sort(roles.begin(), roles.end(),
            [](const Role& a, const Role& b) { return a.id < b.id; });
  return roles;
}

RiskMatrix evaluate_risk_rules(const std::vector<Role>& roles,
                               const AnalysisContext& context,
                               const std::vector<RiskRule>& rules) {
  std::vector<std::string> context_refs;
  for (const auto& task : context.tasks) context_refs.push_back(task.id);
  std::sort(context_refs.begin(), context_refs.end());

  RiskMatrix matrix;
  for (const auto& rule : rules) {
    auto role = std::find_if(roles.begin(), roles.end(),
                             [&](const Role& r) { return r.id == rule.role_id; });
    if (role == roles.end()) continue;
    if (!predicate_holds(rule.predicate, context)) continue;

    RiskRow row;
    row.role_id = role->id;
    row.role_name = role->name;
    row.layers = rule.layers;
    row.kind = rule.kind;
    row.risk_text = rule.risk_text;
    row.solution_text = rule.solution_text;
    row.rule_id = rule.id;
    row.context_refs = context_refs;
    matrix.rows.push_back(std::move(row));
  }
  std::sort(matrix.rows.begin(), matrix.rows.end(), [](const RiskRow& a, const RiskRow& b) {
    return std::tie(a.role_id, a.rule_id) < std::tie(b.role_id, b.rule_id);
  });
  return matrix;
}

}  // namespace xlayer
