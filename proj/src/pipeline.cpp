#include "xlayer/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "xlayer/digest.hpp"
#include "xlayer/errors.hpp"

namespace xlayer {

std::string to_string(FailThreshold threshold) {
  switch (threshold) {
    case FailThreshold::never: return "never";
    case FailThreshold::any_gap: return "any-gap";
    case FailThreshold::any_unenforced: return "any-unenforced";
  }
  return {};
}

FailThreshold fail_threshold_from_string(const std::string& text) {
  if (text == "never") return FailThreshold::never;
  if (text == "any-gap") return FailThreshold::any_gap;
  if (text == "any-unenforced") return FailThreshold::any_unenforced;
  throw InputError("unknown fail threshold '" + text + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot read file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::vector<TaskNode> select_tasks(const ProcessModel& process,
                                   const std::vector<std::string>& selection) {
  std::vector<TaskNode> selected;
  if (selection.empty()) {
    for (const auto* task : process.all_tasks()) {
      if (task->security_critical) selected.push_back(*task);
    }
  } else {
    for (const auto& task_id : selection) {
      const auto* task = process.find_task(task_id);
      if (task == nullptr) {
        throw InputError("selected task '" + task_id + "' does not exist in the process model");
      }
      selected.push_back(*task);
    }
  }
  std::sort(selected.begin(), selected.end(),
            [](const TaskNode& a, const TaskNode& b) { return a.id < b.id; });
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  return selected;
}

bool threshold_met(FailThreshold threshold, const std::vector<ConstraintTrace>& traces) {
  switch (threshold) {
    case FailThreshold::never:
      return false;
    case FailThreshold::any_gap:
      // Any enforcement deficiency: a gapped or a completely unenforced constraint.
      return std::any_of(traces.begin(), traces.end(), [](const ConstraintTrace& trace) {
        return trace.status != TraceStatus::fully_traced;
      });
    case FailThreshold::any_unenforced:
      return std::any_of(traces.begin(), traces.end(), [](const ConstraintTrace& trace) {
        return trace.status == TraceStatus::unenforced;
      });
  }
  return false;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  PipelineResult result;
  auto& report = result.report;
  report.metadata.version = kToolVersion;
  report.metadata.timestamp = utc_timestamp();

  auto load_input = [&](const std::string& kind, const std::string& path) {
    auto content = read_file(path);
    report.metadata.inputs[kind] = {path, digest_string(content)};
    return content;
  };

  const auto bpmn_text = load_input("bpmn", config.bpmn_path);
  std::optional<std::string> annotations;
  if (config.annotations_path) {
    annotations = load_input("annotations", *config.annotations_path);
  }
  const auto dfd_text = load_input("dfd", config.dfd_path);
  const auto mapping_text = load_input("mapping", config.mapping_path);
  const auto roles_text = load_input("roles", config.roles_path);
  const auto risk_rules_text = load_input("risk_rules", config.risk_rules_path);
  const auto threat_rules_text = load_input("threat_rules", config.threat_rules_path);

  // Step 1 — business process analysis.
  result.process = parse_process_model(bpmn_text, annotations);
  report.participants = extract_participants(result.process);
  report.constraints = extract_constraints(result.process);
  report.infrastructure = extract_infrastructure(result.process);
  report.collaboration = detect_collaborations(result.process, config.own_org);
  report.process_warnings = model_warnings(result.process);

  // Step 2 — function mapping.
  result.dfd = parse_dfd(dfd_text);
  const auto mapping = load_mapping(mapping_text, result.process, result.dfd);
  report.coverage_findings = check_mapping_coverage(result.process, mapping);
  report.mapping_assumptions = {
      "role-assignment constraints are traced with the same attribution-gap rule "
      "as separation- and binding-of-duty constraints"};
  for (const auto& constraint : report.constraints) {
    report.constraint_traces.push_back(
        trace_constraint_enforcement(constraint, mapping, result.dfd));
  }

  // Step 3 — technical analysis.
  report.boundary_crossings = flows_crossing_boundaries(result.dfd);
  for (const auto& element : find_entry_points(result.dfd)) {
    report.entry_point_ids.push_back(element.id);
  }
  report.dfd_warnings = dfd_warnings(result.dfd);
  const auto threat_rules = parse_threat_rules(threat_rules_text);
  report.threats = enumerate_threats(result.dfd, threat_rules);
  annotate_constraint_exposure(report.threats, mapping);
  report.attack_surface = summarize_attack_surface(result.dfd, report.threats);

  // Step 4 — human factor analysis.
  const auto catalog = parse_role_catalog(roles_text);
  const auto risk_rules = parse_risk_rules(risk_rules_text, catalog);
  AnalysisContext context;
  context.tasks = select_tasks(result.process, config.task_selection);
  context.process = &result.process;
  context.mapping = &mapping;
  context.dfd = &result.dfd;
  context.collaboration = report.collaboration.collaboration;
  context.subject_interaction = config.subject_interaction;
  for (const auto& task : context.tasks) {
    report.selected_task_ids.push_back(task.id);
  }
  report.relevant_roles = relevant_roles(context, catalog);
  report.risk_matrix = evaluate_risk_rules(report.relevant_roles, context, risk_rules);

  result.exit_status = threshold_met(config.fail_threshold, report.constraint_traces) ? 1 : 0;
  return result;
}

}  // namespace xlayer
