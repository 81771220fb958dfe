#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xlayer/errors.hpp"
#include "xlayer/pipeline.hpp"

#ifndef XLAYER_BUNDLED_RULES_DIR
#define XLAYER_BUNDLED_RULES_DIR "rules"
#endif

namespace {

std::string resolve_rules_file(const std::string& explicit_path, const std::string& filename) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("XLAYER_RULES_DIR"); dir != nullptr && *dir != '\0') {
    return std::string(dir) + "/" + filename;
  }
  return std::string(XLAYER_BUNDLED_RULES_DIR) + "/" + filename;
}

std::vector<std::string> parse_task_selection(const std::string& value) {
  if (value == "all-critical") return {};
  std::vector<std::string> tasks;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) tasks.push_back(item);
  }
  if (tasks.empty()) {
    throw xlayer::InputError("--tasks expects a comma-separated id list or 'all-critical'");
  }
  return tasks;
}

int run_analyze(const xlayer::RunConfig& config) {
  auto result = xlayer::run_pipeline(config);

  std::string output;
  switch (config.format) {
    case xlayer::OutputFormat::json:
      output = xlayer::render_json(result.report);
      break;
    case xlayer::OutputFormat::markdown:
      output = xlayer::render_markdown(result.report);
      break;
    case xlayer::OutputFormat::dot:
      output = xlayer::render_dot(result.dfd, result.report.constraint_traces,
                                  result.report.threats);
      break;
  }

  if (config.out_path) {
    std::ofstream out(*config.out_path, std::ios::binary);
    if (!out) {
      throw xlayer::InputError("cannot write output file '" + *config.out_path + "'");
    }
    out << output;
  } else {
    std::cout << output;
  }
  return result.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-layer security analysis for process-aware information systems"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand(
      "analyze", "Run business process, mapping, technical and human factor analysis");

  xlayer::RunConfig config;
  std::string annotations_path;
  std::string roles_path;
  std::string risk_rules_path;
  std::string threat_rules_path;
  std::string own_org;
  std::string tasks = "all-critical";
  std::string format = "json";
  std::string out_path;
  std::string fail_on = "never";

  analyze->add_option("--bpmn", config.bpmn_path, "Business process model (BPMN 2.0 XML)")
      ->required();
  analyze->add_option("--annotations", annotations_path,
                      "Constraint sidecar file (JSON) with SoD/BoD/role constraints and "
                      "security-critical task ids");
  analyze->add_option("--dfd", config.dfd_path, "System architecture data flow diagram (JSON)")
      ->required();
  analyze->add_option("--mapping", config.mapping_path,
                      "Task-to-component mapping with enforcement points (JSON)")
      ->required();
  analyze->add_option("--roles", roles_path, "Role catalog (JSON), overrides the bundled one");
  analyze->add_option("--risk-rules", risk_rules_path,
                      "Risk rule knowledge base (JSON), overrides the bundled one");
  analyze->add_option("--threat-rules", threat_rules_path,
                      "Threat rule table (JSON), overrides the bundled one");
  analyze->add_option("--own-org", own_org,
                      "Pool name of the analyzing organization; other pools count as partners");
  analyze->add_option("--tasks", tasks,
                      "Comma-separated task ids for the human factor analysis, or "
                      "'all-critical' (default)");
  analyze->add_flag("--subject-interaction", config.subject_interaction,
                    "Selected tasks interact with passive subjects (includes subject roles "
                    "in the analysis)");
  analyze->add_option("--format", format, "Output format: json, md or dot")
      ->check(CLI::IsMember({"json", "md", "dot"}));
  analyze->add_option("--out", out_path, "Output file (default: stdout)");
  analyze->add_option("--fail-on", fail_on,
                      "Exit 1 when constraint traces meet the threshold: never, any-gap or "
                      "any-unenforced")
      ->check(CLI::IsMember({"never", "any-gap", "any-unenforced"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!annotations_path.empty()) config.annotations_path = annotations_path;
    if (!own_org.empty()) config.own_org = own_org;
    if (!out_path.empty()) config.out_path = out_path;
    config.roles_path = resolve_rules_file(roles_path, "roles.json");
    config.risk_rules_path = resolve_rules_file(risk_rules_path, "risk_rules.json");
    config.threat_rules_path = resolve_rules_file(threat_rules_path, "threat_rules.json");
    config.task_selection = parse_task_selection(tasks);
    config.fail_threshold = xlayer::fail_threshold_from_string(fail_on);
    if (format == "json") config.format = xlayer::OutputFormat::json;
    if (format == "md") config.format = xlayer::OutputFormat::markdown;
    if (format == "dot") config.format = xlayer::OutputFormat::dot;

    return run_analyze(config);
  } catch (const xlayer::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
