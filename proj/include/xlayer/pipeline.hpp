#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xlayer/report.hpp"

namespace xlayer {

enum class FailThreshold { never, any_gap, any_unenforced };

std::string to_string(FailThreshold threshold);
FailThreshold fail_threshold_from_string(const std::string& text);

enum class OutputFormat { json, markdown, dot };

/// Resolved run configuration. The CLI fills the rule paths from explicit
/// flags, the XLAYER_RULES_DIR environment variable, or the bundled defaults.
struct RunConfig {
  std::string bpmn_path;
  std::optional<std::string> annotations_path;
  std::string dfd_path;
  std::string mapping_path;
  std::string roles_path;
  std::string risk_rules_path;
  std::string threat_rules_path;
  std::optional<std::string> own_org;
  std::vector<std::string> task_selection;  // empty selects all security-critical tasks
  bool subject_interaction = false;
  OutputFormat format = OutputFormat::json;
  std::optional<std::string> out_path;
  FailThreshold fail_threshold = FailThreshold::never;
};

struct PipelineResult {
  AnalysisReport report;
  ProcessModel process;
  DfdModel dfd;
  /// 0 when no constraint trace meets the fail threshold, 1 otherwise.
  /// Input and validation failures surface as exceptions (CLI exit 2).
  int exit_status = 0;
};

/// Executes the four analysis steps in order: business process analysis,
/// function mapping, technical analysis, human factor analysis.
PipelineResult run_pipeline(const RunConfig& config);

/// Reads a whole file; throws InputError when unreadable.
std::string read_file(const std::string& path);

}  // namespace xlayer
