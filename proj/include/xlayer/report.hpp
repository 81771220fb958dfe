#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlayer/dfd_model.hpp"
#include "xlayer/finding.hpp"
#include "xlayer/function_mapping.hpp"
#include "xlayer/human_factor.hpp"
#include "xlayer/process_model.hpp"
#include "xlayer/threat_analysis.hpp"

namespace xlayer {

inline constexpr const char* kToolName = "xlayer";
inline constexpr const char* kToolVersion = "0.1.0";

struct InputDigest {
  std::string path;
  std::string digest;

  friend bool operator==(const InputDigest&, const InputDigest&) = default;
};

struct ReportMetadata {
  std::string tool = kToolName;
  std::string version = kToolVersion;
  std::map<std::string, InputDigest> inputs;  // keyed by input kind
  std::string timestamp;  // RFC 3339 UTC; excluded from the canonical form

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

/// Aggregate result of the four analysis steps, in pipeline order.
struct AnalysisReport {
  ReportMetadata metadata;

  // step 1 — business process analysis
  ParticipantReport participants;
  std::vector<SecurityConstraint> constraints;
  InfrastructureHints infrastructure;
  CollaborationReport collaboration;
  std::vector<Finding> process_warnings;

  // step 2 — function mapping
  std::vector<Finding> coverage_findings;
  std::vector<std::string> mapping_assumptions;
  std::vector<ConstraintTrace> constraint_traces;

  // step 3 — technical analysis
  std::vector<BoundaryCrossing> boundary_crossings;
  std::vector<std::string> entry_point_ids;
  std::vector<Threat> threats;
  AttackSurfaceReport attack_surface;
  std::vector<Finding> dfd_warnings;

  // step 4 — human factor analysis
  std::vector<std::string> selected_task_ids;
  std::vector<Role> relevant_roles;
  RiskMatrix risk_matrix;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Report as JSON. Object keys are sorted, array order is the deterministic
/// order the sections were computed in; the four step sections form an array
/// so pipeline order stays observable.
nlohmann::json to_json(const AnalysisReport& report, bool include_timestamp = true);

AnalysisReport report_from_json(const nlohmann::json& doc);

/// Canonical byte form (sorted keys, stable order, 2-space indent).
std::string render_json(const AnalysisReport& report);

/// Digest over the canonical form with the timestamp stripped; equal for
/// identical inputs across runs.
std::string canonical_digest(const AnalysisReport& report);

/// Human-readable report; the risk matrix mirrors the
/// Role | B | S | I | V | T | Security risk | Solution column layout.
std::string render_markdown(const AnalysisReport& report);

/// DOT graph of the DFD: elements as nodes, flows as edges, boundaries as
/// clusters. Attribution-gap elements and entry points are styled distinctly.
std::string render_dot(const DfdModel& dfd,
                       const std::vector<ConstraintTrace>& traces,
                       const std::vector<Threat>& threats);

}  // namespace xlayer
