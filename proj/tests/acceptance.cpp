// Acceptance suite: one scenario-level check per criterion, each printing a
// PASS/FAIL line. Returns nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "test_support.hpp"
#include "xlayer/errors.hpp"
#include "xlayer/pipeline.hpp"
#include "xlayer/report.hpp"

using namespace xlayer;
using testsupport::fixture_path;
using testsupport::rules_path;
using testsupport::run_command;
using testsupport::slurp;

namespace {

struct Check {
  std::ostringstream log;
  bool ok = true;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      log << "      expectation failed: " << what << "\n";
    }
  }
};

RunConfig scenario_config() {
  RunConfig config;
  config.bpmn_path = fixture_path("credit_card/process.bpmn");
  config.annotations_path = fixture_path("credit_card/constraints.json");
  config.dfd_path = fixture_path("credit_card/dfd.json");
  config.mapping_path = fixture_path("credit_card/mapping.json");
  config.roles_path = rules_path("roles.json");
  config.risk_rules_path = rules_path("risk_rules.json");
  config.threat_rules_path = rules_path("threat_rules.json");
  config.own_org = "bank";
  return config;
}

std::string cli_base() {
  return std::string(XLAYER_BIN) + " analyze" +
         " --bpmn " + fixture_path("credit_card/process.bpmn") +
         " --annotations " + fixture_path("credit_card/constraints.json") +
         " --dfd " + fixture_path("credit_card/dfd.json") +
         " --mapping " + fixture_path("credit_card/mapping.json") +
         " --own-org bank";
}

std::string with_rules(const std::string& command) {
  return "XLAYER_RULES_DIR=" + std::string(XLAYER_RULES_DIR) + " " + command;
}

// 1. Full pipeline on the bundled scenario reproduces the 19-row risk matrix
//    byte-exactly against the golden transcription, in under a second.
void criterion_risk_matrix(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  auto result = run_pipeline(scenario_config());
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  check.expect(elapsed < 1000, "pipeline runtime under 1 s (was " +
                                   std::to_string(elapsed) + " ms)");

  const auto& rows = result.report.risk_matrix.rows;
  check.expect(rows.size() == 19,
               "risk matrix has 19 rows (has " + std::to_string(rows.size()) + ")");

  auto golden = nlohmann::json::parse(slurp(fixture_path("golden/risk_matrix.json")));
  check.expect(golden.size() == rows.size(), "golden row count matches");
  for (size_t i = 0; i < rows.size() && i < golden.size(); ++i) {
    const auto& row = rows[i];
    const auto& expected = golden[i];
    check.expect(row.role_id == expected["role_id"].get<std::string>(),
                 "row " + std::to_string(i) + " role id");
    check.expect(row.role_name == expected["role_name"].get<std::string>(),
                 "row " + std::to_string(i) + " role name");
    check.expect(row.layers.names() == expected["layers"].get<std::vector<std::string>>(),
                 "row " + std::to_string(i) + " layer flags");
    check.expect(to_string(row.kind) == expected["kind"].get<std::string>(),
                 "row " + std::to_string(i) + " V/T flag");
    check.expect(row.risk_text == expected["risk"].get<std::string>(),
                 "row " + std::to_string(i) + " risk text (byte-exact)");
    check.expect(row.solution_text == expected["solution"].get<std::string>(),
                 "row " + std::to_string(i) + " solution text (byte-exact)");
  }
}

// 2. C1 and C2 trace to the BPM server with an attribution gap at the card
//    database; identity flips and enforcement removal change the status.
void criterion_constraint_traces(Check& check) {
  auto result = run_pipeline(scenario_config());
  const auto& traces = result.report.constraint_traces;
  for (const auto& id : {std::string("C1"), std::string("C2")}) {
    auto trace = std::find_if(traces.begin(), traces.end(),
                              [&](const ConstraintTrace& t) { return t.constraint_id == id; });
    if (trace == traces.end()) {
      check.expect(false, "trace for " + id + " present");
      continue;
    }
    check.expect(trace->enforcing_elements == std::vector<std::string>{"bpm_server"},
                 id + " enforced at the BPM server");
    check.expect(trace->status == TraceStatus::attribution_gap, id + " status attribution_gap");
    check.expect(trace->downstream_gap_elements == std::vector<std::string>{"card_db"},
                 id + " gap set is exactly the card database");
  }

  auto process = parse_process_model(slurp(fixture_path("credit_card/process.bpmn")),
                                     slurp(fixture_path("credit_card/constraints.json")));
  auto dfd = parse_dfd(slurp(fixture_path("credit_card/dfd.json")));
  auto mapping = load_mapping(slurp(fixture_path("credit_card/mapping.json")), process, dfd);

  auto doc = nlohmann::json::parse(slurp(fixture_path("credit_card/dfd.json")));
  for (auto& element : doc["elements"]) {
    if (element["id"] == "card_db") {
      element["identity_mode"] = "end_user";
      element.erase("acting_identity");
    }
  }
  auto end_user_dfd = parse_dfd(doc.dump());
  FunctionMapping without_enforcement = mapping;
  without_enforcement.enforcement_points.clear();

  for (size_t i = 0; i < 2; ++i) {
    const auto& constraint = process.constraints[i];
    check.expect(constraint.id == (i == 0 ? "C1" : "C2"), "fixture constraint order");
    auto flipped = trace_constraint_enforcement(constraint, mapping, end_user_dfd);
    check.expect(flipped.status == TraceStatus::fully_traced,
                 constraint.id + ": end_user card database yields fully_traced");
    auto unenforced = trace_constraint_enforcement(constraint, without_enforcement, dfd);
    check.expect(unenforced.status == TraceStatus::unenforced,
                 constraint.id + ": removing enforcement points yields unenforced");
  }
}

// 3. Business process extraction over the scenario model.
void criterion_business_analysis(Check& check) {
  auto result = run_pipeline(scenario_config());
  const auto& report = result.report;

  check.expect(report.participants.size() == 3, "3 pools");
  auto bank = std::find_if(report.participants.begin(), report.participants.end(),
                           [](const auto& entry) { return entry.pool_name == "bank"; });
  if (bank == report.participants.end()) {
    check.expect(false, "bank pool present");
  } else {
    check.expect(bank->roles == std::vector<std::string>{"credit card management",
                                                         "customer service"},
                 "bank roles are customer service and credit card management");
  }

  int sod = 0;
  int bod = 0;
  for (const auto& constraint : report.constraints) {
    if (constraint.kind == ConstraintKind::separation_of_duty) ++sod;
    if (constraint.kind == ConstraintKind::binding_of_duty) ++bod;
  }
  check.expect(sod == 1, "exactly one SoD constraint");
  check.expect(bod == 1, "exactly one BoD constraint");

  check.expect(report.infrastructure.data_stores.size() == 1, "one data store");
  if (!report.infrastructure.data_stores.empty()) {
    check.expect(report.infrastructure.data_stores[0].name == "card database",
                 "the data store is the card database");
  }

  check.expect(report.collaboration.collaboration, "collaboration flag set");
  check.expect(report.collaboration.partners ==
                   std::vector<std::string>{"client", "printing company"},
               "partners are the client and the printing company");
}

// 4. Threat enumeration equals the brute-force oracle and is monotone.
void criterion_threat_oracle(Check& check) {
  auto rules = parse_threat_rules(slurp(rules_path("threat_rules.json")));

  for (const auto& fixture : {std::string("credit_card/dfd.json"),
                              std::string("small/threezone.dfd.json"),
                              std::string("small/single_boundary.dfd.json")}) {
    auto dfd = parse_dfd(slurp(fixture_path(fixture)));
    check.expect(testsupport::subject_rule_pairs(enumerate_threats(dfd, rules)) ==
                     testsupport::oracle_subject_rule_pairs(dfd, rules),
                 "oracle equality on fixture " + fixture);
  }

  std::mt19937 rng(101);
  for (int i = 0; i < 100; ++i) {
    auto dfd = testsupport::random_dfd(rng, 20);
    if (testsupport::subject_rule_pairs(enumerate_threats(dfd, rules)) !=
        testsupport::oracle_subject_rule_pairs(dfd, rules)) {
      check.expect(false, "oracle equality on random DFD #" + std::to_string(i));
      return;
    }
  }

  std::mt19937 rng2(103);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < 200; ++i) {
    auto dfd = testsupport::random_dfd(rng2, 12);
    auto before = testsupport::subject_rule_pairs(enumerate_threats(dfd, rules));
    if (coin(rng2) || dfd.elements.empty()) {
      DfdElement extra;
      extra.id = "zz_added";
      extra.name = "Added";
      extra.kind = ElementKind::datastore;
      extra.identity_mode = IdentityMode::system;
      dfd.elements.push_back(extra);
    } else {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(dfd.elements.size()) - 1);
      dfd.flows.push_back({"zz_added_flow", dfd.elements[pick(rng2)].id,
                           dfd.elements[pick(rng2)].id, "added"});
    }
    validate(dfd);
    auto after = testsupport::subject_rule_pairs(enumerate_threats(dfd, rules));
    if (!std::includes(after.begin(), after.end(), before.begin(), before.end())) {
      check.expect(false, "monotonicity on random case #" + std::to_string(i));
      return;
    }
  }
}

// 5. Boundary and entry-point invariants on random DFDs.
void criterion_boundary_invariants(Check& check) {
  std::mt19937 rng(107);
  for (int i = 0; i < 200; ++i) {
    auto dfd = testsupport::random_dfd(rng, 16);

    auto crossings = flows_crossing_boundaries(dfd);
    std::set<std::string> crossing_ids;
    std::set<std::string> crossing_targets;
    for (const auto& crossing : crossings) {
      crossing_ids.insert(crossing.flow.id);
      crossing_targets.insert(crossing.flow.target);
    }
    size_t non_crossing = 0;
    for (const auto& flow : dfd.flows) {
      if (!crossing_ids.count(flow.id)) ++non_crossing;
    }
    if (crossing_ids.size() + non_crossing != dfd.flows.size()) {
      check.expect(false, "crossing/non-crossing partition on case #" + std::to_string(i));
      return;
    }
    for (const auto& element : find_entry_points(dfd)) {
      if (!crossing_targets.count(element.id)) {
        check.expect(false, "entry point outside crossing targets on case #" + std::to_string(i));
        return;
      }
    }

    // collapse: everything into a single boundary
    dfd.boundaries.clear();
    TrustBoundary all{"zz_single", "Single", 1, {}};
    for (const auto& element : dfd.elements) all.member_ids.push_back(element.id);
    dfd.boundaries.push_back(all);
    validate(dfd);
    if (!flows_crossing_boundaries(dfd).empty() || !find_entry_points(dfd).empty()) {
      check.expect(false, "single-boundary collapse leaves crossings on case #" +
                              std::to_string(i));
      return;
    }
  }
}

// 6. Byte-identical canonical JSON across runs (timestamp excluded).
void criterion_determinism(Check& check) {
  auto first = run_pipeline(scenario_config());
  auto second = run_pipeline(scenario_config());
  check.expect(to_json(first.report, false).dump() == to_json(second.report, false).dump(),
               "canonical JSON bytes identical across runs");
  check.expect(canonical_digest(first.report) == canonical_digest(second.report),
               "canonical digests identical across runs");

  auto cli_first = run_command(with_rules(cli_base()));
  auto cli_second = run_command(with_rules(cli_base()));
  check.expect(cli_first.exit_code == 0 && cli_second.exit_code == 0, "CLI runs succeed");
  auto strip = [](const std::string& text) {
    auto doc = nlohmann::json::parse(text);
    doc["metadata"].erase("timestamp");
    return doc.dump();
  };
  check.expect(strip(cli_first.stdout_text) == strip(cli_second.stdout_text),
               "CLI reports byte-identical after timestamp removal");
}

// 7. Validation failures exit 2 and name the offending id.
void criterion_validation_errors(Check& check) {
  auto contradiction = run_command(with_rules(
      std::string(XLAYER_BIN) + " analyze" +
      " --bpmn " + fixture_path("credit_card/process.bpmn") +
      " --annotations " + fixture_path("invalid/contradiction.constraints.json") +
      " --dfd " + fixture_path("credit_card/dfd.json") +
      " --mapping " + fixture_path("credit_card/mapping.json")));
  check.expect(contradiction.exit_code == 2, "contradictory SoD+BoD exits 2");
  check.expect(contradiction.stderr_text.find("CheckCreditCardStatus") != std::string::npos &&
                   contradiction.stderr_text.find("BlockPreviousCreditCard") != std::string::npos,
               "contradiction diagnostic names the task pair");

  auto dangling = run_command(with_rules(
      std::string(XLAYER_BIN) + " analyze" +
      " --bpmn " + fixture_path("invalid/dangling.bpmn") +
      " --dfd " + fixture_path("credit_card/dfd.json") +
      " --mapping " + fixture_path("credit_card/mapping.json")));
  check.expect(dangling.exit_code == 2, "dangling id exits 2");
  check.expect(dangling.stderr_text.find("ghost_task") != std::string::npos,
               "dangling diagnostic names the missing id");

  auto overlap = run_command(with_rules(
      std::string(XLAYER_BIN) + " analyze" +
      " --bpmn " + fixture_path("credit_card/process.bpmn") +
      " --annotations " + fixture_path("credit_card/constraints.json") +
      " --dfd " + fixture_path("invalid/overlap.dfd.json") +
      " --mapping " + fixture_path("credit_card/mapping.json")));
  check.expect(overlap.exit_code == 2, "overlapping boundaries exit 2");
  check.expect(overlap.stderr_text.find("shared_element") != std::string::npos,
               "overlap diagnostic names the element");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Check&)> body;
  };
  const std::vector<Criterion> criteria = {
      {"1. risk matrix reproduction (19 rows, byte-exact, < 1 s)", criterion_risk_matrix},
      {"2. constraint traces: enforcement, attribution gap, flips", criterion_constraint_traces},
      {"3. business process analysis of the scenario model", criterion_business_analysis},
      {"4. threat enumeration equals oracle and is monotone", criterion_threat_oracle},
      {"5. boundary crossing / entry point invariants", criterion_boundary_invariants},
      {"6. deterministic canonical report output", criterion_determinism},
      {"7. validation errors exit 2 naming offending ids", criterion_validation_errors},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Check check;
    try {
      criterion.body(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.log << "      threw: " << e.what() << "\n";
    }
    std::cout << (check.ok ? "PASS" : "FAIL") << "  " << criterion.name << "\n";
    if (!check.ok) {
      std::cout << check.log.str();
      ++failures;
    }
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
