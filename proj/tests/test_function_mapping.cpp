#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "test_support.hpp"
#include "xlayer/errors.hpp"
#include "xlayer/function_mapping.hpp"

using namespace xlayer;
using testsupport::fixture_path;
using testsupport::slurp;

namespace {

struct Scenario {
  ProcessModel process;
  DfdModel dfd;
  FunctionMapping mapping;
};

Scenario credit_card_scenario() {
  Scenario s;
  s.process = parse_process_model(slurp(fixture_path("credit_card/process.bpmn")),
                                  slurp(fixture_path("credit_card/constraints.json")));
  s.dfd = parse_dfd(slurp(fixture_path("credit_card/dfd.json")));
  s.mapping = load_mapping(slurp(fixture_path("credit_card/mapping.json")), s.process, s.dfd);
  return s;
}

const SecurityConstraint& constraint_by_id(const ProcessModel& process, const std::string& id) {
  for (const auto& constraint : process.constraints) {
    if (constraint.id == id) return constraint;
  }
  throw std::runtime_error("no such constraint in fixture: " + id);
}

// Small hand-built scenario: enforcer -> middle (system identity) -> sink.
Scenario chain_scenario(IdentityMode sink_identity) {
  Scenario s;
  s.process.id = "chain";
  Pool pool{"pool_chain", "chain org", {}, {}, {}, {}};
  pool.tasks.push_back({"step", "Step", TaskKind::manual, "", true});
  pool.tasks.push_back({"other", "Other", TaskKind::manual, "", false});
  s.process.pools.push_back(pool);
  SecurityConstraint constraint;
  constraint.id = "K1";
  constraint.kind = ConstraintKind::binding_of_duty;
  constraint.task_ids = {"step", "other"};
  s.process.constraints.push_back(constraint);
  validate(s.process);

  s.dfd.elements.push_back({"enforcer", "Enforcer", ElementKind::process, IdentityMode::end_user, ""});
  s.dfd.elements.push_back({"middle", "Middle", ElementKind::process, IdentityMode::system, "Svc"});
  s.dfd.elements.push_back({"sink", "Sink", ElementKind::datastore, sink_identity,
                            sink_identity == IdentityMode::system ? "Svc" : ""});
  s.dfd.flows.push_back({"f1", "enforcer", "middle", "calls"});
  s.dfd.flows.push_back({"f2", "middle", "sink", "writes"});
  validate(s.dfd);

  s.mapping.task_bindings["step"] = {"enforcer", "middle", "sink"};
  s.mapping.enforcement_points["K1"] = {{"enforcer", Layer::implementation}};
  return s;
}

}  // namespace

TEST_CASE("the credit card mapping binds the blockage task to four components") {
  auto s = credit_card_scenario();
  auto it = s.mapping.task_bindings.find("BlockPreviousCreditCard");
  REQUIRE(it != s.mapping.task_bindings.end());
  CHECK(it->second == std::vector<std::string>{"auth_server", "bpm_server", "card_db",
                                               "web_server"});
}

TEST_CASE("empty mapping over empty models loads") {
  auto process = parse_process_model(slurp(fixture_path("small/empty.bpmn")));
  auto dfd = parse_dfd(R"({"elements":[],"flows":[],"boundaries":[]})");
  auto mapping = load_mapping("{}", process, dfd);
  CHECK(mapping.task_bindings.empty());
  CHECK(mapping.enforcement_points.empty());
}

TEST_CASE("mapping referencing a ghost task is rejected with its id") {
  auto s = credit_card_scenario();
  CHECK_THROWS_WITH_AS(
      load_mapping(R"({"task_bindings": {"GhostTask": ["web_server"]}})", s.process, s.dfd),
      doctest::Contains("GhostTask"), ValidationError);
}

TEST_CASE("mapping referencing a ghost element is rejected with its id") {
  auto s = credit_card_scenario();
  CHECK_THROWS_WITH_AS(
      load_mapping(R"({"task_bindings": {"BlockPreviousCreditCard": ["ghost_element"]}})",
                   s.process, s.dfd),
      doctest::Contains("ghost_element"), ValidationError);
}

TEST_CASE("enforcement points cannot sit at the business layer") {
  auto s = credit_card_scenario();
  CHECK_THROWS_AS(
      load_mapping(R"({"enforcement_points": {"C1": [{"element": "bpm_server",
                                                      "layer": "business"}]}})",
                   s.process, s.dfd),
      ValidationError);
}

TEST_CASE("coverage is clean when every critical task is bound") {
  auto s = credit_card_scenario();
  CHECK(check_mapping_coverage(s.process, s.mapping).empty());
}

TEST_CASE("an unbound critical task yields exactly one finding naming it") {
  auto s = credit_card_scenario();
  s.mapping.task_bindings.erase("BlockPreviousCreditCard");
  auto findings = check_mapping_coverage(s.process, s.mapping);
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].subjects == std::vector<std::string>{"BlockPreviousCreditCard"});
  CHECK(findings[0].kind == FindingKind::vulnerability);
  CHECK(findings[0].layers == LayerFlags::only(Layer::design));
}

TEST_CASE("three critical tasks with one unbound yield exactly one finding") {
  Scenario s;
  s.process.id = "many";
  Pool pool{"pool_many", "org", {}, {}, {}, {}};
  pool.tasks.push_back({"alpha", "Alpha", TaskKind::manual, "", true});
  pool.tasks.push_back({"beta", "Beta", TaskKind::manual, "", true});
  pool.tasks.push_back({"gamma", "Gamma", TaskKind::manual, "", true});
  s.process.pools.push_back(pool);
  validate(s.process);
  s.dfd.elements.push_back({"component", "Component", ElementKind::process,
                            IdentityMode::system, "Svc"});
  validate(s.dfd);
  s.mapping.task_bindings["alpha"] = {"component"};
  s.mapping.task_bindings["beta"] = {"component"};
  auto findings = check_mapping_coverage(s.process, s.mapping);
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].subjects == std::vector<std::string>{"gamma"});
}

TEST_CASE("binding to an empty element list counts as unbound") {
  auto s = credit_card_scenario();
  s.mapping.task_bindings["BlockPreviousCreditCard"] = {};
  CHECK(check_mapping_coverage(s.process, s.mapping).size() == 1);
}

TEST_CASE("tracing the BoD constraint finds the attribution gap at the card database") {
  auto s = credit_card_scenario();
  auto trace = trace_constraint_enforcement(constraint_by_id(s.process, "C2"), s.mapping, s.dfd);
  CHECK(trace.status == TraceStatus::attribution_gap);
  CHECK(trace.enforcing_elements == std::vector<std::string>{"bpm_server"});
  CHECK(trace.downstream_gap_elements == std::vector<std::string>{"card_db"});
}

TEST_CASE("an end-user card database closes the gap") {
  auto s = credit_card_scenario();
  auto doc = nlohmann::json::parse(slurp(fixture_path("credit_card/dfd.json")));
  for (auto& element : doc["elements"]) {
    if (element["id"] == "card_db") {
      element["identity_mode"] = "end_user";
      element.erase("acting_identity");
    }
  }
  auto dfd = parse_dfd(doc.dump());
  auto trace = trace_constraint_enforcement(constraint_by_id(s.process, "C2"), s.mapping, dfd);
  CHECK(trace.status == TraceStatus::fully_traced);
  CHECK(trace.downstream_gap_elements.empty());
}

TEST_CASE("a constraint without enforcement points is unenforced") {
  auto s = credit_card_scenario();
  auto trace = trace_constraint_enforcement(constraint_by_id(s.process, "C3"), s.mapping, s.dfd);
  CHECK(trace.status == TraceStatus::unenforced);
  CHECK(trace.enforcing_elements.empty());
  CHECK(trace.downstream_gap_elements.empty());
}

TEST_CASE("chain: only the system-identity middle element gaps") {
  auto s = chain_scenario(IdentityMode::end_user);
  auto trace = trace_constraint_enforcement(s.process.constraints[0], s.mapping, s.dfd);
  CHECK(trace.status == TraceStatus::attribution_gap);
  CHECK(trace.downstream_gap_elements == std::vector<std::string>{"middle"});
}

TEST_CASE("chain: a system-identity sink gaps too") {
  auto s = chain_scenario(IdentityMode::system);
  auto trace = trace_constraint_enforcement(s.process.constraints[0], s.mapping, s.dfd);
  CHECK(trace.downstream_gap_elements == std::vector<std::string>{"middle", "sink"});
}

TEST_CASE("unbound downstream elements never gap") {
  auto s = chain_scenario(IdentityMode::system);
  s.mapping.task_bindings["step"] = {"enforcer"};  // nothing downstream is bound
  auto trace = trace_constraint_enforcement(s.process.constraints[0], s.mapping, s.dfd);
  CHECK(trace.status == TraceStatus::fully_traced);
}

// --- properties ------------------------------------------------------------

TEST_CASE("property: status always matches the enforcing/gap definition") {
  std::mt19937 rng(31);
  auto s = credit_card_scenario();
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < 200; ++i) {
    FunctionMapping mapping;
    for (const auto& element : s.dfd.elements) {
      if (coin(rng)) {
        mapping.task_bindings["BlockPreviousCreditCard"].push_back(element.id);
      }
    }
    if (coin(rng)) {
      mapping.enforcement_points["C2"] = {{"bpm_server", Layer::implementation}};
    }
    auto trace = trace_constraint_enforcement(constraint_by_id(s.process, "C2"), mapping, s.dfd);
    if (trace.enforcing_elements.empty()) {
      CHECK(trace.status == TraceStatus::unenforced);
      CHECK(trace.downstream_gap_elements.empty());
    } else if (trace.downstream_gap_elements.empty()) {
      CHECK(trace.status == TraceStatus::fully_traced);
    } else {
      CHECK(trace.status == TraceStatus::attribution_gap);
    }
    // gap and enforcing sets never intersect
    for (const auto& gap : trace.downstream_gap_elements) {
      CHECK(std::find(trace.enforcing_elements.begin(), trace.enforcing_elements.end(), gap) ==
            trace.enforcing_elements.end());
    }
  }
}

TEST_CASE("property: adding an enforcement point never unenforces a traced constraint") {
  auto s = chain_scenario(IdentityMode::end_user);
  auto before = trace_constraint_enforcement(s.process.constraints[0], s.mapping, s.dfd);
  s.mapping.enforcement_points["K1"].push_back({"middle", Layer::design});
  auto after = trace_constraint_enforcement(s.process.constraints[0], s.mapping, s.dfd);
  CHECK(before.status != TraceStatus::unenforced);
  CHECK(after.status != TraceStatus::unenforced);
}

TEST_CASE("property: without data flows there are no gaps") {
  auto s = chain_scenario(IdentityMode::system);
  s.dfd.flows.clear();
  validate(s.dfd);
  auto trace = trace_constraint_enforcement(s.process.constraints[0], s.mapping, s.dfd);
  CHECK(trace.status == TraceStatus::fully_traced);
  CHECK(trace.downstream_gap_elements.empty());
}
