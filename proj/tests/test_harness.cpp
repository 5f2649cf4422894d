#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "etap/harness.hpp"

using namespace etap;

// Set by CMake to the repo checkout so tests find the shipped files.
#ifndef ETAP_SOURCE_DIR
#define ETAP_SOURCE_DIR "."
#endif

namespace {

const std::string kRulesDir = std::string(ETAP_SOURCE_DIR) + "/rules/";
const std::string kScenariosDir = std::string(ETAP_SOURCE_DIR) + "/scenarios/";

std::vector<std::string> result_lines(const std::string& transcript) {
  std::vector<std::string> out;
  std::istringstream in(transcript);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("result ", 0) == 0) out.push_back(line.substr(7));
  return out;
}

}  // namespace

TEST_CASE("rule config parses fields, predicate and payloads") {
  Rule r = parse_rule_config(
      "etap-rule v1\n"
      "# comment line\n"
      "name T\n"
      "field A string 10\n"
      "field B int\n"
      "field C bool\n"
      "field D string 4 optional\n"
      "\n"
      "predicate x[B] > 5 & ! x[C]\n"
      "payload x[A].truncate(3)\n"
      "payload x[D].default(\"none\")\n"
      "tau 30\n"
      "batch 8\n");
  CHECK(r.name == "T");
  REQUIRE(r.schema.fields.size() == 4);
  CHECK(r.schema.fields[0].byte_len == 10);
  CHECK(r.schema.fields[3].optional);
  CHECK(r.tau_seconds == 30);
  CHECK(r.batch == 8);
  REQUIRE(r.predicate);
  REQUIRE(r.payload.size() == 2);
  compile_rule(r);  // must typecheck
}

TEST_CASE("rule config errors name the problem") {
  auto bad = [](const std::string& text) {
    CHECK_THROWS_AS(parse_rule_config(text), ConfigError);
  };
  bad("not-a-header\nname T\n");
  bad("etap-rule v1\nfield A string 10\n");            // no name
  bad("etap-rule v1\nname T\n");                       // no fields
  bad("etap-rule v1\nname T\nfield A string\n");       // missing length
  bad("etap-rule v1\nname T\nfield A string 0\n");     // zero length
  bad("etap-rule v1\nname T\nfield A float\n");        // unknown kind
  bad("etap-rule v1\nname T\nfield A int\nfield A int\n");  // duplicate
  bad("etap-rule v1\nname T\nfield A int\nbogus 1\n");
  bad("etap-rule v1\nname T\nfield A int\ntau many\n");
  bad("etap-rule v1\nname T\nfield A int\nbatch 0\n");
  bad("etap-rule v1\nname T\nfield A int\npredicate x[A] > 1\npredicate x[A] > 2\n");
  CHECK_THROWS_AS(parse_rule_config("etap-rule v1\nname T\nfield A int\n"
                                    "predicate x[A] >\n"),
                  ExprError);
  CHECK_THROWS_AS(load_rule_file("/nonexistent/x.rule"), ConfigError);
}

TEST_CASE("all shipped rules load and compile") {
  for (const char* n : {"R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9",
                        "R10"}) {
    CAPTURE(n);
    Rule r = load_rule_file(kRulesDir + n + ".rule");
    CHECK(r.name == n);
    CompiledRule cr = compile_rule(r);
    CHECK(cr.circuit.outputs.size() >= 1);
  }
}

TEST_CASE("scenario parser validates event references") {
  Scenario sc = parse_scenario(
      "etap-scenario v1\n"
      "trigger A=\"hi there\" B=7 C=true D=null payload=\"p1\"\n"
      "fake_trigger\n"
      "replay 1\n"
      "tamper 2 j 0\n"
      "advance_clock 61\n");
  REQUIRE(sc.events.size() == 5);
  CHECK(sc.events[0].data.at("A").s == Bytes({'h', 'i', ' ', 't', 'h', 'e',
                                              'r', 'e'}));
  CHECK(sc.events[0].data.at("B").i == 7);
  CHECK(sc.events[0].data.at("C").b);
  CHECK(!sc.events[0].data.at("D").present);
  CHECK(sc.events[0].payload == Bytes({'p', '1'}));
  CHECK(sc.events[3].target == "j");
  CHECK(sc.events[4].seconds == 61);

  auto bad = [](const std::string& text) {
    CHECK_THROWS_AS(parse_scenario(std::string("etap-scenario v1\n") + text),
                    ConfigError);
  };
  bad("replay 1\n");                      // forward reference
  bad("trigger A=1\nreplay 3\n");         // out of range
  bad("advance_clock 5\nreplay 1\n");     // not a trigger event
  bad("trigger A=1\ntamper 1 j\n");       // missing bit
  bad("trigger noequals\n");
  bad("trigger A=\"unclosed\n");
  bad("bogus_event\n");
  CHECK_THROWS_AS(parse_scenario("wrong header\n"), ConfigError);
}

TEST_CASE("demo scenario end to end") {
  Rule r = load_rule_file(kRulesDir + "R1.rule");
  Scenario sc = load_scenario_file(kScenariosDir + "demo.scenario");
  ScenarioResult res = run_scenario(r, sc, 42);
  CHECK(res.fired == 2);      // two non-reply posts
  CHECK(res.not_fired == 1);  // the @-reply
  // Cover traffic either reaches AS (Reject) or reuses a consumed id and
  // is dropped by TAP; never Fired either way.
  CHECK(res.rejected + res.dropped == 1);
}

TEST_CASE("20-event replay and freshness scenario") {
  Rule r = load_rule_file(kRulesDir + "R2.rule");
  Scenario sc = load_scenario_file(kScenariosDir + "replay_freshness.scenario");
  REQUIRE(sc.events.size() == 20);
  ScenarioResult res = run_scenario(r, sc, 7);

  auto rl = result_lines(res.transcript);
  REQUIRE(rl.size() == 17);  // three advance_clock events produce no result
  auto is = [&](size_t i, const std::string& prefix) {
    CAPTURE(i);
    CAPTURE(rl[i]);
    CHECK(rl[i].rfind(prefix, 0) == 0);
  };
  is(0, "Fired");      // trigger 6000
  is(1, "NotFired");   // trigger 100
  is(2, "Fired");      // replay of true outcome within tau
  is(3, "NotFired");   // replay of false outcome
  is(4, "Reject");     // true replay past tau
  is(5, "NotFired");   // false replay past tau still NotFired, never Fired
  is(6, "Fired");      // fresh trigger 7500
  CHECK((rl[7].rfind("Reject", 0) == 0 ||
         rl[7].rfind("Dropped", 0) == 0));  // cover traffic, never Fired
  is(8, "Reject");     // tampered output label
  is(9, "Reject");     // tampered predicate label
  is(10, "Reject");    // tampered payload ciphertext
  is(11, "Reject");    // tampered s_tilde
  is(12, "Reject");    // tampered j
  is(13, "Reject");    // tampered h_tilde on a false-outcome message
  is(14, "Fired");     // replay of event 8 still within tau
  is(15, "NotFired");  // trigger 4000
  is(16, "NotFired");  // false replay long past tau

  // Never a Fired out of any tamper, stale or cover case.
  CHECK(res.fired == 4);
  CHECK(res.not_fired == 5);
  CHECK(res.rejected + res.dropped == 8);
}

TEST_CASE("scenario transcripts are deterministic per seed") {
  Rule r = load_rule_file(kRulesDir + "R2.rule");
  Scenario sc = load_scenario_file(kScenariosDir + "replay_freshness.scenario");
  ScenarioResult a = run_scenario(r, sc, 99);
  ScenarioResult b = run_scenario(r, sc, 99);
  CHECK(a.transcript == b.transcript);
  ScenarioResult c = run_scenario(r, sc, 100);
  CHECK(a.transcript != c.transcript);
  // Same verdicts regardless of seed.
  CHECK(result_lines(a.transcript).size() ==
        result_lines(c.transcript).size());
}

TEST_CASE("tamper helper rejects unknown targets") {
  ActionMsg m;
  m.Y.resize(3);
  CHECK_THROWS_AS(apply_tamper(m, "nonsense", 0), ConfigError);
  apply_tamper(m, "j", 0);
  CHECK(m.j == 1u);
}
