#pragma once

#include <string>
#include <vector>

#include "etap/expr.hpp"
#include "etap/protocol.hpp"

namespace etap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rule config: versioned line format, magic header "etap-rule v1".
//   name R2
//   field FollowerCount int
//   field Text string 100 [optional]
//   predicate x[FollowerCount] > 5000
//   payload x[Text]
//   tau 60
//   batch 96
// '#' starts a comment. Grammar in docs/rule-format.md.
Rule parse_rule_config(const std::string& text);
Rule load_rule_file(const std::string& path);

// Scenario script: magic header "etap-scenario v1". Events in order:
//   trigger Field="str" Count=42 Flag=true Opt=null payload="bytes"
//   fake_trigger
//   replay <event-index>
//   tamper <event-index> <target> <bit>
//   advance_clock <seconds>
// tamper targets: predicate_label, output_label, payload_ct, s_tilde,
// h_tilde, j. Indices are 1-based over prior events that produced an
// action message.
struct ScenarioEvent {
  enum Kind { Trigger, FakeTrigger, Replay, Tamper, AdvanceClock } kind =
      Trigger;
  TriggerData data;
  Bytes payload;
  uint32_t index = 0;     // replay / tamper
  std::string target;     // tamper
  uint32_t bit = 0;       // tamper
  uint32_t seconds = 0;   // advance_clock
};

struct Scenario {
  std::vector<ScenarioEvent> events;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

// Four-party in-process simulation of one rule. Deterministic given the
// seed: the transcript is byte-identical across runs.
class Simulator {
 public:
  Simulator(Rule rule, uint64_t seed, uint32_t pregen = 0);

  struct Step {
    TriggerMsg trigger;
    ActionMsg action;
    bool delivered = false;  // TAP accepted the id
    AsResult result;
  };

  // Full TS -> TAP -> AS pipeline at the current clock.
  Step run_trigger(const TriggerData& data, const Bytes& payload);
  Step run_fake();
  // Re-deliver (optionally mutated) a previously produced action message.
  Step run_replay(const ActionMsg& msg);

  void ensure_bundles(uint32_t count);
  void advance_clock(uint32_t seconds) { now_ += uint64_t(seconds) * 1000; }
  uint64_t now() const { return now_; }

  const Rule& rule() const { return rule_; }
  const CompiledRule& compiled() const { return cr_; }
  const Key& k_A() const { return keys_.k_A; }
  const Key& k_T() const { return keys_.k_T; }

 private:
  Step deliver(TriggerMsg tm);

  Rule rule_;
  CompiledRule cr_;
  RuleKeys keys_;
  TsState ts_;
  TriggerStore store_;
  Rng rng_;
  uint64_t now_ = 1'700'000'000'000;  // arbitrary fixed epoch
};

struct ScenarioResult {
  std::string transcript;    // line-delimited, deterministic
  uint32_t fired = 0;
  uint32_t not_fired = 0;
  uint32_t rejected = 0;
  uint32_t dropped = 0;      // TAP refused (unknown or reused id)
};

ScenarioResult run_scenario(const Rule& rule, const Scenario& sc,
                            uint64_t seed);

// Mutates one field of an action message; used by scenarios and the attack
// suite. Unknown target throws.
void apply_tamper(ActionMsg& msg, const std::string& target, uint32_t bit);

std::string hex(std::span<const uint8_t> b);

}  // namespace etap
