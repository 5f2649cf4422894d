#include <sstream>

#include "etap/harness.hpp"

namespace etap {

std::string hex(std::span<const uint8_t> b) {
  static const char* d = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (uint8_t c : b) {
    out.push_back(d[c >> 4]);
    out.push_back(d[c & 0xf]);
  }
  return out;
}

Simulator::Simulator(Rule rule, uint64_t seed, uint32_t pregen)
    : rule_(std::move(rule)), cr_(compile_rule(rule_)), rng_(seed) {
  keys_.k_T = rng_.key();
  keys_.k_A = rng_.key();
  ts_.k_T = keys_.k_T;
  ensure_bundles(pregen);
}

void Simulator::ensure_bundles(uint32_t count) {
  while (keys_.next_j < count) {
    GarbledBundle b = ckt_garbling(cr_, keys_, rng_);
    ts_.issued.push_back(b.j);
    if (!store_.add(rule_.name, std::move(b)))
      throw std::runtime_error("bundle store refused a fresh bundle");
  }
}

Simulator::Step Simulator::deliver(TriggerMsg tm) {
  Step st;
  st.trigger = std::move(tm);
  auto am = tap_exec(cr_.circuit, st.trigger, store_, rule_.name);
  if (!am) return st;
  st.delivered = true;
  st.action = std::move(*am);
  st.result = as_exec(st.action, keys_.k_A, rule_.tau_seconds, now_);
  return st;
}

Simulator::Step Simulator::run_trigger(const TriggerData& data,
                                       const Bytes& payload) {
  // Keep at least one spare id so TS always has an unused one.
  uint32_t need = uint32_t(ts_.used.size()) + 1;
  if (keys_.next_j < need) ensure_bundles(need);
  auto bits = serialize_trigger_bits(rule_.schema, data);
  return deliver(ts_exec(ts_, bits, payload, now_, rng_));
}

Simulator::Step Simulator::run_fake() {
  if (ts_.issued.empty()) ensure_bundles(1);
  return deliver(ts_exec_fake(ts_, cr_.circuit.n_trigger_bits, 8, now_, rng_));
}

Simulator::Step Simulator::run_replay(const ActionMsg& msg) {
  Step st;
  st.delivered = true;
  st.action = msg;
  st.result = as_exec(msg, keys_.k_A, rule_.tau_seconds, now_);
  return st;
}

void apply_tamper(ActionMsg& msg, const std::string& target, uint32_t bit) {
  auto flip = [bit](std::span<uint8_t> bytes) {
    if (bytes.empty()) throw ConfigError("tamper target is empty");
    size_t i = (bit / 8) % bytes.size();
    bytes[i] ^= uint8_t(0x80 >> (bit % 8));
  };
  if (target == "predicate_label") {
    flip(msg.Y.at(0).bytes);
  } else if (target == "output_label") {
    if (msg.Y.size() < 2) throw ConfigError("no output labels to tamper");
    flip(msg.Y[1 + bit / 128 % (msg.Y.size() - 1)].bytes);
  } else if (target == "payload_ct") {
    flip(msg.ct.body);
  } else if (target == "s_tilde") {
    flip(msg.d.s_tilde.body);
  } else if (target == "h_tilde") {
    flip(msg.d.h_tilde);
  } else if (target == "j") {
    msg.j ^= 1u << (bit % 32);
  } else {
    throw ConfigError("unknown tamper target '" + target + "'");
  }
}

ScenarioResult run_scenario(const Rule& rule, const Scenario& sc,
                            uint64_t seed) {
  Simulator sim(rule, seed);
  ScenarioResult res;
  std::ostringstream out;
  // Action messages indexed by 1-based event number.
  std::vector<std::optional<ActionMsg>> produced;

  auto record = [&](size_t ev_no, const char* kind, const Simulator::Step& st,
                    bool has_trigger) {
    out << "event " << ev_no << " " << kind << " t=" << sim.now() << "\n";
    if (has_trigger)
      out << "msg trigger " << hex(serialize_trigger_msg(st.trigger)) << "\n";
    if (!st.delivered) {
      out << "result Dropped\n";
      ++res.dropped;
      return;
    }
    out << "msg action " << hex(serialize_action_msg(st.action)) << "\n";
    switch (st.result.status) {
      case AsStatus::Fired:
        ++res.fired;
        out << "result Fired y=" << hex(st.result.y)
            << " v=" << hex(st.result.v) << "\n";
        break;
      case AsStatus::NotFired:
        ++res.not_fired;
        out << "result NotFired\n";
        break;
      case AsStatus::Reject:
        ++res.rejected;
        out << "result Reject cause=" << int(st.result.cause) << "\n";
        break;
    }
  };

  for (size_t i = 0; i < sc.events.size(); ++i) {
    const ScenarioEvent& ev = sc.events[i];
    produced.emplace_back();
    switch (ev.kind) {
      case ScenarioEvent::Trigger: {
        Simulator::Step st = sim.run_trigger(ev.data, ev.payload);
        if (st.delivered) produced.back() = st.action;
        record(i + 1, "trigger", st, true);
        break;
      }
      case ScenarioEvent::FakeTrigger: {
        Simulator::Step st = sim.run_fake();
        if (st.delivered) produced.back() = st.action;
        record(i + 1, "fake_trigger", st, true);
        break;
      }
      case ScenarioEvent::Replay:
      case ScenarioEvent::Tamper: {
        const auto& src = produced.at(ev.index - 1);
        if (!src) throw ConfigError("referenced event produced no message");
        ActionMsg m = *src;
        if (ev.kind == ScenarioEvent::Tamper)
          apply_tamper(m, ev.target, ev.bit);
        record(i + 1, ev.kind == ScenarioEvent::Replay ? "replay" : "tamper",
               sim.run_replay(m), false);
        break;
      }
      case ScenarioEvent::AdvanceClock:
        sim.advance_clock(ev.seconds);
        out << "event " << i + 1 << " advance_clock t=" << sim.now() << "\n";
        break;
    }
  }
  res.transcript = out.str();
  return res;
}

}  // namespace etap
