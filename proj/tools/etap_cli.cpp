// etap command line front end.
//
// Exit codes:
//   0  success
//   2  file not found / unknown rule
//   3  malformed config, scenario or trigger data
//   4  schema mismatch between data and rule
//   5  attack suite found an accepted forgery
//   6  transport failure

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "etap/harness.hpp"
#include "json.hpp"

using namespace etap;
using nlohmann::json;

namespace {

constexpr int kExitFile = 2;
constexpr int kExitParse = 3;
constexpr int kExitSchema = 4;
constexpr int kExitForgery = 5;
constexpr int kExitTransport = 6;

struct Options {
  uint64_t seed = 1;
  uint32_t tau = 0;  // 0 = keep the rule file's value
  std::string transport = "inproc";
  std::string out_dir;
  bool json_out = false;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

Rule load_rule_or_exit(const std::string& path, const Options& opt) {
  try {
    Rule r = load_rule_file(path);
    if (opt.tau) r.tau_seconds = opt.tau;
    return r;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(std::string(e.what()).find("cannot open") != std::string::npos
                  ? kExitFile
                  : kExitParse);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitParse);
  }
}

void emit(const json& j, const std::string& human, const Options& opt) {
  if (opt.json_out)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << human;
}

// Parses a trigger data file: Field=value tokens, one or more per line,
// plus an optional payload="...". Reuses the scenario event syntax.
std::pair<TriggerData, Bytes> load_trigger_data(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(kExitFile);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::string script = "etap-scenario v1\ntrigger ";
  for (char c : text) script.push_back(c == '\n' ? ' ' : c);
  script.push_back('\n');
  Scenario sc = parse_scenario(script);
  return {sc.events.at(0).data, sc.events.at(0).payload};
}

// ---- framed TCP transport ------------------------------------------------
// One length-prefixed frame per message. The "TAP server" thread parses the
// trigger message off the socket, evaluates, and writes the action message
// back, so the exact wire format crosses a real socket.

bool send_frame(int fd, const Bytes& b) {
  Bytes framed;
  put_be32(framed, uint32_t(b.size()));
  framed.insert(framed.end(), b.begin(), b.end());
  size_t off = 0;
  while (off < framed.size()) {
    ssize_t n = ::write(fd, framed.data() + off, framed.size() - off);
    if (n <= 0) return false;
    off += size_t(n);
  }
  return true;
}

bool recv_exact(int fd, uint8_t* out, size_t n) {
  size_t off = 0;
  while (off < n) {
    ssize_t r = ::read(fd, out + off, n - off);
    if (r <= 0) return false;
    off += size_t(r);
  }
  return true;
}

std::optional<Bytes> recv_frame(int fd) {
  uint8_t len[4];
  if (!recv_exact(fd, len, 4)) return std::nullopt;
  Bytes b(get_be32(len));
  if (!b.empty() && !recv_exact(fd, b.data(), b.size())) return std::nullopt;
  return b;
}

// Runs one trigger through a loopback socket pair. Returns the action
// message as the AS side would receive it.
std::optional<ActionMsg> tcp_round_trip(const Circuit& topology,
                                        const TriggerMsg& tm,
                                        TriggerStore& store,
                                        const std::string& rid) {
  int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) return std::nullopt;
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(lfd, 1) < 0) {
    ::close(lfd);
    return std::nullopt;
  }
  socklen_t alen = sizeof addr;
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &alen);

  std::optional<ActionMsg> result;
  std::thread server([&] {
    int cfd = ::accept(lfd, nullptr, nullptr);
    if (cfd < 0) return;
    if (auto frame = recv_frame(cfd)) {
      if (auto msg = parse_trigger_msg(*frame)) {
        if (auto am = tap_exec(topology, *msg, store, rid))
          send_frame(cfd, serialize_action_msg(*am));
      }
    }
    ::close(cfd);
  });

  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  bool ok = fd >= 0 &&
            ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0 &&
            send_frame(fd, serialize_trigger_msg(tm));
  if (ok) {
    if (auto frame = recv_frame(fd))
      if (auto am = parse_action_msg(*frame)) result = *am;
  }
  if (fd >= 0) ::close(fd);
  server.join();
  ::close(lfd);
  return result;
}

// ---- commands ------------------------------------------------------------

int cmd_setup(const std::string& path, const Options& opt) {
  Rule r = load_rule_or_exit(path, opt);
  CompiledRule cr;
  try {
    cr = compile_rule(r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  auto st = cr.circuit.stats();
  Rng rng(opt.seed);
  RuleKeys keys{rng.key(), rng.key()};
  GarbledBundle b = ckt_garbling(cr, keys, rng);

  json j{{"rule", r.name},
         {"trigger_bits", cr.circuit.n_trigger_bits},
         {"const_bits", cr.circuit.n_const_bits},
         {"and_gates", st.and_count},
         {"xor_gates", st.xor_count},
         {"bundle_bytes", b.byte_size()},
         {"tau_seconds", r.tau_seconds},
         {"batch", r.batch}};
  std::ostringstream h;
  h << "rule " << r.name << ": " << cr.circuit.n_trigger_bits
    << " trigger bits, " << cr.circuit.n_const_bits << " constant bits, "
    << st.and_count << " AND gates, bundle " << b.byte_size() << " bytes, tau "
    << r.tau_seconds << "s, batch " << r.batch << "\n"
    << "keys generated and distributed to TS and AS (simulated channel)\n";
  emit(j, h.str(), opt);
  return 0;
}

int cmd_generate(const std::string& path, uint32_t count, const Options& opt) {
  Rule r = load_rule_or_exit(path, opt);
  CompiledRule cr = compile_rule(r);
  Rng rng(opt.seed);
  RuleKeys keys{rng.key(), rng.key()};

  auto t0 = std::chrono::steady_clock::now();
  size_t total = 0;
  std::ofstream out;
  if (!opt.out_dir.empty()) {
    out.open(opt.out_dir + "/" + r.name + ".bundles", std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write to " << opt.out_dir << "\n";
      return kExitFile;
    }
  }
  uint32_t first = keys.next_j;
  for (uint32_t i = 0; i < count; ++i) {
    GarbledBundle b = ckt_garbling(cr, keys, rng);
    Bytes wire = serialize_bundle(b);
    total += wire.size();
    if (out.is_open()) {
      Bytes framed;
      put_be32(framed, uint32_t(wire.size()));
      out.write(reinterpret_cast<const char*>(framed.data()), 4);
      out.write(reinterpret_cast<const char*>(wire.data()),
                std::streamsize(wire.size()));
    }
  }
  double ms = ms_since(t0);

  json j{{"rule", r.name},
         {"count", count},
         {"first_id", first},
         {"last_id", keys.next_j - 1},
         {"total_bytes", total},
         {"elapsed_ms", ms}};
  std::ostringstream h;
  h << "generated " << count << " bundles for " << r.name << " (ids " << first
    << ".." << keys.next_j - 1 << "), " << total << " bytes total, "
    << std::fixed << std::setprecision(1) << ms << " ms\n";
  emit(j, h.str(), opt);
  return 0;
}

int cmd_trigger(const std::string& rule_path, const std::string& data_path,
                const Options& opt) {
  Rule r = load_rule_or_exit(rule_path, opt);
  TriggerData data;
  Bytes payload;
  try {
    std::tie(data, payload) = load_trigger_data(data_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    Simulator sim(r, opt.seed, 1);
    Simulator::Step st;
    if (opt.transport == "tcp") {
      // Same pipeline, but TS -> TAP and TAP -> AS cross a real socket.
      CompiledRule cr = compile_rule(r);
      Rng rng(opt.seed);
      RuleKeys keys{rng.key(), rng.key()};
      GarbledBundle b = ckt_garbling(cr, keys, rng);
      TsState ts{keys.k_T, {b.j}, {}};
      TriggerStore store;
      store.add(r.name, b);
      auto bits = serialize_trigger_bits(r.schema, data);
      TriggerMsg tm = ts_exec(ts, bits, payload, 1'700'000'000'000, rng);
      auto am = tcp_round_trip(cr.circuit, tm, store, r.name);
      if (!am) {
        std::cerr << "error: transport failure\n";
        return kExitTransport;
      }
      st.delivered = true;
      st.action = *am;
      st.result = as_exec(*am, keys.k_A, r.tau_seconds, 1'700'000'000'000);
    } else {
      st = sim.run_trigger(data, payload);
    }

    json j{{"rule", r.name}, {"delivered", st.delivered}};
    std::ostringstream h;
    if (!st.delivered) {
      j["result"] = "Dropped";
      h << "Dropped\n";
    } else {
      switch (st.result.status) {
        case AsStatus::Fired:
          j["result"] = "Fired";
          j["y"] = hex(st.result.y);
          j["v"] = hex(st.result.v);
          h << "Fired\n  y = " << hex(st.result.y) << "\n  v = "
            << hex(st.result.v) << "\n";
          break;
        case AsStatus::NotFired:
          j["result"] = "NotFired";
          h << "NotFired\n";
          break;
        case AsStatus::Reject:
          j["result"] = "Reject";
          h << "Reject\n";
          break;
      }
    }
    emit(j, h.str(), opt);
    return 0;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  }
}

int cmd_scenario(const std::string& rule_path, const std::string& script_path,
                 const Options& opt) {
  Rule r = load_rule_or_exit(rule_path, opt);
  Scenario sc;
  try {
    sc = load_scenario_file(script_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::string(e.what()).find("cannot open") != std::string::npos
               ? kExitFile
               : kExitParse;
  }
  ScenarioResult res;
  try {
    res = run_scenario(r, sc, opt.seed);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  }
  if (!opt.out_dir.empty()) {
    std::ofstream out(opt.out_dir + "/transcript.txt", std::ios::binary);
    out << res.transcript;
  }
  json j{{"rule", r.name},
         {"events", sc.events.size()},
         {"fired", res.fired},
         {"not_fired", res.not_fired},
         {"rejected", res.rejected},
         {"dropped", res.dropped}};
  std::ostringstream h;
  h << res.transcript << "summary: fired=" << res.fired
    << " not_fired=" << res.not_fired << " rejected=" << res.rejected
    << " dropped=" << res.dropped << "\n";
  emit(j, h.str(), opt);
  return 0;
}

// Mutation corpus: every tamper target, several bit positions, against
// both true- and false-outcome honest messages. Any Fired is a forgery.
int cmd_attack(const std::string& rule_path, uint32_t per_target,
               const Options& opt) {
  Rule r = load_rule_or_exit(rule_path, opt);
  Simulator sim(r, opt.seed);

  // One honest true run and, when the rule has a predicate, one false run.
  std::vector<ActionMsg> honest;
  std::vector<bool> honest_true;
  Rng drng(opt.seed ^ 0x5eedf00d);
  for (int tries = 0; tries < 4000 && honest.size() < 6; ++tries) {
    TriggerData data;
    for (const auto& f : r.schema.fields) {
      FieldValue v;
      switch (f.kind) {
        case FieldKind::Bool: v.b = drng.uniform(2); break;
        case FieldKind::Int: v.i = int32_t(drng.uniform(10000)); break;
        case FieldKind::String: {
          v.s = drng.bytes(drng.uniform(f.byte_len + 1));
          for (auto& c : v.s) c = uint8_t('a' + c % 26);
          break;
        }
      }
      if (f.optional) v.present = drng.uniform(2);
      data[f.name] = v;
    }
    auto st = sim.run_trigger(data, {'p'});
    if (!st.delivered) continue;
    bool fired = st.result.status == AsStatus::Fired;
    bool want_true = honest.size() % 2 == 0;
    if (fired == want_true || tries > 3000) {
      honest.push_back(st.action);
      honest_true.push_back(fired);
    }
  }
  if (honest.empty()) {
    std::cerr << "error: could not produce honest runs\n";
    return kExitSchema;
  }

  const char* targets[] = {"predicate_label", "output_label", "payload_ct",
                           "s_tilde",         "h_tilde",      "j"};
  uint64_t cases = 0, forgeries = 0;
  for (size_t mi = 0; mi < honest.size(); ++mi) {
    const ActionMsg& msg = honest[mi];
    AsResult truth = as_exec(msg, sim.k_A(), r.tau_seconds, sim.now());
    for (const char* t : targets) {
      for (uint32_t b = 0; b < per_target; ++b) {
        ActionMsg m = msg;
        apply_tamper(m, t, b * 37 + uint32_t(mi));
        AsResult res = as_exec(m, sim.k_A(), r.tau_seconds, sim.now());
        ++cases;
        // Fired with exactly the honest outputs is not a forgery (e.g. a
        // tampered h_tilde is never consulted on the fired path); Fired
        // with anything else is.
        if (res.status == AsStatus::Fired &&
            !(honest_true[mi] && res.y == truth.y && res.v == truth.v))
          ++forgeries;
      }
    }
  }

  json j{{"rule", r.name}, {"cases", cases}, {"forgeries", forgeries}};
  std::ostringstream h;
  h << "attack-suite " << r.name << ": " << cases << " mutated messages, "
    << forgeries << " accepted forgeries\n";
  emit(j, h.str(), opt);
  return forgeries == 0 ? 0 : kExitForgery;
}

struct RuleBench {
  std::string name;
  double garble_ms = 0, encode_ms = 0, eval_ms = 0, decode_ms = 0;
  double plain_ms = 0;
  size_t bundle_bytes = 0;
  size_t trigger_bytes = 0, action_bytes = 0;
  double ref_kb = 0;  // 0 = no reference
  bool size_flag = false;
};

// Reference sizes (KB) for the shipped rule set.
double ref_kb_for(const std::string& name) {
  static const std::map<std::string, double> refs = {
      {"R1", 0.2},  {"R2", 1.0},   {"R3", 1.0},    {"R4", 5.8},
      {"R5", 9.0},  {"R6", 30.5},  {"R7", 92.4},   {"R8", 173.4},
      {"R9", 4668.9}, {"R10", 12.1}};
  auto it = refs.find(name);
  return it == refs.end() ? 0.0 : it->second;
}

RuleBench bench_rule(const Rule& r, const Options& opt) {
  CompiledRule cr = compile_rule(r);
  Rng rng(opt.seed);
  RuleKeys keys{rng.key(), rng.key()};

  TriggerData data;
  for (const auto& f : r.schema.fields) {
    FieldValue v;
    if (f.kind == FieldKind::Int) v.i = 6000;
    if (f.kind == FieldKind::String)
      v.s = Bytes(std::min<uint32_t>(f.byte_len, 8), 'a');
    data[f.name] = v;
  }
  auto bits = serialize_trigger_bits(r.schema, data);
  Bytes payload{'b', 'e', 'n', 'c', 'h'};

  RuleBench b;
  b.name = r.name;
  const int iters = 5;
  for (int i = -1; i < iters; ++i) {  // one warm-up pass
    RuleKeys k = keys;
    auto t0 = std::chrono::steady_clock::now();
    GarbledBundle bundle = ckt_garbling(cr, k, rng);
    double g = ms_since(t0);

    TsState ts{keys.k_T, {bundle.j}, {}};
    t0 = std::chrono::steady_clock::now();
    TriggerMsg tm = ts_exec(ts, bits, payload, 1'700'000'000'000, rng);
    double e = ms_since(t0);

    TriggerStore store;
    store.add(r.name, bundle);
    t0 = std::chrono::steady_clock::now();
    auto am = tap_exec(cr.circuit, tm, store, r.name);
    double ev = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    as_exec(*am, keys.k_A, r.tau_seconds, 1'700'000'000'000);
    double d = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    plain_eval(r, data);
    double p = ms_since(t0);

    if (i < 0) {
      b.bundle_bytes = serialize_bundle(bundle).size();
      b.trigger_bytes = serialize_trigger_msg(tm).size();
      b.action_bytes = serialize_action_msg(*am).size();
      continue;
    }
    b.garble_ms += g / iters;
    b.encode_ms += e / iters;
    b.eval_ms += ev / iters;
    b.decode_ms += d / iters;
    b.plain_ms += p / iters;
  }
  b.ref_kb = ref_kb_for(r.name);
  if (b.ref_kb > 0) {
    double kb = (16 + 32.0 * cr.circuit.stats().and_count) / 1024.0;
    b.size_flag = kb < b.ref_kb * 0.5 || kb > b.ref_kb * 1.5;
  }
  return b;
}

int cmd_bench(const std::vector<std::string>& rule_paths, bool plain_only,
              const Options& opt) {
  json out = json::array();
  std::ostringstream h;
  h << std::fixed << std::setprecision(2);
  for (const auto& p : rule_paths) {
    Rule r = load_rule_or_exit(p, opt);
    RuleBench b = bench_rule(r, opt);
    if (plain_only) {
      out.push_back({{"rule", b.name}, {"plain_ms", b.plain_ms}});
      h << b.name << ": plaintext eval " << b.plain_ms << " ms\n";
      continue;
    }
    out.push_back({{"rule", b.name},
                   {"garble_ms", b.garble_ms},
                   {"encode_ms", b.encode_ms},
                   {"eval_ms", b.eval_ms},
                   {"decode_ms", b.decode_ms},
                   {"plain_ms", b.plain_ms},
                   {"bundle_bytes", b.bundle_bytes},
                   {"trigger_bytes", b.trigger_bytes},
                   {"action_bytes", b.action_bytes},
                   {"ref_kb", b.ref_kb},
                   {"size_out_of_band", b.size_flag}});
    h << b.name << ": garble " << b.garble_ms << " ms, encode " << b.encode_ms
      << " ms, eval " << b.eval_ms << " ms, decode " << b.decode_ms
      << " ms, plaintext " << b.plain_ms << " ms, bundle " << b.bundle_bytes
      << " B, hops " << b.trigger_bytes << "/" << b.action_bytes << " B";
    if (b.ref_kb > 0)
      h << (b.size_flag ? "  [size outside +-50% of reference "
                        : "  [size within +-50% of reference ")
        << b.ref_kb << " KB]";
    h << "\n";
  }
  emit(out, h.str(), opt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"garbled trigger-action rule engine"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--seed", opt.seed, "deterministic RNG seed");
  app.add_option("--tau", opt.tau, "override freshness window (seconds)");
  app.add_option("--transport", opt.transport, "inproc or tcp")
      ->check(CLI::IsMember({"inproc", "tcp"}));
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_flag("--json", opt.json_out, "machine-readable output");

  std::string rule_path, data_path, script_path;
  std::vector<std::string> rule_paths;
  uint32_t count = 96, per_target = 64;

  auto* setup = app.add_subcommand("setup-rule", "parse, compile and report");
  setup->add_option("config", rule_path)->required();

  auto* gen = app.add_subcommand("generate-circuits", "pre-generate bundles");
  gen->add_option("rule", rule_path)->required();
  gen->add_option("--count", count, "number of bundles");

  auto* trig = app.add_subcommand("trigger", "run one trigger end to end");
  trig->add_option("rule", rule_path)->required();
  trig->add_option("data", data_path)->required();

  auto* scen = app.add_subcommand("run-scenario", "run a scenario script");
  scen->add_option("rule", rule_path)->required();
  scen->add_option("script", script_path)->required();

  auto* atk = app.add_subcommand("attack-suite", "mutation fuzz one rule");
  atk->add_option("rule", rule_path)->required();
  atk->add_option("--per-target", per_target, "mutations per target");

  auto* bench = app.add_subcommand("bench", "per-rule timings and sizes");
  bench->add_option("rules", rule_paths)->required();

  auto* pbench = app.add_subcommand("plaintap-bench", "baseline timings");
  pbench->add_option("rules", rule_paths)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (setup->parsed()) return cmd_setup(rule_path, opt);
    if (gen->parsed()) return cmd_generate(rule_path, count, opt);
    if (trig->parsed()) return cmd_trigger(rule_path, data_path, opt);
    if (scen->parsed()) return cmd_scenario(rule_path, script_path, opt);
    if (atk->parsed()) return cmd_attack(rule_path, per_target, opt);
    if (bench->parsed()) return cmd_bench(rule_paths, false, opt);
    if (pbench->parsed()) return cmd_bench(rule_paths, true, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return 0;
}
