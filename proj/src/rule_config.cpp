#include <fstream>
#include <sstream>

#include "etap/harness.hpp"

namespace etap {

namespace {

// Splits a config line into whitespace-separated tokens, honoring double
// quotes. Quoted tokens keep their quotes so callers can tell "5000" the
// string from 5000 the number.
std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(uint8_t(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::string tok;
    bool quoted = false;
    while (i < line.size() && (quoted || !std::isspace(uint8_t(line[i])))) {
      char c = line[i++];
      if (c == '"') quoted = !quoted;
      if (c == '\\' && quoted && i < line.size()) {
        tok.push_back(c);
        tok.push_back(line[i++]);
        continue;
      }
      tok.push_back(c);
    }
    if (quoted) throw ConfigError("unterminated quote: " + line);
    out.push_back(tok);
  }
  return out;
}

std::string rest_of_line(const std::string& line, const std::string& keyword) {
  size_t p = line.find(keyword);
  p += keyword.size();
  while (p < line.size() && std::isspace(uint8_t(line[p]))) ++p;
  return line.substr(p);
}

uint32_t parse_u32(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    unsigned long v = std::stoul(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return uint32_t(v);
  } catch (const std::exception&) {
    throw ConfigError(std::string("expected a number for ") + what + ", got '" +
                      tok + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Rule parse_rule_config(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "etap-rule v1")
    throw ConfigError("missing 'etap-rule v1' header");

  Rule r;
  while (std::getline(in, line)) {
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];
    if (kw == "name") {
      if (toks.size() != 2) throw ConfigError("name takes one token");
      r.name = toks[1];
    } else if (kw == "field") {
      if (toks.size() < 3) throw ConfigError("field needs a name and a kind");
      FieldSchema f;
      f.name = toks[1];
      size_t next = 3;
      if (toks[2] == "string") {
        if (toks.size() < 4)
          throw ConfigError("string field '" + f.name + "' needs a length");
        f.kind = FieldKind::String;
        f.byte_len = parse_u32(toks[3], "string length");
        if (f.byte_len == 0)
          throw ConfigError("string field '" + f.name + "' length must be > 0");
        next = 4;
      } else if (toks[2] == "int") {
        f.kind = FieldKind::Int;
      } else if (toks[2] == "bool") {
        f.kind = FieldKind::Bool;
      } else {
        throw ConfigError("unknown field kind '" + toks[2] + "'");
      }
      if (next < toks.size()) {
        if (toks[next] != "optional")
          throw ConfigError("unexpected token '" + toks[next] + "'");
        f.optional = true;
        ++next;
      }
      if (next != toks.size()) throw ConfigError("trailing tokens: " + line);
      for (const auto& g : r.schema.fields)
        if (g.name == f.name)
          throw ConfigError("duplicate field '" + f.name + "'");
      r.schema.fields.push_back(f);
    } else if (kw == "predicate") {
      if (r.predicate) throw ConfigError("duplicate predicate");
      r.predicate = parse_expr(rest_of_line(line, "predicate"));
    } else if (kw == "payload") {
      r.payload.push_back(parse_expr(rest_of_line(line, "payload")));
    } else if (kw == "tau") {
      if (toks.size() != 2) throw ConfigError("tau takes one number");
      r.tau_seconds = parse_u32(toks[1], "tau");
    } else if (kw == "batch") {
      if (toks.size() != 2) throw ConfigError("batch takes one number");
      r.batch = parse_u32(toks[1], "batch");
      if (r.batch == 0) throw ConfigError("batch must be > 0");
    } else {
      throw ConfigError("unknown directive '" + kw + "'");
    }
  }
  if (r.name.empty()) throw ConfigError("rule has no name");
  if (r.schema.fields.empty()) throw ConfigError("rule has no fields");
  return r;
}

Rule load_rule_file(const std::string& path) {
  return parse_rule_config(read_file(path));
}

namespace {

// Parses Field=value tokens; value is "str" (with \n \t \\ \" escapes),
// an integer, true/false, or null for an absent optional field.
void parse_assignment(const std::string& tok, TriggerData& data) {
  size_t eq = tok.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("expected Field=value, got '" + tok + "'");
  std::string name = tok.substr(0, eq);
  std::string val = tok.substr(eq + 1);
  FieldValue v;
  if (val == "null") {
    v.present = false;
  } else if (val == "true" || val == "false") {
    v.b = val == "true";
  } else if (!val.empty() && val.front() == '"') {
    if (val.size() < 2 || val.back() != '"')
      throw ConfigError("bad string value in '" + tok + "'");
    for (size_t i = 1; i + 1 < val.size(); ++i) {
      char c = val[i];
      if (c == '\\' && i + 2 < val.size()) {
        char e = val[++i];
        c = e == 'n' ? '\n' : e == 't' ? '\t' : e;
      }
      v.s.push_back(uint8_t(c));
    }
  } else {
    try {
      size_t pos = 0;
      v.i = int32_t(std::stol(val, &pos));
      if (pos != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ConfigError("bad value in '" + tok + "'");
    }
  }
  if (!data.emplace(name, v).second)
    throw ConfigError("duplicate field '" + name + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "etap-scenario v1")
    throw ConfigError("missing 'etap-scenario v1' header");

  Scenario sc;
  while (std::getline(in, line)) {
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    ScenarioEvent ev;
    const std::string& kw = toks[0];
    if (kw == "trigger") {
      ev.kind = ScenarioEvent::Trigger;
      for (size_t i = 1; i < toks.size(); ++i) {
        if (toks[i].rfind("payload=", 0) == 0) {
          TriggerData tmp;
          parse_assignment(toks[i], tmp);
          ev.payload = tmp.at("payload").s;
        } else {
          parse_assignment(toks[i], ev.data);
        }
      }
    } else if (kw == "fake_trigger") {
      ev.kind = ScenarioEvent::FakeTrigger;
    } else if (kw == "replay" || kw == "tamper") {
      // Indices are 1-based event numbers and must point at an earlier
      // trigger or fake_trigger event.
      ev.kind = kw == "replay" ? ScenarioEvent::Replay : ScenarioEvent::Tamper;
      if (toks.size() < 2) throw ConfigError(kw + " needs an event index");
      ev.index = parse_u32(toks[1], "event index");
      bool ok = ev.index >= 1 && ev.index <= sc.events.size() &&
                (sc.events[ev.index - 1].kind == ScenarioEvent::Trigger ||
                 sc.events[ev.index - 1].kind == ScenarioEvent::FakeTrigger);
      if (!ok)
        throw ConfigError(kw + " index " + toks[1] +
                          " does not refer to a prior trigger event");
      if (ev.kind == ScenarioEvent::Tamper) {
        if (toks.size() != 4) throw ConfigError("tamper <idx> <target> <bit>");
        ev.target = toks[2];
        ev.bit = parse_u32(toks[3], "bit index");
      } else if (toks.size() != 2) {
        throw ConfigError("replay takes one index");
      }
    } else if (kw == "advance_clock") {
      ev.kind = ScenarioEvent::AdvanceClock;
      if (toks.size() != 2) throw ConfigError("advance_clock <seconds>");
      ev.seconds = parse_u32(toks[1], "seconds");
    } else {
      throw ConfigError("unknown event '" + kw + "'");
    }
    sc.events.push_back(std::move(ev));
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  return parse_scenario(read_file(path));
}

}  // namespace etap
