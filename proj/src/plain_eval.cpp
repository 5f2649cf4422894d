#include <algorithm>
#include <cctype>

#include "etap/expr.hpp"

// Plaintext reference semantics. Deliberately avoids the circuit and DFA
// pipeline: string operations are implemented with direct byte scans so the
// two paths can be compared against each other.

namespace etap {

namespace {

struct PVal {
  ValType ty = ValType::Bool;
  bool b = false;
  int32_t i = 0;
  Bytes s;            // padded, fixed width
  bool present = true;
};

std::vector<std::string> split_alts(const std::string& arg) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : arg) {
    if (c == '|') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Circuit string equality: equal over the shorter length, then the next
// character of the longer side must be padding.
bool quirk_str_eq(const Bytes& a, const Bytes& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i)
    if (a[i] != b[i]) return false;
  const Bytes& longer = a.size() >= b.size() ? a : b;
  if (longer.size() > n && longer[n] != 0x00) return false;
  return true;
}

// Spans of literal-alternation occurrences, as (start, end-exclusive).
void literal_spans(const std::vector<std::string>& alts, const Bytes& s,
                   std::vector<char>& begins, std::vector<char>& ends) {
  begins.assign(s.size(), 0);
  ends.assign(s.size() + 1, 0);
  for (const auto& a : alts) {
    if (a.empty()) continue;
    for (size_t i = 0; i + a.size() <= s.size(); ++i) {
      if (std::equal(a.begin(), a.end(), s.begin() + i)) {
        begins[i] = 1;
        ends[i + a.size()] = 1;
      }
    }
  }
}

// m_t = b_t | (!e_{t-1} & m_{t-1}) over bytes; ends[] uses exclusive
// positions, so a match ending at byte t-1 inclusive sets ends[t].
Bytes apply_mask_delete(const Bytes& s, const std::vector<char>& begins,
                        const std::vector<char>& ends, bool keep_matched) {
  std::vector<char> m(s.size(), 0);
  for (size_t t = 0; t < s.size(); ++t) {
    char prev = t > 0 && !ends[t] ? m[t - 1] : 0;
    m[t] = begins[t] | prev;
  }
  Bytes y(s.size(), 0x00);
  for (size_t t = 0; t < s.size(); ++t)
    if (m[t] == (keep_matched ? 1 : 0)) y[t] = s[t];
  return y;
}

bool is_alnum_byte(uint8_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}
bool is_digit_byte(uint8_t c) { return c >= '0' && c <= '9'; }
bool is_sep_byte(uint8_t c) { return c == '-' || c == '.' || c == ' '; }
bool is_local_byte(uint8_t c) { return is_alnum_byte(c) || c == '_' || c == '.'; }
bool is_dom_byte(uint8_t c) { return is_alnum_byte(c) || c == '_'; }
bool is_alpha_byte(uint8_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// ddd sep ddd sep dddd
bool phone_span(const Bytes& s, size_t lo, size_t hi) {  // inclusive
  if (hi - lo + 1 != 12) return false;
  static const char* kinds = "dddsdddsdddd";
  for (size_t i = 0; i < 12; ++i) {
    uint8_t c = s[lo + i];
    if (kinds[i] == 'd' ? !is_digit_byte(c) : !is_sep_byte(c)) return false;
  }
  return true;
}

// local+ @ dom+ . alpha+
bool email_span(const Bytes& s, size_t lo, size_t hi) {
  size_t at = SIZE_MAX;
  for (size_t i = lo; i <= hi; ++i)
    if (s[i] == '@') {
      if (at != SIZE_MAX) return false;
      at = i;
    }
  if (at == SIZE_MAX || at == lo || at == hi) return false;
  for (size_t i = lo; i < at; ++i)
    if (!is_local_byte(s[i])) return false;
  size_t dot = SIZE_MAX;
  for (size_t i = at + 1; i <= hi; ++i)
    if (s[i] == '.') {
      if (dot != SIZE_MAX) return false;
      dot = i;
    }
  if (dot == SIZE_MAX || dot == at + 1 || dot == hi) return false;
  for (size_t i = at + 1; i < dot; ++i)
    if (!is_dom_byte(s[i])) return false;
  for (size_t i = dot + 1; i <= hi; ++i)
    if (!is_alpha_byte(s[i])) return false;
  return true;
}

// In-place extraction: spans of `span_ok` followed by a non-alphanumeric
// boundary byte, masked through the shared recurrence.
template <typename SpanFn>
Bytes extract_bounded_ref(const Bytes& s, SpanFn span_ok) {
  size_t n = s.size();
  std::vector<char> begins(n, 0), ends(n + 1, 0);
  for (size_t lo = 0; lo < n; ++lo)
    for (size_t hi = lo; hi + 1 < n; ++hi) {
      if (is_alnum_byte(s[hi + 1])) continue;
      if (!span_ok(s, lo, hi)) continue;
      begins[lo] = 1;
      ends[hi + 1] = 1;
    }
  return apply_mask_delete(s, begins, ends, /*keep_matched=*/true);
}

class PlainEval {
 public:
  PlainEval(const TriggerSchema& schema, const TriggerData& data)
      : schema_(schema), data_(data) {}

  PVal eval(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::BoolLit: return mkbool(e->num != 0);
      case Expr::IntLit: return mkint(int32_t(e->num));
      case Expr::StrLit: return mkstr(Bytes(e->str.begin(), e->str.end()));
      case Expr::FieldRef: return field_val(e->str);
      case Expr::Presence: {
        const auto& f = schema_.field(e->str);
        if (!f.optional) return mkbool(true);
        return mkbool(field_val(e->str).present);
      }
      case Expr::Not: return mkbool(!eval(e->kids[0]).b);
      case Expr::And:
        return mkbool(eval(e->kids[0]).b & eval(e->kids[1]).b);
      case Expr::Or:
        return mkbool(eval(e->kids[0]).b | eval(e->kids[1]).b);
      case Expr::Cmp: {
        PVal a = eval(e->kids[0]);
        PVal b = eval(e->kids[1]);
        bool r;
        if (a.ty == ValType::Str) r = quirk_str_eq(a.s, b.s);
        else if (e->str == ">") r = a.i > b.i;
        else if (e->str == "<") r = a.i < b.i;
        else r = a.i == b.i;
        if (e->str == "!=") r = !r;
        return mkbool(r);
      }
      case Expr::Arith: {
        PVal a = eval(e->kids[0]);
        if (e->str == "/")
          return mkint(int32_t(uint32_t(a.i) / uint32_t(e->kids[1]->num)));
        PVal b = eval(e->kids[1]);
        uint32_t ua = uint32_t(a.i), ub = uint32_t(b.i);
        if (e->str == "+") return mkint(int32_t(ua + ub));
        if (e->str == "-") return mkint(int32_t(ua - ub));
        return mkint(int32_t(ua * ub));
      }
      case Expr::Method: return method(e);
      case Expr::Lookup: {
        PVal key = eval(e->kids[0]);
        uint32_t vw = 0;
        for (auto& [k, v] : e->map)
          vw = std::max<uint32_t>(vw, uint32_t(v.size()));
        Bytes out(vw, 0x00);
        for (auto& [k, v] : e->map) {
          Bytes kp(k.begin(), k.end());
          kp.resize(key.s.size(), 0x00);
          if (kp == key.s) {
            out = Bytes(v.begin(), v.end());
            out.resize(vw, 0x00);
          }
        }
        return mkstr(std::move(out));
      }
    }
    throw ExprError("corrupt expression");
  }

 private:
  static PVal mkbool(bool b) { return {ValType::Bool, b, 0, {}, true}; }
  static PVal mkint(int32_t i) { return {ValType::Int, false, i, {}, true}; }
  static PVal mkstr(Bytes s) {
    return {ValType::Str, false, 0, std::move(s), true};
  }

  PVal field_val(const std::string& name) {
    const auto& f = schema_.field(name);
    auto it = data_.find(name);
    bool present = it != data_.end() && it->second.present;
    PVal v;
    v.present = present;
    switch (f.kind) {
      case FieldKind::Bool:
        v.ty = ValType::Bool;
        v.b = present && it->second.b;
        break;
      case FieldKind::Int:
        v.ty = ValType::Int;
        v.i = present ? it->second.i : 0;
        break;
      case FieldKind::String:
        v.ty = ValType::Str;
        v.s = present ? pad_string(it->second.s, f.byte_len)
                      : Bytes(f.byte_len, 0x00);
        break;
    }
    return v;
  }

  PVal method(const ExprPtr& e) {
    PVal recv = eval(e->kids[0]);
    const Bytes& x = recv.s;
    const std::string& m = e->str;
    if (m == "startwith") {
      Bytes lit(e->arg.begin(), e->arg.end());
      bool r = lit.size() <= x.size() &&
               std::equal(lit.begin(), lit.end(), x.begin());
      return mkbool(r);
    }
    if (m == "endwith") {
      // Some alternative ends exactly where the padding begins.
      auto alts = split_alts(e->arg);
      for (size_t end = 0; end <= x.size(); ++end) {
        bool pad_ok = true;
        for (size_t i = end; i < x.size(); ++i)
          if (x[i] != 0x00) pad_ok = false;
        if (!pad_ok) continue;
        for (const auto& a : alts)
          if (a.size() <= end &&
              std::equal(a.begin(), a.end(), x.begin() + (end - a.size())))
            return mkbool(true);
      }
      return mkbool(false);
    }
    if (m == "contain") {
      auto alts = split_alts(e->arg);
      for (const auto& a : alts) {
        if (a.empty()) return mkbool(true);
        auto it = std::search(x.begin(), x.end(), a.begin(), a.end());
        if (it != x.end()) return mkbool(true);
      }
      return mkbool(false);
    }
    if (m == "split") {
      uint8_t d = uint8_t(e->arg[0]);
      uint32_t idx = uint32_t(e->num);
      Bytes y(x.size(), 0x00);
      uint32_t count = 0;
      for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] == d) {
          if (count <= idx) ++count;
          continue;
        }
        if (count == idx) y[i] = x[i];
      }
      return mkstr(std::move(y));
    }
    if (m == "replace") {
      std::vector<char> begins, ends;
      literal_spans(split_alts(e->arg), x, begins, ends);
      return mkstr(apply_mask_delete(x, begins, ends, /*keep_matched=*/false));
    }
    if (m == "truncate") {
      Bytes y = x;
      for (size_t i = size_t(e->num); i < y.size(); ++i) y[i] = 0x00;
      return mkstr(std::move(y));
    }
    if (m == "tolower") {
      Bytes y = x;
      for (auto& c : y)
        if (c >= 'A' && c <= 'Z') c = uint8_t(c + 32);
      return mkstr(std::move(y));
    }
    if (m == "extract_phone") return mkstr(extract_bounded_ref(x, phone_span));
    if (m == "extract_email") return mkstr(extract_bounded_ref(x, email_span));
    // default
    Bytes lit(e->arg.begin(), e->arg.end());
    lit.resize(x.size(), 0x00);
    return mkstr(recv.present ? x : lit);
  }

  const TriggerSchema& schema_;
  const TriggerData& data_;
};

void append_bits(std::vector<uint8_t>& out, const PVal& v) {
  switch (v.ty) {
    case ValType::Bool: out.push_back(v.b ? 1 : 0); break;
    case ValType::Int: {
      auto b = int_to_bits(v.i);
      out.insert(out.end(), b.begin(), b.end());
      break;
    }
    case ValType::Str: {
      auto b = bytes_to_bits(v.s);
      out.insert(out.end(), b.begin(), b.end());
      break;
    }
  }
}

}  // namespace

PlainOutput plain_eval(const Rule& rule, const TriggerData& data) {
  PlainEval ev(rule.schema, data);
  PlainOutput out;
  out.fired = rule.predicate ? ev.eval(rule.predicate).b : true;
  for (auto& p : rule.payload) append_bits(out.bits, ev.eval(p));
  return out;
}

}  // namespace etap
