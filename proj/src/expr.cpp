#include "etap/expr.hpp"

#include <algorithm>

namespace etap {

// --------------------------------------------------------------------------
// Tokenizer / parser
// --------------------------------------------------------------------------

namespace {

struct Token {
  enum Kind { Ident, Int, Str, Punct, End } kind = End;
  std::string text;
  int64_t num = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : s_(src) { advance(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError("expression error near '" +
                    (cur_.kind == Token::End ? std::string("<end>") : cur_.text) +
                    "': " + what);
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(uint8_t(s_[pos_]))) ++pos_;
    cur_ = Token{};
    if (pos_ >= s_.size()) {
      cur_.kind = Token::End;
      return;
    }
    char c = s_[pos_];
    if (std::isdigit(uint8_t(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(uint8_t(s_[pos_]))) ++pos_;
      cur_.kind = Token::Int;
      cur_.text = s_.substr(start, pos_ - start);
      cur_.num = std::stoll(cur_.text);
      return;
    }
    if (std::isalpha(uint8_t(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(uint8_t(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      cur_.kind = Token::Ident;
      cur_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        char d = s_[pos_++];
        if (d == '\\' && pos_ < s_.size()) {
          char e = s_[pos_++];
          switch (e) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            default: out.push_back(e); break;
          }
        } else {
          out.push_back(d);
        }
      }
      if (pos_ >= s_.size())
        throw ExprError("expression error: unterminated string literal");
      ++pos_;
      cur_.kind = Token::Str;
      cur_.text = out;
      return;
    }
    // Two-char operators first.
    if ((c == '=' || c == '!') && pos_ + 1 < s_.size() && s_[pos_ + 1] == '=') {
      cur_.kind = Token::Punct;
      cur_.text = s_.substr(pos_, 2);
      pos_ += 2;
      return;
    }
    cur_.kind = Token::Punct;
    cur_.text = std::string(1, c);
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  Token cur_;
};

ExprPtr mk(Expr::Kind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}

class ExprParser {
 public:
  explicit ExprParser(const std::string& src) : lx_(src) {}

  ExprPtr parse() {
    ExprPtr e = or_expr();
    if (lx_.peek().kind != Token::End) lx_.fail("trailing input");
    return e;
  }

 private:
  bool punct(const std::string& p) {
    return lx_.peek().kind == Token::Punct && lx_.peek().text == p;
  }
  void expect_punct(const std::string& p) {
    if (!punct(p)) lx_.fail("expected '" + p + "'");
    lx_.take();
  }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (punct("|")) {
      lx_.take();
      auto n = mk(Expr::Or);
      n->kids = {e, and_expr()};
      e = n;
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = unary();
    while (punct("&")) {
      lx_.take();
      auto n = mk(Expr::And);
      n->kids = {e, unary()};
      e = n;
    }
    return e;
  }

  ExprPtr unary() {
    if (punct("!")) {
      lx_.take();
      auto n = mk(Expr::Not);
      n->kids = {unary()};
      return n;
    }
    return cmp();
  }

  ExprPtr cmp() {
    ExprPtr lhs = additive();
    for (const char* op : {">", "<", "==", "!="}) {
      if (punct(op)) {
        lx_.take();
        // "x[F] != null" / "== null" become presence tests.
        if (lx_.peek().kind == Token::Ident && lx_.peek().text == "null") {
          lx_.take();
          if (lhs->kind != Expr::FieldRef)
            throw ExprError("expression error: null test needs a field");
          auto p = mk(Expr::Presence);
          p->str = lhs->str;
          if (std::string(op) == "!=") return p;
          if (std::string(op) == "==") {
            auto n = mk(Expr::Not);
            n->kids = {p};
            return n;
          }
          throw ExprError("expression error: null only supports == and !=");
        }
        auto n = mk(Expr::Cmp);
        n->str = op;
        n->kids = {lhs, additive()};
        return n;
      }
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr e = multiplicative();
    while (punct("+") || punct("-")) {
      auto n = mk(Expr::Arith);
      n->str = lx_.take().text;
      n->kids = {e, multiplicative()};
      e = n;
    }
    return e;
  }

  ExprPtr multiplicative() {
    ExprPtr e = postfix();
    while (punct("*") || punct("/")) {
      auto n = mk(Expr::Arith);
      n->str = lx_.take().text;
      n->kids = {e, postfix()};
      e = n;
    }
    return e;
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (punct(".")) {
      lx_.take();
      if (lx_.peek().kind != Token::Ident) lx_.fail("expected method name");
      auto n = mk(Expr::Method);
      n->str = lx_.take().text;
      n->kids = {e};
      expect_punct("(");
      bool first = true;
      bool have_str = false;
      while (!punct(")")) {
        if (!first) expect_punct(",");
        first = false;
        Token t = lx_.take();
        if (t.kind == Token::Str) {
          // First string argument is the operand; a second one (replace's
          // replacement) must be empty.
          if (have_str) {
            if (!t.text.empty())
              throw ExprError(
                  "expression error: replace only supports empty replacement");
          } else {
            n->arg = t.text;
            have_str = true;
          }
        } else if (t.kind == Token::Int) {
          n->num = t.num;
        } else {
          lx_.fail("expected literal argument");
        }
      }
      lx_.take();  // ')'
      e = n;
    }
    return e;
  }

  ExprPtr primary() {
    Token t = lx_.peek();
    if (t.kind == Token::Int) {
      lx_.take();
      auto n = mk(Expr::IntLit);
      n->num = t.num;
      n->ty = ValType::Int;
      return n;
    }
    if (punct("-")) {
      lx_.take();
      if (lx_.peek().kind != Token::Int) lx_.fail("expected number after '-'");
      auto n = mk(Expr::IntLit);
      n->num = -lx_.take().num;
      n->ty = ValType::Int;
      return n;
    }
    if (t.kind == Token::Str) {
      lx_.take();
      auto n = mk(Expr::StrLit);
      n->str = t.text;
      n->ty = ValType::Str;
      return n;
    }
    if (t.kind == Token::Ident) {
      if (t.text == "true" || t.text == "false") {
        lx_.take();
        auto n = mk(Expr::BoolLit);
        n->num = t.text == "true";
        return n;
      }
      if (t.text == "x") {
        lx_.take();
        expect_punct("[");
        if (lx_.peek().kind != Token::Ident) lx_.fail("expected field name");
        auto n = mk(Expr::FieldRef);
        n->str = lx_.take().text;
        expect_punct("]");
        return n;
      }
      if (t.text == "lookup") {
        lx_.take();
        expect_punct("(");
        auto n = mk(Expr::Lookup);
        n->kids = {or_expr()};
        expect_punct(",");
        expect_punct("{");
        bool first = true;
        while (!punct("}")) {
          if (!first) expect_punct(",");
          first = false;
          if (lx_.peek().kind != Token::Str) lx_.fail("expected map key");
          std::string k = lx_.take().text;
          expect_punct(":");
          if (lx_.peek().kind != Token::Str) lx_.fail("expected map value");
          n->map.emplace_back(k, lx_.take().text);
        }
        lx_.take();  // '}'
        expect_punct(")");
        if (n->map.empty())
          throw ExprError("expression error: empty lookup table");
        return n;
      }
      lx_.fail("unknown identifier '" + t.text + "'");
    }
    if (punct("(")) {
      lx_.take();
      ExprPtr e = or_expr();
      expect_punct(")");
      return e;
    }
    lx_.fail("expected expression");
  }

  Lexer lx_;
};

}  // namespace

ExprPtr parse_expr(const std::string& src) { return ExprParser(src).parse(); }

// --------------------------------------------------------------------------
// Type checking
// --------------------------------------------------------------------------

namespace {

const FieldSchema& field_of(const TriggerSchema& schema, const std::string& n) {
  return schema.field(n);
}

// Bit width of a string-typed expression (in-place ops preserve the width
// of the underlying field).
uint32_t str_width_bits(const TriggerSchema& schema, const ExprPtr& e);

void typecheck(const TriggerSchema& schema, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::BoolLit: e->ty = ValType::Bool; return;
    case Expr::IntLit: e->ty = ValType::Int; return;
    case Expr::StrLit: e->ty = ValType::Str; return;
    case Expr::FieldRef: {
      const auto& f = field_of(schema, e->str);
      e->ty = f.kind == FieldKind::Bool ? ValType::Bool
              : f.kind == FieldKind::Int ? ValType::Int
                                         : ValType::Str;
      return;
    }
    case Expr::Presence:
      field_of(schema, e->str);
      e->ty = ValType::Bool;
      return;
    case Expr::Not:
      typecheck(schema, e->kids[0]);
      if (e->kids[0]->ty != ValType::Bool)
        throw ExprError("'!' needs a boolean operand");
      e->ty = ValType::Bool;
      return;
    case Expr::And:
    case Expr::Or:
      for (auto& k : e->kids) {
        typecheck(schema, k);
        if (k->ty != ValType::Bool)
          throw ExprError("'&'/'|' need boolean operands");
      }
      e->ty = ValType::Bool;
      return;
    case Expr::Cmp: {
      typecheck(schema, e->kids[0]);
      typecheck(schema, e->kids[1]);
      ValType a = e->kids[0]->ty, b = e->kids[1]->ty;
      if (e->str == ">" || e->str == "<") {
        if (a != ValType::Int || b != ValType::Int)
          throw ExprError("'" + e->str + "' compares integers");
      } else {
        if (a == ValType::Str || b == ValType::Str) {
          if (a != ValType::Str || b != ValType::Str)
            throw ExprError("'" + e->str + "' operand types differ");
        } else if (a != ValType::Int || b != ValType::Int) {
          throw ExprError("'" + e->str + "' compares integers or strings");
        }
      }
      e->ty = ValType::Bool;
      return;
    }
    case Expr::Arith: {
      typecheck(schema, e->kids[0]);
      if (e->str == "/") {
        if (e->kids[1]->kind != Expr::IntLit || e->kids[1]->num <= 0)
          throw ExprError("'/' needs a positive literal divisor");
        e->kids[1]->ty = ValType::Int;
      } else {
        typecheck(schema, e->kids[1]);
        if (e->kids[1]->ty != ValType::Int)
          throw ExprError("'" + e->str + "' needs integer operands");
      }
      if (e->kids[0]->ty != ValType::Int)
        throw ExprError("'" + e->str + "' needs integer operands");
      e->ty = ValType::Int;
      return;
    }
    case Expr::Method: {
      typecheck(schema, e->kids[0]);
      if (e->kids[0]->ty != ValType::Str)
        throw ExprError("method '" + e->str + "' needs a string receiver");
      const std::string& m = e->str;
      if (m == "startwith" || m == "endwith" || m == "contain") {
        if (e->arg.empty())
          throw ExprError("method '" + m + "' needs a string argument");
        e->ty = ValType::Bool;
      } else if (m == "split") {
        if (e->arg.size() != 1)
          throw ExprError("split needs a single-character delimiter");
        e->ty = ValType::Str;
      } else if (m == "replace") {
        if (e->arg.empty())
          throw ExprError("replace needs a non-empty search string");
        e->ty = ValType::Str;
      } else if (m == "truncate") {
        if (e->num <= 0) throw ExprError("truncate needs a positive length");
        e->ty = ValType::Str;
      } else if (m == "tolower" || m == "extract_phone" ||
                 m == "extract_email") {
        e->ty = ValType::Str;
      } else if (m == "default") {
        if (e->kids[0]->kind != Expr::FieldRef)
          throw ExprError("default applies directly to a field");
        if (e->arg.size() * 8 > str_width_bits(schema, e->kids[0]))
          throw ExprError("default value longer than the field");
        e->ty = ValType::Str;
      } else {
        throw ExprError("unknown method '" + m + "'");
      }
      return;
    }
    case Expr::Lookup: {
      typecheck(schema, e->kids[0]);
      if (e->kids[0]->ty != ValType::Str)
        throw ExprError("lookup key must be a string");
      uint32_t kw = str_width_bits(schema, e->kids[0]);
      for (auto& [k, v] : e->map) {
        if (k.size() * 8 > kw)
          throw ExprError("lookup key '" + k + "' longer than the field");
        if (v.empty()) throw ExprError("empty lookup value");
      }
      e->ty = ValType::Str;
      return;
    }
  }
  throw ExprError("corrupt expression");
}

uint32_t str_width_bits(const TriggerSchema& schema, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::FieldRef: return field_of(schema, e->str).byte_len * 8;
    case Expr::StrLit: return uint32_t(e->str.size()) * 8;
    case Expr::Method: {
      if (e->str == "extract_phone" || e->str == "extract_email" ||
          e->str == "split" || e->str == "replace" || e->str == "truncate" ||
          e->str == "tolower" || e->str == "default")
        return str_width_bits(schema, e->kids[0]);
      throw ExprError("method '" + e->str + "' is not a string");
    }
    case Expr::Lookup: {
      uint32_t w = 0;
      for (auto& [k, v] : e->map) w = std::max<uint32_t>(w, uint32_t(v.size()));
      return w * 8;
    }
    default: throw ExprError("expression is not a string");
  }
}

// --------------------------------------------------------------------------
// Constant collection (phase 1) and circuit emission (phase 2). Both walk
// the AST in the same order so constant wires line up with const_bits.
// --------------------------------------------------------------------------

void push_int_const(std::vector<uint8_t>& bits, int64_t v) {
  auto b = int_to_bits(int32_t(v));
  bits.insert(bits.end(), b.begin(), b.end());
}

void push_str_const(std::vector<uint8_t>& bits, const std::string& s) {
  auto b = bytes_to_bits(Bytes(s.begin(), s.end()));
  bits.insert(bits.end(), b.begin(), b.end());
}

void collect_consts(const ExprPtr& e, std::vector<uint8_t>& bits) {
  switch (e->kind) {
    case Expr::IntLit: push_int_const(bits, e->num); return;
    case Expr::StrLit: push_str_const(bits, e->str); return;
    case Expr::Arith:
      collect_consts(e->kids[0], bits);
      if (e->str != "/") collect_consts(e->kids[1], bits);
      return;
    case Expr::Method:
      collect_consts(e->kids[0], bits);
      if (e->str == "startwith" || e->str == "default")
        push_str_const(bits, e->arg);
      return;
    case Expr::Lookup:
      collect_consts(e->kids[0], bits);
      for (auto& [k, v] : e->map) {
        push_str_const(bits, k);
        push_str_const(bits, v);
      }
      return;
    default:
      for (auto& k : e->kids) collect_consts(k, bits);
      return;
  }
}

struct CVal {
  ValType ty = ValType::Bool;
  Sig b = Sig::zero();
  std::vector<Sig> bits;  // Int: 32, Str: width
};

class Emitter {
 public:
  Emitter(const TriggerSchema& schema, LogicBuilder& lb, WireRange trig,
          WireRange consts)
      : schema_(schema), lb_(lb), trig_(trig), consts_(consts) {}

  CVal eval(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::BoolLit: return {ValType::Bool, Sig::of_bit(e->num != 0), {}};
      case Expr::IntLit: return {ValType::Int, Sig::zero(), take(32)};
      case Expr::StrLit:
        return {ValType::Str, Sig::zero(), take(uint32_t(e->str.size()) * 8)};
      case Expr::FieldRef: {
        const auto& f = schema_.field(e->str);
        uint32_t off = schema_.offset_of(e->str) + (f.optional ? 1 : 0);
        if (f.kind == FieldKind::Bool)
          return {ValType::Bool, Sig::of(trig_[off]), {}};
        std::vector<Sig> bits(f.payload_bits());
        for (uint32_t i = 0; i < bits.size(); ++i)
          bits[i] = Sig::of(trig_[off + i]);
        return {f.kind == FieldKind::Int ? ValType::Int : ValType::Str,
                Sig::zero(), std::move(bits)};
      }
      case Expr::Presence: {
        const auto& f = schema_.field(e->str);
        if (!f.optional) return {ValType::Bool, Sig::one(), {}};
        return {ValType::Bool, Sig::of(trig_[schema_.offset_of(e->str)]), {}};
      }
      case Expr::Not: {
        CVal a = eval(e->kids[0]);
        return {ValType::Bool, lb_.lnot(a.b), {}};
      }
      case Expr::And:
      case Expr::Or: {
        CVal a = eval(e->kids[0]);
        CVal b = eval(e->kids[1]);
        Sig r = e->kind == Expr::And ? lb_.land(a.b, b.b) : lb_.lor(a.b, b.b);
        return {ValType::Bool, r, {}};
      }
      case Expr::Cmp: {
        CVal a = eval(e->kids[0]);
        CVal b = eval(e->kids[1]);
        Sig r;
        if (a.ty == ValType::Str) {
          r = fn::str_eq(lb_, a.bits, b.bits);
        } else if (e->str == ">") {
          r = fn::cmp_gt(lb_, a.bits, b.bits);
        } else if (e->str == "<") {
          r = fn::cmp_lt(lb_, a.bits, b.bits);
        } else {
          r = fn::cmp_eq(lb_, a.bits, b.bits);
        }
        if (e->str == "!=") r = lb_.lnot(r);
        return {ValType::Bool, r, {}};
      }
      case Expr::Arith: {
        CVal a = eval(e->kids[0]);
        if (e->str == "/") {
          return {ValType::Int, Sig::zero(),
                  fn::div_const(lb_, a.bits, uint32_t(e->kids[1]->num))};
        }
        CVal b = eval(e->kids[1]);
        std::vector<Sig> r;
        if (e->str == "+") r = fn::add(lb_, a.bits, b.bits);
        else if (e->str == "-") r = fn::sub(lb_, a.bits, b.bits);
        else r = fn::mul(lb_, a.bits, b.bits);
        return {ValType::Int, Sig::zero(), std::move(r)};
      }
      case Expr::Method: {
        CVal recv = eval(e->kids[0]);
        const std::string& m = e->str;
        if (m == "startwith") {
          auto lit = take(uint32_t(e->arg.size()) * 8);
          return {ValType::Bool, fn::startwith(lb_, recv.bits, lit), {}};
        }
        if (m == "endwith")
          return {ValType::Bool, fn::endwith(lb_, recv.bits, e->arg), {}};
        if (m == "contain")
          return {ValType::Bool, fn::contain(lb_, recv.bits, e->arg), {}};
        if (m == "split")
          return {ValType::Str, Sig::zero(),
                  fn::split(lb_, recv.bits, e->arg[0], uint32_t(e->num))};
        if (m == "replace")
          return {ValType::Str, Sig::zero(),
                  fn::replace_delete(lb_, recv.bits, e->arg)};
        if (m == "truncate")
          return {ValType::Str, Sig::zero(),
                  fn::truncate(lb_, recv.bits, uint32_t(e->num))};
        if (m == "tolower")
          return {ValType::Str, Sig::zero(), fn::tolower(lb_, recv.bits)};
        if (m == "extract_phone")
          return {ValType::Str, Sig::zero(), fn::extract_phone(lb_, recv.bits)};
        if (m == "extract_email")
          return {ValType::Str, Sig::zero(), fn::extract_email(lb_, recv.bits)};
        // default
        auto lit = take(uint32_t(e->arg.size()) * 8);
        lit.resize(recv.bits.size(), Sig::zero());
        auto pres = mk(Expr::Presence);
        pres->str = e->kids[0]->str;
        Sig p = eval(pres).b;
        return {ValType::Str, Sig::zero(),
                fn::mux_default(lb_, p, recv.bits, lit)};
      }
      case Expr::Lookup: {
        CVal key = eval(e->kids[0]);
        uint32_t kw = uint32_t(key.bits.size());
        uint32_t vw = 0;
        for (auto& [k, v] : e->map)
          vw = std::max<uint32_t>(vw, uint32_t(v.size()) * 8);
        std::vector<std::vector<Sig>> keys, vals;
        for (auto& [k, v] : e->map) {
          auto kb = take(uint32_t(k.size()) * 8);
          kb.resize(kw, Sig::zero());
          keys.push_back(std::move(kb));
          auto vb = take(uint32_t(v.size()) * 8);
          vb.resize(vw, Sig::zero());
          vals.push_back(std::move(vb));
        }
        return {ValType::Str, Sig::zero(),
                fn::lookup(lb_, key.bits, keys, vals)};
      }
    }
    throw ExprError("corrupt expression");
  }

 private:
  std::vector<Sig> take(uint32_t n) {
    std::vector<Sig> out(n);
    for (uint32_t i = 0; i < n; ++i) out[i] = Sig::of(consts_[cursor_ + i]);
    cursor_ += n;
    return out;
  }

  const TriggerSchema& schema_;
  LogicBuilder& lb_;
  WireRange trig_;
  WireRange consts_;
  uint32_t cursor_ = 0;
};

}  // namespace

CompiledRule compile_rule(const Rule& rule) {
  if (rule.payload.empty() && !rule.predicate)
    throw ExprError("rule '" + rule.name + "' is empty");

  std::vector<ExprPtr> exprs;
  if (rule.predicate) exprs.push_back(rule.predicate);
  for (auto& p : rule.payload) exprs.push_back(p);
  for (auto& e : exprs) typecheck(rule.schema, e);
  if (rule.predicate && rule.predicate->ty != ValType::Bool)
    throw ExprError("predicate must be boolean");

  CompiledRule out;
  for (auto& e : exprs) collect_consts(e, out.const_bits);

  CircuitBuilder cb;
  WireRange trig = cb.add_input(rule.schema.total_bits(), InputClass::Trigger);
  WireRange consts{};
  if (!out.const_bits.empty())
    consts = cb.add_input(uint32_t(out.const_bits.size()), InputClass::Constant);
  LogicBuilder lb(cb);
  Emitter em(rule.schema, lb, trig, consts);

  std::vector<WireId> outputs;
  Sig pred = Sig::one();
  if (rule.predicate) pred = em.eval(rule.predicate).b;
  outputs.push_back(lb.materialize(pred));

  for (auto& p : rule.payload) {
    CVal v = em.eval(p);
    std::vector<Sig> bits;
    if (v.ty == ValType::Bool) bits = {v.b};
    else bits = std::move(v.bits);
    out.payload_widths.push_back(uint32_t(bits.size()));
    for (Sig s : bits) outputs.push_back(lb.materialize(s));
  }
  cb.set_outputs(std::move(outputs));
  out.circuit = cb.build();
  return out;
}

}  // namespace etap
