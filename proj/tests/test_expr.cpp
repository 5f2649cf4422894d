#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "etap/expr.hpp"

using namespace etap;

namespace {

TriggerSchema schema_of(std::initializer_list<FieldSchema> fs) {
  TriggerSchema s;
  s.fields = fs;
  return s;
}

FieldSchema str_field(const std::string& name, uint32_t len,
                      bool optional = false) {
  return {name, FieldKind::String, len, optional};
}
FieldSchema int_field(const std::string& name) {
  return {name, FieldKind::Int, 0, false};
}
FieldSchema bool_field(const std::string& name) {
  return {name, FieldKind::Bool, 0, false};
}

// Random string biased toward the interesting alphabet plus a pool of
// near-miss candidates per rule under test.
Bytes rand_str(std::mt19937& g, uint32_t max_len,
               const std::vector<std::string>& pool) {
  if (!pool.empty() && g() % 3 == 0) {
    const std::string& p = pool[g() % pool.size()];
    return Bytes(p.begin(), p.end());
  }
  static const char alpha[] =
      "abcdefgXYZ0123456789-. @_/#$|h t tp";
  uint32_t len = g() % (max_len + 1);
  Bytes out(len);
  for (auto& c : out) c = uint8_t(alpha[g() % (sizeof(alpha) - 1)]);
  return out;
}

// Compares circuit evaluation against the plaintext reference on `iters`
// random trigger inputs.
void check_rule(const Rule& rule, uint32_t iters,
                const std::map<std::string, std::vector<std::string>>& pools =
                    {},
                uint32_t seed = 1) {
  CompiledRule cr = compile_rule(rule);
  REQUIRE(cr.circuit.outputs.size() == 1 + cr.payload_bits_total());

  std::mt19937 g(seed);
  for (uint32_t it = 0; it < iters; ++it) {
    TriggerData data;
    for (const auto& f : rule.schema.fields) {
      FieldValue v;
      if (f.optional) v.present = g() % 2 == 0;
      switch (f.kind) {
        case FieldKind::Bool: v.b = g() % 2; break;
        case FieldKind::Int:
          // Mix small values near comparison constants with full range.
          v.i = g() % 4 ? int32_t(g() % 10000) : int32_t(g());
          break;
        case FieldKind::String: {
          auto it2 = pools.find(f.name);
          v.s = rand_str(g, f.byte_len,
                         it2 == pools.end() ? std::vector<std::string>{}
                                            : it2->second);
          break;
        }
      }
      data[f.name] = v;
    }

    auto bits = serialize_trigger_bits(rule.schema, data);
    auto got = cr.circuit.eval_plaintext(bits, cr.const_bits);
    PlainOutput want = plain_eval(rule, data);

    REQUIRE(got.size() == 1 + want.bits.size());
    CHECK(bool(got[0]) == want.fired);
    CHECK(std::vector<uint8_t>(got.begin() + 1, got.end()) == want.bits);
  }
}

Rule make_rule(TriggerSchema schema, const std::string& pred,
               std::initializer_list<std::string> payload) {
  Rule r;
  r.name = "t";
  r.schema = std::move(schema);
  if (!pred.empty()) r.predicate = parse_expr(pred);
  for (const auto& p : payload) r.payload.push_back(parse_expr(p));
  return r;
}

}  // namespace

TEST_CASE("parser shapes") {
  auto e = parse_expr("! x[Text].startwith(\"@\")");
  REQUIRE(e->kind == Expr::Not);
  REQUIRE(e->kids[0]->kind == Expr::Method);
  CHECK(e->kids[0]->str == "startwith");
  CHECK(e->kids[0]->arg == "@");
  CHECK(e->kids[0]->kids[0]->kind == Expr::FieldRef);
  CHECK(e->kids[0]->kids[0]->str == "Text");

  e = parse_expr("x[A] > 5000 & x[B] < -3");
  REQUIRE(e->kind == Expr::And);
  CHECK(e->kids[0]->str == ">");
  CHECK(e->kids[1]->kids[1]->num == -3);

  e = parse_expr("x[Phone] != null");
  CHECK(e->kind == Expr::Presence);
  e = parse_expr("x[Phone] == null");
  REQUIRE(e->kind == Expr::Not);
  CHECK(e->kids[0]->kind == Expr::Presence);

  e = parse_expr("(x[A] - x[B]) / 60");
  REQUIRE(e->kind == Expr::Arith);
  CHECK(e->str == "/");
  CHECK(e->kids[0]->str == "-");

  e = parse_expr("x[N].split(\" \", 1)");
  CHECK(e->str == "split");
  CHECK(e->arg == " ");
  CHECK(e->num == 1);

  e = parse_expr("x[T].replace(\"$request\", \"\")");
  CHECK(e->str == "replace");
  CHECK(e->arg == "$request");

  e = parse_expr("lookup(x[C], {\"a\": \"1\", \"b\": \"22\"})");
  REQUIRE(e->kind == Expr::Lookup);
  REQUIRE(e->map.size() == 2);
  CHECK(e->map[1].second == "22");
}

TEST_CASE("parser and typecheck errors") {
  CHECK_THROWS_AS(parse_expr("x[A] +"), ExprError);
  CHECK_THROWS_AS(parse_expr("x[A"), ExprError);
  CHECK_THROWS_AS(parse_expr("\"unterminated"), ExprError);
  CHECK_THROWS_AS(parse_expr("x[A] > 1 extra"), ExprError);
  CHECK_THROWS_AS(parse_expr("y[A]"), ExprError);
  CHECK_THROWS_AS(parse_expr("lookup(x[C], {})"), ExprError);
  CHECK_THROWS_AS(parse_expr("x[T].replace(\"a\", \"b\")"), ExprError);
  CHECK_THROWS_AS(parse_expr("1 > null"), ExprError);

  auto schema = schema_of({str_field("S", 8), int_field("I"), bool_field("B")});
  auto bad = [&](const std::string& src) {
    Rule r;
    r.schema = schema;
    r.predicate = parse_expr(src);
    CHECK_THROWS_AS(compile_rule(r), ExprError);
  };
  bad("x[S] > 3");                 // string compared as int
  bad("x[I].startwith(\"a\")");    // method on an int
  {
    Rule r;
    r.schema = schema;
    r.predicate = parse_expr("x[Missing] > 1");
    CHECK_THROWS_AS(compile_rule(r), SchemaError);
  }
  bad("x[I] / 0");                 // zero divisor
  bad("x[I] / x[I]");              // non-literal divisor
  bad("x[S].split(\"ab\", 0)");    // multi-char delimiter
  bad("x[S].unknownmethod()");
  bad("x[B] + 1");                 // bool arithmetic
  bad("x[S].default(\"123456789\")");  // longer than the field
  bad("lookup(x[S], {\"123456789\": \"v\"})");

  Rule pr;
  pr.schema = schema;
  pr.predicate = parse_expr("x[I] + 1");  // int predicate
  CHECK_THROWS_AS(compile_rule(pr), ExprError);
}

TEST_CASE("mention filter rule: not startwith") {
  auto r = make_rule(schema_of({str_field("Text", 20)}),
                     "! x[Text].startwith(\"@\")", {"x[Text]"});
  check_rule(r, 300, {{"Text", {"@alice hi", "@", "a@b", "plain"}}});
}

TEST_CASE("integer threshold rule") {
  auto r = make_rule(schema_of({int_field("FollowerCount")}),
                     "x[FollowerCount] > 5000", {"x[FollowerCount]"});
  check_rule(r, 300);
}

TEST_CASE("arithmetic payload with division") {
  auto r = make_rule(schema_of({int_field("StartTime"), int_field("EndTime")}),
                     "x[EndTime] > x[StartTime]",
                     {"(x[EndTime] - x[StartTime]) / 60",
                      "x[StartTime] + x[EndTime]", "x[StartTime] * 3"});
  check_rule(r, 300);
}

TEST_CASE("string equality rule") {
  auto r = make_rule(schema_of({str_field("Sender", 24)}),
                     "x[Sender] == \"boss@corp.com\"", {"true"});
  check_rule(r, 300,
             {{"Sender", {"boss@corp.com", "boss@corp.comX", "boss@corp.co",
                          "Boss@corp.com"}}});
}

TEST_CASE("optional field with presence test and replace") {
  auto r = make_rule(schema_of({str_field("Phone", 12, /*optional=*/true)}),
                     "x[Phone] != null", {"x[Phone].replace(\" \", \"\")"});
  check_rule(r, 300, {{"Phone", {"555 123 4567", "5551234567", "  55  "}}});
}

TEST_CASE("split rule") {
  auto r = make_rule(schema_of({str_field("SenderName", 20)}), "",
                     {"x[SenderName].split(\" \", 0)",
                      "x[SenderName].split(\" \", 1)"});
  check_rule(r, 300,
             {{"SenderName", {"Ada Lovelace", " lead  space", "one", "a b c d"}}});
}

TEST_CASE("command prefix with lookup") {
  auto r = make_rule(
      schema_of({str_field("Text", 16), str_field("Channel", 10)}),
      "x[Text].startwith(\"$request\")",
      {"x[Text].replace(\"$request\", \"\")",
       "lookup(x[Channel], {\"general\": \"room-1\", \"dev\": \"room-22\", "
       "\"ops\": \"r3\"})"});
  check_rule(r, 300,
             {{"Text", {"$request help", "$requests", "$req", "hi"}},
              {"Channel", {"general", "dev", "ops", "random"}}});
}

TEST_CASE("substring rule: contain") {
  auto r = make_rule(schema_of({str_field("Text", 24)}),
                     "x[Text].contain(\"http\")", {"x[Text]"});
  check_rule(r, 300,
             {{"Text", {"see http://x", "htt p", "xhttpx", "HTTP"}}});
}

TEST_CASE("endwith alternation rule") {
  auto r = make_rule(schema_of({str_field("Filename", 12)}),
                     "x[Filename].endwith(\"mp4|avi|mov\")", {"true"});
  check_rule(r, 300,
             {{"Filename",
               {"clip.mp4", "clip.mp4x", "a.avi", "b.mov", "movie", "mp4"}}});
}

TEST_CASE("phone extraction rule") {
  auto r = make_rule(schema_of({str_field("Description", 40)}), "",
                     {"x[Description].extract_phone()"});
  check_rule(r, 200,
             {{"Description",
               {"call 123-456-7890 now", "123-456-7890", "123-456-78901",
                "123.456 7890!", "1234567890"}}});
}

TEST_CASE("email extraction rule") {
  auto r = make_rule(schema_of({str_field("Description", 40)}), "",
                     {"x[Description].extract_email()"});
  check_rule(r, 200,
             {{"Description",
               {"mail a_b@host.com now", "a@b.c", "a@b", "x@y.z@q.r",
                "a.b@c_d.org!"}}});
}

TEST_CASE("tolower truncate default") {
  auto r = make_rule(
      schema_of({str_field("S", 10, /*optional=*/true)}), "",
      {"x[S].tolower()", "x[S].truncate(4)", "x[S].default(\"none\")"});
  check_rule(r, 300, {{"S", {"MiXeD Case", "ABC", "[\\]^_`{"}}});
}

TEST_CASE("boolean fields and connectives") {
  auto r = make_rule(schema_of({bool_field("A"), bool_field("B"),
                                int_field("N")}),
                     "(x[A] | ! x[B]) & x[N] != 7", {"x[A]", "! x[B]"});
  check_rule(r, 200);
}

TEST_CASE("empty predicate fires always") {
  auto r = make_rule(schema_of({int_field("N")}), "", {"x[N]"});
  CompiledRule cr = compile_rule(r);
  auto bits = serialize_trigger_bits(r.schema, {{"N", {.i = 42}}});
  auto got = cr.circuit.eval_plaintext(bits, cr.const_bits);
  CHECK(got[0] == 1);
  check_rule(r, 50);
}

TEST_CASE("payload widths and const bit ordering") {
  auto r = make_rule(schema_of({str_field("S", 8), int_field("N")}),
                     "x[N] == 258", {"x[S]", "x[N]", "x[S] == \"ab\""});
  CompiledRule cr = compile_rule(r);
  REQUIRE(cr.payload_widths == std::vector<uint32_t>({64, 32, 1}));
  CHECK(cr.payload_bits_total() == 97);
  // consts: 258 as 32 bits, then "ab" as 16 bits.
  REQUIRE(cr.const_bits.size() == 48);
  CHECK(bits_to_int(std::span<const uint8_t>(cr.const_bits).first(32)) == 258);
  Bytes ab = bits_to_bytes(std::span<const uint8_t>(cr.const_bits).subspan(32));
  CHECK(ab == Bytes({'a', 'b'}));
}
