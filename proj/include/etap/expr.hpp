#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "etap/circuit.hpp"
#include "etap/funclib.hpp"

namespace etap {

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ValType : uint8_t { Bool, Int, Str };

// Rule expression AST. Kinds cover the whole rule grammar:
//   ! & |  comparisons (> < == !=, incl. "!= null")  + - * /
//   x[Field]  method calls on string fields  lookup(x[F], {"k":"v",...})
struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum Kind {
    BoolLit,
    IntLit,
    StrLit,
    FieldRef,
    Presence,  // x[F] != null rewrites to this
    Not,
    And,
    Or,
    Cmp,    // str: "<" ">" "==" "!="
    Arith,  // str: "+" "-" "*" "/"
    Method, // str: method name; kids[0] = receiver
    Lookup, // kids[0] = key expr
  } kind = BoolLit;

  ValType ty = ValType::Bool;
  std::string str;   // literal / field name / operator / method name
  std::string arg;   // string argument of a method
  int64_t num = 0;   // int literal or numeric method argument
  std::vector<ExprPtr> kids;
  std::vector<std::pair<std::string, std::string>> map;  // lookup table
};

ExprPtr parse_expr(const std::string& src);

struct Rule {
  std::string name;
  TriggerSchema schema;
  ExprPtr predicate;              // empty → always true
  std::vector<ExprPtr> payload;   // transform outputs, concatenated
  uint32_t tau_seconds = 60;
  uint32_t batch = 96;
};

struct CompiledRule {
  Circuit circuit;                      // outputs: predicate bit, then payload
  std::vector<uint8_t> const_bits;      // values of the constant input wires
  std::vector<uint32_t> payload_widths; // bits per payload expression
  uint32_t payload_bits_total() const {
    uint32_t n = 0;
    for (uint32_t w : payload_widths) n += w;
    return n;
  }
};

// Typechecks and compiles. Comparison constants, string literals and lookup
// tables become constant input wires (values in const_bits); patterns,
// delimiters, split indices, truncation lengths and divisors are structural.
CompiledRule compile_rule(const Rule& rule);

// Plaintext reference evaluation with identical in-place semantics.
struct PlainOutput {
  bool fired = false;
  std::vector<uint8_t> bits;  // payload bits, same layout as circuit outputs
};
PlainOutput plain_eval(const Rule& rule, const TriggerData& data);

}  // namespace etap
