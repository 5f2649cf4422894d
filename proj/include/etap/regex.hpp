#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "etap/circuit.hpp"

namespace etap {

struct RegexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimized binary-alphabet DFA. States are numbered 1..q; the transition
// function is total.
struct Dfa {
  uint32_t q = 0;
  uint32_t start = 1;
  std::vector<std::array<uint32_t, 2>> next;  // next[state][bit], 1-based
  std::vector<uint8_t> accepting;             // 1-based flags

  uint32_t step(uint32_t s, uint8_t bit) const { return next[s][bit & 1]; }
  uint32_t run(std::span<const uint8_t> bits) const;
  bool accepts(std::span<const uint8_t> bits) const { return accepting[run(bits)]; }

  // State table, one line per state. Debug aid only.
  void dump(std::ostream& os) const;
};

// Regex subset: literals, escapes (\xNN, \d, \s, \w, punctuation), classes
// with ranges and negation, '.', '*', '+', '?', alternation and grouping.
// '.' matches any byte except the 0x00 padding byte.
struct RegexAst;
using RegexAstPtr = std::shared_ptr<RegexAst>;

RegexAstPtr parse_regex(const std::string& pattern);
RegexAstPtr reverse_ast(const RegexAstPtr& ast);

enum class BitOrder : uint8_t { MsbFirst, LsbFirst };

// Compiles to a minimized bit-level DFA for exact (anchored) matching.
Dfa compile_regex(const std::string& pattern, BitOrder order = BitOrder::MsbFirst);

// Unanchored variants: the pattern is extended with a leading any-byte
// Kleene star, so accepting states flag match ends during a scan.
Dfa compile_search(const std::string& pattern);
// As compile_search, but with a trailing any-byte star so accepting states
// absorb; running to the end of the field answers "contains a match".
Dfa compile_contains(const std::string& pattern);
// Reversed pattern with LSB-first bit expansion, for backward runs that
// locate match beginnings.
Dfa compile_search_reversed(const std::string& pattern);

Dfa ast_to_dfa(const RegexAstPtr& ast, BitOrder order, bool unanchored);

// --- circuit emission -----------------------------------------------------

// One step of the one-hot transition for every unrolled position. states[i]
// is the q-vector after consuming i bits (states[0] is the constant start);
// accept[i-1] is the XOR over accepting bits of states[i].
struct DfaUnroll {
  std::vector<std::vector<Sig>> states;
  std::vector<Sig> accept;
};

// backward=true feeds input_bits from the last bit down to the first; the
// recorded accept bit for position i still lands at accept[i-1].
DfaUnroll unroll_dfa(LogicBuilder& lb, const Dfa& dfa,
                     std::span<const Sig> input_bits, bool backward = false);

Sig dfa_match(LogicBuilder& lb, const Dfa& dfa, std::span<const Sig> bits);

// e_i = 1 iff bit i ends a match of `pattern` (unanchored).
std::vector<Sig> end_markers(LogicBuilder& lb, const std::string& pattern,
                             std::span<const Sig> bits);
// b_i = 1 iff bit i begins a match.
std::vector<Sig> begin_markers(LogicBuilder& lb, const std::string& pattern,
                               std::span<const Sig> bits);
// m_1 = b_1, m_i = b_i | (!e_{i-1} & m_{i-1}).
std::vector<Sig> match_mask(LogicBuilder& lb, std::span<const Sig> e,
                            std::span<const Sig> b);
std::vector<Sig> mask_for_pattern(LogicBuilder& lb, const std::string& pattern,
                                  std::span<const Sig> bits);

// Whole-circuit wrappers over the fragment builders above; the input is a
// single trigger field of n bits.
Circuit build_match_circuit(const std::string& pattern, uint32_t n_bits);
Circuit build_end_marker_circuit(const std::string& pattern, uint32_t n_bits);
Circuit build_begin_marker_circuit(const std::string& pattern, uint32_t n_bits);
Circuit build_extract_circuit(const std::string& pattern, uint32_t n_bits);

enum class ReplaceMode : uint8_t { Delete, Placeholder };
Circuit build_replace_circuit(const std::string& pattern, uint32_t n_bits,
                              ReplaceMode mode);

std::vector<Sig> extract_fragment(LogicBuilder& lb, const std::string& pattern,
                                  std::span<const Sig> bits);
std::vector<Sig> replace_fragment(LogicBuilder& lb, const std::string& pattern,
                                  std::span<const Sig> bits, ReplaceMode mode);

}  // namespace etap
