#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace etap {

// Thrown for structural errors while building circuits (forward references,
// input declared out of order, width mismatches).
struct CircuitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using WireId = uint32_t;

enum class GateKind : uint8_t { Xor = 0, And = 1, Not = 2 };

struct Gate {
  GateKind kind;
  WireId a;
  WireId b;  // unused for Not
  WireId out;
};

struct CircuitStats {
  size_t and_count = 0;
  size_t xor_count = 0;
  size_t not_count = 0;
  size_t estimated_gc_bytes = 0;
};

// Topologically ordered gate list. Wires 0..n_trigger_bits are trigger
// inputs, the next n_const_bits wires are rule-constant inputs, and every
// gate appends one fresh output wire. outputs[0] is the predicate bit.
struct Circuit {
  uint32_t n_trigger_bits = 0;
  uint32_t n_const_bits = 0;
  std::vector<Gate> gates;
  std::vector<WireId> outputs;

  uint32_t num_inputs() const { return n_trigger_bits + n_const_bits; }
  uint32_t num_wires() const {
    return num_inputs() + static_cast<uint32_t>(gates.size());
  }

  CircuitStats stats() const;

  // Evaluates every wire; index by WireId. Inputs are 0/1 bytes.
  std::vector<uint8_t> eval_all(const std::vector<uint8_t>& trigger_bits,
                                const std::vector<uint8_t>& const_bits) const;
  // Output bits only, in outputs order (predicate first).
  std::vector<uint8_t> eval_plaintext(
      const std::vector<uint8_t>& trigger_bits,
      const std::vector<uint8_t>& const_bits) const;

  // One gate per line: "kind out a b". Debug aid only.
  void dump(std::ostream& os) const;
};

// Serialized garbled-circuit header (four 4-byte big-endian counters).
inline constexpr size_t kGarbledHeaderBytes = 16;

enum class InputClass { Trigger, Constant };

struct WireRange {
  WireId first = 0;
  uint32_t count = 0;
  WireId operator[](uint32_t i) const { return first + i; }
};

class CircuitBuilder {
 public:
  // Trigger inputs must be declared before constant inputs, and all inputs
  // before any gate.
  WireRange add_input(uint32_t count, InputClass cls);

  WireId add_gate(GateKind kind, WireId a, WireId b = 0);

  // OR expanded to NOT(AND(NOT a, NOT b)): 1 AND, at most 3 NOT.
  WireId add_or(WireId a, WireId b);

  void set_outputs(std::vector<WireId> outs);

  uint32_t next_wire() const { return next_wire_; }
  Circuit build();

 private:
  Circuit circuit_;
  uint32_t next_wire_ = 0;
  bool has_const_ = false;
  bool has_gates_ = false;
};

// Signal layer over CircuitBuilder: build-time constant folding plus
// common-subexpression sharing, so one-hot DFA unrolls and constant initial
// states cost no gates.
struct Sig {
  enum Tag : uint8_t { Zero, One, Wire } tag = Zero;
  WireId wire = 0;

  static Sig zero() { return {Zero, 0}; }
  static Sig one() { return {One, 0}; }
  static Sig of(WireId w) { return {Wire, w}; }
  static Sig of_bit(bool b) { return b ? one() : zero(); }
  bool is_const() const { return tag != Wire; }
};

class LogicBuilder {
 public:
  explicit LogicBuilder(CircuitBuilder& b) : b_(b) {}

  Sig lnot(Sig a);
  Sig lxor(Sig a, Sig b);
  Sig land(Sig a, Sig b);
  Sig lor(Sig a, Sig b);
  // (s ? a : b), one AND.
  Sig mux(Sig s, Sig a, Sig b);

  // Constants become real wires (XOR(w,w) for 0) so they carry labels.
  WireId materialize(Sig s);

  CircuitBuilder& raw() { return b_; }

 private:
  WireId zero_wire();

  CircuitBuilder& b_;
  std::unordered_map<uint64_t, WireId> cse_;
  std::unordered_map<WireId, WireId> not_of_;
  bool have_zero_ = false;
  WireId zero_wire_ = 0;
};

}  // namespace etap
