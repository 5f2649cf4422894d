#include "etap/circuit.hpp"

#include <ostream>

namespace etap {

CircuitStats Circuit::stats() const {
  CircuitStats s;
  for (const Gate& g : gates) {
    switch (g.kind) {
      case GateKind::Xor: s.xor_count++; break;
      case GateKind::And: s.and_count++; break;
      case GateKind::Not: s.not_count++; break;
    }
  }
  // Only AND gates carry ciphertexts (two per gate under half-gates).
  s.estimated_gc_bytes = kGarbledHeaderBytes + 32 * s.and_count;
  return s;
}

std::vector<uint8_t> Circuit::eval_all(
    const std::vector<uint8_t>& trigger_bits,
    const std::vector<uint8_t>& const_bits) const {
  if (trigger_bits.size() != n_trigger_bits ||
      const_bits.size() != n_const_bits) {
    throw CircuitError("eval: input length mismatch");
  }
  std::vector<uint8_t> w(num_wires());
  for (uint32_t i = 0; i < n_trigger_bits; ++i) w[i] = trigger_bits[i] & 1;
  for (uint32_t i = 0; i < n_const_bits; ++i)
    w[n_trigger_bits + i] = const_bits[i] & 1;
  for (const Gate& g : gates) {
    switch (g.kind) {
      case GateKind::Xor: w[g.out] = w[g.a] ^ w[g.b]; break;
      case GateKind::And: w[g.out] = w[g.a] & w[g.b]; break;
      case GateKind::Not: w[g.out] = w[g.a] ^ 1; break;
    }
  }
  return w;
}

std::vector<uint8_t> Circuit::eval_plaintext(
    const std::vector<uint8_t>& trigger_bits,
    const std::vector<uint8_t>& const_bits) const {
  std::vector<uint8_t> w = eval_all(trigger_bits, const_bits);
  std::vector<uint8_t> out;
  out.reserve(outputs.size());
  for (WireId o : outputs) out.push_back(w[o]);
  return out;
}

void Circuit::dump(std::ostream& os) const {
  static const char* names[] = {"XOR", "AND", "NOT"};
  for (const Gate& g : gates) {
    os << names[static_cast<int>(g.kind)] << ' ' << g.out << ' ' << g.a;
    if (g.kind != GateKind::Not) os << ' ' << g.b;
    os << '\n';
  }
}

WireRange CircuitBuilder::add_input(uint32_t count, InputClass cls) {
  if (has_gates_) throw CircuitError("inputs must be declared before gates");
  if (cls == InputClass::Trigger) {
    if (has_const_)
      throw CircuitError("trigger inputs must be declared before constants");
    circuit_.n_trigger_bits += count;
  } else {
    has_const_ = true;
    circuit_.n_const_bits += count;
  }
  WireRange r{next_wire_, count};
  next_wire_ += count;
  return r;
}

WireId CircuitBuilder::add_gate(GateKind kind, WireId a, WireId b) {
  if (a >= next_wire_ || (kind != GateKind::Not && b >= next_wire_))
    throw CircuitError("gate references undefined wire");
  has_gates_ = true;
  WireId out = next_wire_++;
  circuit_.gates.push_back(Gate{kind, a, kind == GateKind::Not ? a : b, out});
  return out;
}

WireId CircuitBuilder::add_or(WireId a, WireId b) {
  WireId na = add_gate(GateKind::Not, a);
  WireId nb = add_gate(GateKind::Not, b);
  WireId nand_ = add_gate(GateKind::And, na, nb);
  return add_gate(GateKind::Not, nand_);
}

void CircuitBuilder::set_outputs(std::vector<WireId> outs) {
  for (WireId o : outs)
    if (o >= next_wire_) throw CircuitError("output references undefined wire");
  circuit_.outputs = std::move(outs);
}

Circuit CircuitBuilder::build() { return circuit_; }

namespace {
uint64_t cse_key(GateKind kind, WireId a, WireId b) {
  if (kind != GateKind::Not && a > b) std::swap(a, b);
  return (static_cast<uint64_t>(kind) << 62) |
         (static_cast<uint64_t>(a) << 31) | b;
}
}  // namespace

Sig LogicBuilder::lnot(Sig a) {
  switch (a.tag) {
    case Sig::Zero: return Sig::one();
    case Sig::One: return Sig::zero();
    default: break;
  }
  auto it = not_of_.find(a.wire);
  if (it != not_of_.end()) return Sig::of(it->second);
  WireId w = b_.add_gate(GateKind::Not, a.wire);
  not_of_[a.wire] = w;
  not_of_[w] = a.wire;
  return Sig::of(w);
}

Sig LogicBuilder::lxor(Sig a, Sig b) {
  if (a.tag == Sig::Zero) return b;
  if (b.tag == Sig::Zero) return a;
  if (a.tag == Sig::One && b.tag == Sig::One) return Sig::zero();
  if (a.tag == Sig::One) return lnot(b);
  if (b.tag == Sig::One) return lnot(a);
  if (a.wire == b.wire) return Sig::zero();
  uint64_t key = cse_key(GateKind::Xor, a.wire, b.wire);
  auto it = cse_.find(key);
  if (it != cse_.end()) return Sig::of(it->second);
  WireId w = b_.add_gate(GateKind::Xor, a.wire, b.wire);
  cse_[key] = w;
  return Sig::of(w);
}

Sig LogicBuilder::land(Sig a, Sig b) {
  if (a.tag == Sig::Zero || b.tag == Sig::Zero) return Sig::zero();
  if (a.tag == Sig::One) return b;
  if (b.tag == Sig::One) return a;
  if (a.wire == b.wire) return a;
  uint64_t key = cse_key(GateKind::And, a.wire, b.wire);
  auto it = cse_.find(key);
  if (it != cse_.end()) return Sig::of(it->second);
  WireId w = b_.add_gate(GateKind::And, a.wire, b.wire);
  cse_[key] = w;
  return Sig::of(w);
}

Sig LogicBuilder::lor(Sig a, Sig b) {
  if (a.tag == Sig::One || b.tag == Sig::One) return Sig::one();
  if (a.tag == Sig::Zero) return b;
  if (b.tag == Sig::Zero) return a;
  return lnot(land(lnot(a), lnot(b)));
}

Sig LogicBuilder::mux(Sig s, Sig a, Sig b) {
  // (s ? a : b) = ((a ^ b) & s) ^ b
  return lxor(land(lxor(a, b), s), b);
}

WireId LogicBuilder::zero_wire() {
  if (!have_zero_) {
    // XOR of any wire with itself; wire 0 always exists in a real circuit.
    zero_wire_ = b_.add_gate(GateKind::Xor, 0, 0);
    have_zero_ = true;
  }
  return zero_wire_;
}

WireId LogicBuilder::materialize(Sig s) {
  switch (s.tag) {
    case Sig::Wire: return s.wire;
    case Sig::Zero: return zero_wire();
    case Sig::One: return lnot(Sig::of(zero_wire())).wire;
  }
  return 0;  // unreachable
}

}  // namespace etap
