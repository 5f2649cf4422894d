#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "etap/circuit.hpp"
#include "etap/crypto.hpp"

namespace etap {

// kappa-bit wire label. lsb (last bit of the last byte) is the
// point-and-permute bit.
struct Label {
  std::array<uint8_t, kKappaBytes> bytes{};

  bool lsb() const { return bytes[kKappaBytes - 1] & 1; }
  Label operator^(const Label& o) const {
    Label r;
    for (size_t i = 0; i < kKappaBytes; ++i) r.bytes[i] = bytes[i] ^ o.bytes[i];
    return r;
  }
  Label& operator^=(const Label& o) {
    for (size_t i = 0; i < kKappaBytes; ++i) bytes[i] ^= o.bytes[i];
    return *this;
  }
  bool operator==(const Label&) const = default;
};

// Seed for input-wire labels plus the global free-XOR offset (lsb = 1).
// Derived from (k_T, j); never leaves TC/TS in the clear.
struct EncodingInfo {
  Label seed;    // e_s
  Label offset;  // e_r

  static EncodingInfo from_derived(const DerivedEncoding& d) {
    EncodingInfo e;
    e.seed.bytes = d.e_s;
    e.offset.bytes = d.e_r;
    return e;
  }
};

// Two half-gate ciphertexts per AND gate, in circuit gate order. XOR and
// NOT gates are free. The circuit topology itself is distributed at rule
// setup; per-instance bundles carry only this table.
struct GarbledCircuit {
  uint32_t n_trigger_bits = 0;
  uint32_t n_const_bits = 0;
  uint32_t gate_count = 0;
  uint32_t output_count = 0;
  std::vector<std::array<Label, 2>> and_ct;  // (T_G, T_E)

  size_t byte_size() const { return kGarbledHeaderBytes + 32 * and_ct.size(); }
  Bytes serialize() const;
  static std::optional<GarbledCircuit> parse(std::span<const uint8_t> raw);
};

struct GarbleResult {
  GarbledCircuit F;
  std::vector<Label> output_false;  // false label of w_0..w_m
  // Debug-only oracle table (all wires' false labels); never serialized.
  std::vector<Label> wire_false;
};

// Deterministic Gb': input-wire false labels are H(e_s || w), free XOR,
// label-swap NOT, half-gates AND.
GarbleResult garble(const EncodingInfo& e, const Circuit& c,
                    bool keep_wire_labels = false);

// En: label_i = H(e_s || (first_wire + i)) xor (bit_i ? e_r : 0).
std::vector<Label> encode(const EncodingInfo& e,
                          std::span<const uint8_t> bits, WireId first_wire);

// Ev: one label per input wire in, one label per output wire out.
std::vector<Label> evaluate(const Circuit& c, const GarbledCircuit& F,
                            std::span<const Label> input_labels);

// De: y_i = lsb(label_i) xor d'_i.
std::vector<uint8_t> decode(std::span<const uint8_t> d_prime,
                            std::span<const Label> labels);

Label input_label_false(const EncodingInfo& e, WireId w);

}  // namespace etap
