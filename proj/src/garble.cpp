#include "etap/garble.hpp"

#include <cstring>

namespace etap {

namespace {

// H(label || tweak) truncated to kappa bits; tweak 4-byte big-endian.
Label tweaked_hash(const Label& l, uint32_t tweak) {
  std::array<uint8_t, kKappaBytes + 4> in;
  std::memcpy(in.data(), l.bytes.data(), kKappaBytes);
  in[kKappaBytes] = uint8_t(tweak >> 24);
  in[kKappaBytes + 1] = uint8_t(tweak >> 16);
  in[kKappaBytes + 2] = uint8_t(tweak >> 8);
  in[kKappaBytes + 3] = uint8_t(tweak);
  Label out;
  out.bytes = shake128(in);
  return out;
}

}  // namespace

Label input_label_false(const EncodingInfo& e, WireId w) {
  return tweaked_hash(e.seed, w);
}

GarbleResult garble(const EncodingInfo& e, const Circuit& c,
                    bool keep_wire_labels) {
  const Label& R = e.offset;
  std::vector<Label> w(c.num_wires());
  for (WireId i = 0; i < c.num_inputs(); ++i) w[i] = input_label_false(e, i);

  GarbleResult res;
  res.F.n_trigger_bits = c.n_trigger_bits;
  res.F.n_const_bits = c.n_const_bits;
  res.F.gate_count = static_cast<uint32_t>(c.gates.size());
  res.F.output_count = static_cast<uint32_t>(c.outputs.size());

  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor:
        w[g.out] = w[g.a] ^ w[g.b];
        break;
      case GateKind::Not:
        // Label swap: L0_out = L1_in.
        w[g.out] = w[g.a] ^ R;
        break;
      case GateKind::And: {
        const Label A0 = w[g.a];
        const Label B0 = w[g.b];
        const Label A1 = A0 ^ R;
        const Label B1 = B0 ^ R;
        const bool pa = A0.lsb();
        const bool pb = B0.lsb();
        const Label hA0 = tweaked_hash(A0, 2 * g.out);
        const Label hA1 = tweaked_hash(A1, 2 * g.out);
        const Label hB0 = tweaked_hash(B0, 2 * g.out + 1);
        const Label hB1 = tweaked_hash(B1, 2 * g.out + 1);

        // Generator half gate.
        Label tg = hA0 ^ hA1;
        if (pb) tg ^= R;
        Label wg = hA0;
        if (pa) wg ^= tg;
        // Evaluator half gate.
        Label te = hB0 ^ hB1 ^ A0;
        Label we = pb ? hB1 : hB0;

        res.F.and_ct.push_back({tg, te});
        w[g.out] = wg ^ we;
        break;
      }
    }
  }

  res.output_false.reserve(c.outputs.size());
  for (WireId o : c.outputs) res.output_false.push_back(w[o]);
  if (keep_wire_labels) res.wire_false = std::move(w);
  return res;
}

std::vector<Label> encode(const EncodingInfo& e,
                          std::span<const uint8_t> bits, WireId first_wire) {
  std::vector<Label> out;
  out.reserve(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    Label l = input_label_false(e, first_wire + static_cast<WireId>(i));
    if (bits[i] & 1) l ^= e.offset;
    out.push_back(l);
  }
  return out;
}

std::vector<Label> evaluate(const Circuit& c, const GarbledCircuit& F,
                            std::span<const Label> input_labels) {
  if (input_labels.size() != c.num_inputs())
    throw CircuitError("evaluate: wrong number of input labels");
  std::vector<Label> w(c.num_wires());
  std::copy(input_labels.begin(), input_labels.end(), w.begin());

  size_t next_ct = 0;
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor:
        w[g.out] = w[g.a] ^ w[g.b];
        break;
      case GateKind::Not:
        w[g.out] = w[g.a];
        break;
      case GateKind::And: {
        if (next_ct >= F.and_ct.size())
          throw CircuitError("evaluate: garbled table too short");
        const auto& [tg, te] = F.and_ct[next_ct++];
        const Label& A = w[g.a];
        const Label& B = w[g.b];
        Label wg = tweaked_hash(A, 2 * g.out);
        if (A.lsb()) wg ^= tg;
        Label we = tweaked_hash(B, 2 * g.out + 1);
        if (B.lsb()) we ^= te ^ A;
        w[g.out] = wg ^ we;
        break;
      }
    }
  }

  std::vector<Label> out;
  out.reserve(c.outputs.size());
  for (WireId o : c.outputs) out.push_back(w[o]);
  return out;
}

std::vector<uint8_t> decode(std::span<const uint8_t> d_prime,
                            std::span<const Label> labels) {
  std::vector<uint8_t> y(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    y[i] = uint8_t(labels[i].lsb()) ^ (d_prime[i] & 1);
  return y;
}

Bytes GarbledCircuit::serialize() const {
  Bytes out;
  put_be32(out, n_trigger_bits);
  put_be32(out, n_const_bits);
  put_be32(out, gate_count);
  put_be32(out, output_count);
  for (const auto& [tg, te] : and_ct) {
    out.insert(out.end(), tg.bytes.begin(), tg.bytes.end());
    out.insert(out.end(), te.bytes.begin(), te.bytes.end());
  }
  return out;
}

std::optional<GarbledCircuit> GarbledCircuit::parse(
    std::span<const uint8_t> raw) {
  if (raw.size() < kGarbledHeaderBytes) return std::nullopt;
  if ((raw.size() - kGarbledHeaderBytes) % 32 != 0) return std::nullopt;
  GarbledCircuit F;
  F.n_trigger_bits = get_be32(raw.subspan(0));
  F.n_const_bits = get_be32(raw.subspan(4));
  F.gate_count = get_be32(raw.subspan(8));
  F.output_count = get_be32(raw.subspan(12));
  size_t n = (raw.size() - kGarbledHeaderBytes) / 32;
  F.and_ct.resize(n);
  const uint8_t* p = raw.data() + kGarbledHeaderBytes;
  for (size_t i = 0; i < n; ++i) {
    std::memcpy(F.and_ct[i][0].bytes.data(), p, kKappaBytes);
    std::memcpy(F.and_ct[i][1].bytes.data(), p + kKappaBytes, kKappaBytes);
    p += 32;
  }
  return F;
}

}  // namespace etap
