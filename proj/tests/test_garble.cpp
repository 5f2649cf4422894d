#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "etap/circuit.hpp"
#include "etap/crypto.hpp"
#include "etap/garble.hpp"

using namespace etap;

namespace {

EncodingInfo test_encoding(uint32_t j) {
  Key kt;
  kt.bytes.fill(0x33);
  return EncodingInfo::from_derived(derive_encoding(kt, j));
}

// Random circuit with a mix of gate kinds over `n_in` inputs.
Circuit random_circuit(std::mt19937& rng, uint32_t n_in, uint32_t n_gates) {
  CircuitBuilder b;
  auto in = b.add_input(n_in, InputClass::Trigger);
  (void)in;
  std::vector<WireId> pool;
  for (uint32_t i = 0; i < n_in; ++i) pool.push_back(i);
  for (uint32_t g = 0; g < n_gates; ++g) {
    int kind = int(rng() % 3);
    WireId a = pool[rng() % pool.size()];
    WireId c = pool[rng() % pool.size()];
    WireId o;
    switch (kind) {
      case 0: o = b.add_gate(GateKind::Xor, a, c); break;
      case 1: o = b.add_gate(GateKind::And, a, c); break;
      default: o = b.add_gate(GateKind::Not, a); break;
    }
    pool.push_back(o);
  }
  std::vector<WireId> outs(pool.end() - std::min<size_t>(8, pool.size()),
                           pool.end());
  b.set_outputs(outs);
  return b.build();
}

std::vector<uint8_t> random_bits(std::mt19937& rng, size_t n) {
  std::vector<uint8_t> bits(n);
  for (auto& x : bits) x = uint8_t(rng() % 2);
  return bits;
}

}  // namespace

TEST_CASE("garble/encode/evaluate/decode match plaintext evaluation") {
  std::mt19937 rng(7);
  for (int iter = 0; iter < 40; ++iter) {
    Circuit c = random_circuit(rng, 4 + rng() % 8, 5 + rng() % 40);
    EncodingInfo e = test_encoding(uint32_t(iter));
    GarbleResult gr = garble(e, c);

    // d' bits are the lsbs of the output false labels.
    std::vector<uint8_t> d_prime;
    for (const Label& l : gr.output_false) d_prime.push_back(l.lsb());

    for (int t = 0; t < 8; ++t) {
      auto bits = random_bits(rng, c.num_inputs());
      auto labels = encode(e, bits, 0);
      auto out_labels = evaluate(c, gr.F, labels);
      auto y = decode(d_prime, out_labels);
      auto want = c.eval_plaintext(bits, {});
      CHECK(y == want);
    }
  }
}

TEST_CASE("free-xor invariant holds on every wire") {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    Circuit c = random_circuit(rng, 6, 30);
    EncodingInfo e = test_encoding(uint32_t(1000 + iter));
    GarbleResult gr = garble(e, c, /*keep_wire_labels=*/true);

    auto bits = random_bits(rng, c.num_inputs());
    auto labels = encode(e, bits, 0);

    // Re-run the evaluator but check every intermediate wire label is
    // either the false label or false ^ e_r, matching the plain value.
    auto wires = c.eval_all(bits, {});
    std::vector<Label> w(c.num_wires());
    std::copy(labels.begin(), labels.end(), w.begin());
    // evaluate() only returns outputs, so recompute via a second circuit
    // whose outputs are all wires.
    Circuit c2 = c;
    c2.outputs.clear();
    for (WireId i = 0; i < c.num_wires(); ++i) c2.outputs.push_back(i);
    GarbledCircuit F2 = gr.F;
    F2.output_count = uint32_t(c2.outputs.size());
    auto all_labels = evaluate(c2, F2, labels);

    for (WireId i = 0; i < c.num_wires(); ++i) {
      Label expect = gr.wire_false[i];
      bool v = wires[i];
      // NOT gates swap labels rather than applying the offset, so resolve
      // the expected label by value.
      if (v) expect ^= e.offset;
      CHECK(all_labels[i] == expect);
    }
  }
}

TEST_CASE("garbling is deterministic in the derived encoding") {
  std::mt19937 rng(13);
  Circuit c = random_circuit(rng, 8, 40);
  EncodingInfo e = test_encoding(5);
  auto g1 = garble(e, c);
  auto g2 = garble(e, c);
  CHECK(g1.F.serialize() == g2.F.serialize());
  CHECK(g1.output_false == g2.output_false);
  EncodingInfo e2 = test_encoding(6);
  CHECK(garble(e2, c).F.serialize() != g1.F.serialize());
}

TEST_CASE("garbled table size law") {
  std::mt19937 rng(17);
  for (int iter = 0; iter < 20; ++iter) {
    Circuit c = random_circuit(rng, 6, 25);
    auto st = c.stats();
    GarbleResult gr = garble(test_encoding(9), c);
    CHECK(gr.F.byte_size() == kGarbledHeaderBytes + 32 * st.and_count);
    CHECK(gr.F.serialize().size() == st.estimated_gc_bytes);
  }
}

TEST_CASE("serialize/parse round trip") {
  std::mt19937 rng(19);
  Circuit c = random_circuit(rng, 5, 20);
  GarbleResult gr = garble(test_encoding(3), c);
  Bytes raw = gr.F.serialize();
  auto back = GarbledCircuit::parse(raw);
  REQUIRE(back.has_value());
  CHECK(back->serialize() == raw);
  CHECK(back->n_trigger_bits == gr.F.n_trigger_bits);
  CHECK(back->and_ct == gr.F.and_ct);
  // Truncated or misaligned tables are rejected.
  CHECK_FALSE(GarbledCircuit::parse(std::span(raw).subspan(0, 8)).has_value());
  if (raw.size() > kGarbledHeaderBytes)
    CHECK_FALSE(
        GarbledCircuit::parse(std::span(raw).subspan(0, raw.size() - 1))
            .has_value());
}

TEST_CASE("decode flips by d'") {
  std::vector<Label> ls(2);
  ls[0].bytes[15] = 0x01;  // lsb 1
  ls[1].bytes[15] = 0x00;
  std::vector<uint8_t> d = {1, 1};
  auto y = decode(d, ls);
  CHECK(y == std::vector<uint8_t>{0, 1});
}

TEST_CASE("input labels depend only on seed and wire id") {
  EncodingInfo e = test_encoding(1);
  Label a = input_label_false(e, 0);
  Label b = input_label_false(e, 1);
  CHECK(a != b);
  auto enc = encode(e, std::vector<uint8_t>{0, 1}, 0);
  CHECK(enc[0] == a);
  CHECK(enc[1] == (b ^ e.offset));
}
