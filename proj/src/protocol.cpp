#include "etap/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace etap {

namespace {

// s̃ plaintext: j(4) || k_v(16) || e_r(16) || d' bitmap || h(16).
// d' is packed MSB-first, ceil(m/8) bytes for m transform output wires.
Bytes pack_secret(uint32_t j, const DerivedEncoding& enc,
                  std::span<const uint8_t> d_prime,
                  std::span<const uint8_t> h) {
  Bytes out;
  put_be32(out, j);
  out.insert(out.end(), enc.k_v.bytes.begin(), enc.k_v.bytes.end());
  out.insert(out.end(), enc.e_r.begin(), enc.e_r.end());
  size_t nbytes = (d_prime.size() + 7) / 8;
  for (size_t i = 0; i < nbytes; ++i) {
    uint8_t b = 0;
    for (size_t k = 0; k < 8; ++k) {
      size_t idx = 8 * i + k;
      if (idx < d_prime.size() && d_prime[idx]) b |= uint8_t(0x80 >> k);
    }
    out.push_back(b);
  }
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

Key label_key(const Label& l, const Key& k_A) {
  Key k;
  for (size_t i = 0; i < kKappaBytes; ++i)
    k.bytes[i] = l.bytes[i] ^ k_A.bytes[i];
  return k;
}

std::array<uint8_t, 32> blob_mac(const Key& k_A, uint32_t j,
                                 const Label& false_pred) {
  Bytes msg;
  put_be32(msg, j);
  msg.insert(msg.end(), false_pred.bytes.begin(), false_pred.bytes.end());
  return hmac_sha256(k_A, msg);
}

std::array<uint8_t, kKappaBytes> output_hash(
    std::span<const Label> false_labels) {
  Bytes g;
  for (const Label& l : false_labels)
    g.insert(g.end(), l.bytes.begin(), l.bytes.end());
  return shake128(g);
}

}  // namespace

size_t GarbledBundle::byte_size() const {
  return serialize_bundle(*this).size();
}

GarbledBundle ckt_garbling(const CompiledRule& rule, RuleKeys& keys,
                           Rng& rng) {
  uint32_t j = keys.next_j++;
  DerivedEncoding enc = derive_encoding(keys.k_T, j);
  EncodingInfo e = EncodingInfo::from_derived(enc);

  GarbleResult gr = garble(e, rule.circuit);
  if (gr.output_false.empty()) throw std::runtime_error("circuit has no outputs");

  // Output w_0 is the predicate; w_1..w_m the transform bits.
  size_t m = gr.output_false.size() - 1;
  std::vector<uint8_t> d_prime(m);
  for (size_t i = 0; i < m; ++i) d_prime[i] = gr.output_false[1 + i].lsb();
  auto h = output_hash(
      std::span<const Label>(gr.output_false).subspan(1));

  Label true_pred = gr.output_false[0];
  true_pred ^= e.offset;

  GarbledBundle b;
  b.j = j;
  b.F = std::move(gr.F);
  b.C = encode(e, rule.const_bits, rule.circuit.n_trigger_bits);
  b.d.s_tilde = aead_encrypt(label_key(true_pred, keys.k_A),
                             pack_secret(j, enc, d_prime, h), rng);
  b.d.h_tilde = blob_mac(keys.k_A, j, gr.output_false[0]);
  return b;
}

TriggerMsg ts_exec(TsState& ts, std::span<const uint8_t> x_bits,
                   std::span<const uint8_t> v, uint64_t t_millis, Rng& rng) {
  std::vector<uint32_t> avail;
  for (uint32_t j : ts.issued)
    if (!ts.used.count(j)) avail.push_back(j);
  if (avail.empty()) throw std::runtime_error("no unused circuit id");
  uint32_t j = avail[rng.uniform(avail.size())];
  ts.used.insert(j);

  DerivedEncoding enc = derive_encoding(ts.k_T, j);
  EncodingInfo e = EncodingInfo::from_derived(enc);

  TriggerMsg m;
  m.j = j;
  m.X = encode(e, x_bits, 0);
  Bytes pt;
  put_be64(pt, t_millis);
  pt.insert(pt.end(), v.begin(), v.end());
  m.ct = aead_encrypt(enc.k_v, pt, rng);
  return m;
}

TriggerMsg ts_exec_fake(TsState& ts, uint32_t n_trigger_bits, size_t v_len,
                        uint64_t t_millis, Rng& rng) {
  if (ts.issued.empty()) throw std::runtime_error("no circuit ids");
  TriggerMsg m;
  m.j = ts.issued[rng.uniform(ts.issued.size())];
  m.X.resize(n_trigger_bits);
  for (Label& l : m.X) rng.fill(l.bytes);
  Bytes pt;
  put_be64(pt, t_millis);
  Bytes junk = rng.bytes(v_len);
  pt.insert(pt.end(), junk.begin(), junk.end());
  m.ct = aead_encrypt(rng.key(), pt, rng);
  return m;
}

Ciphertext ts_make_sync_blob(const Key& k_T, uint32_t j, uint64_t t_millis,
                             Rng& rng) {
  Bytes pt;
  put_be32(pt, j);
  put_be64(pt, t_millis);
  return aead_encrypt(k_T, pt, rng);
}

bool TriggerStore::add(const std::string& rule_id, GarbledBundle bundle) {
  if (bundles_.size() >= capacity_) return false;
  auto key = std::make_pair(rule_id, bundle.j);
  if (consumed_.count(key) || bundles_.count(key)) return false;
  bundles_.emplace(std::move(key), std::move(bundle));
  return true;
}

std::optional<GarbledBundle> TriggerStore::consume(const std::string& rule_id,
                                                   uint32_t j) {
  auto it = bundles_.find({rule_id, j});
  if (it == bundles_.end()) return std::nullopt;
  GarbledBundle b = std::move(it->second);
  bundles_.erase(it);
  consumed_.insert({rule_id, j});
  return b;
}

bool TriggerStore::was_consumed(const std::string& rule_id, uint32_t j) const {
  return consumed_.count({rule_id, j}) != 0;
}

uint32_t TriggerStore::newest_id(const std::string& rule_id) const {
  uint32_t best = 0;
  for (const auto& [k, v] : bundles_)
    if (k.first == rule_id) best = std::max(best, k.second);
  for (const auto& k : consumed_)
    if (k.first == rule_id) best = std::max(best, k.second);
  return best;
}

std::optional<ActionMsg> tap_exec(const Circuit& topology,
                                  const TriggerMsg& msg, TriggerStore& store,
                                  const std::string& rule_id) {
  auto bundle = store.consume(rule_id, msg.j);
  if (!bundle) return std::nullopt;
  if (msg.X.size() != topology.n_trigger_bits ||
      bundle->C.size() != topology.n_const_bits)
    return std::nullopt;

  std::vector<Label> in;
  in.reserve(msg.X.size() + bundle->C.size());
  in.insert(in.end(), msg.X.begin(), msg.X.end());
  in.insert(in.end(), bundle->C.begin(), bundle->C.end());

  ActionMsg out;
  out.j = msg.j;
  out.Y = evaluate(topology, bundle->F, in);
  out.ct = msg.ct;
  out.d = bundle->d;
  return out;
}

AsResult as_exec(const ActionMsg& msg, const Key& k_A, uint32_t tau_seconds,
                 uint64_t now_millis) {
  AsResult r;
  if (msg.Y.empty()) {
    r.cause = RejectCause::BlobAuth;
    return r;
  }
  size_t m = msg.Y.size() - 1;

  // Step 1: try to open s̃ under the predicate label. Failure means either
  // "predicate was false" (h̃ vouches for the label) or tampering.
  auto secret = aead_decrypt(label_key(msg.Y[0], k_A), msg.d.s_tilde);
  if (!secret) {
    auto tag = blob_mac(k_A, msg.j, msg.Y[0]);
    if (ct_equal(tag, msg.d.h_tilde)) {
      r.status = AsStatus::NotFired;
      return r;
    }
    r.cause = RejectCause::BlobAuth;
    return r;
  }

  size_t dbytes = (m + 7) / 8;
  if (secret->size() != 4 + 16 + 16 + dbytes + 16) {
    r.cause = RejectCause::BlobFormat;
    return r;
  }
  const uint8_t* p = secret->data();
  uint32_t j_prime = get_be32({p, 4});
  if (j_prime != msg.j) {
    r.cause = RejectCause::CircuitId;
    return r;
  }
  Key k_v;
  std::copy(p + 4, p + 20, k_v.bytes.begin());
  Label e_r;
  std::copy(p + 20, p + 36, e_r.bytes.begin());
  std::span<const uint8_t> dmap(p + 36, dbytes);
  std::span<const uint8_t> h(p + 36 + dbytes, 16);

  // Step 2: decode y, rebuild the false labels and check them against h.
  std::vector<uint8_t> y(m);
  Bytes g;
  g.reserve(16 * m);
  for (size_t i = 0; i < m; ++i) {
    uint8_t dbit = (dmap[i / 8] >> (7 - i % 8)) & 1;
    y[i] = uint8_t(msg.Y[1 + i].lsb() ^ dbit);
    Label l = msg.Y[1 + i];
    if (y[i]) l ^= e_r;
    g.insert(g.end(), l.bytes.begin(), l.bytes.end());
  }
  if (!ct_equal(shake128(g), h)) {
    r.cause = RejectCause::OutputHash;
    return r;
  }

  // Step 3: open the payload and check freshness.
  auto pt = aead_decrypt(k_v, msg.ct);
  if (!pt || pt->size() < 8) {
    r.cause = RejectCause::PayloadAuth;
    return r;
  }
  uint64_t t = get_be64({pt->data(), 8});
  if (now_millis > t + uint64_t(tau_seconds) * 1000) {
    r.cause = RejectCause::Stale;
    return r;
  }

  r.status = AsStatus::Fired;
  r.y = std::move(y);
  r.v.assign(pt->begin() + 8, pt->end());
  return r;
}

SyncCheck tc_sync_circuit_id(uint32_t tap_reported_j, const Ciphertext& blob,
                             const Key& k_T) {
  SyncCheck c;
  auto pt = aead_decrypt(k_T, blob);
  if (!pt || pt->size() != 12) {
    c.alarm = true;
    c.j = tap_reported_j;
    return c;
  }
  uint32_t ts_j = get_be32({pt->data(), 4});
  // TAP reporting an id behind what TS already consumed means its view of
  // the store is stale (or it is lying); flag and trust TS.
  c.alarm = tap_reported_j < ts_j;
  c.j = std::max(tap_reported_j, ts_j);
  return c;
}

}  // namespace etap
