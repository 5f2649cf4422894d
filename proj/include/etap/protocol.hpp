#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etap/crypto.hpp"
#include "etap/expr.hpp"
#include "etap/garble.hpp"

namespace etap {

// Per-rule key material. k_T is shared TC<->TS, k_A is shared TC<->AS; the
// circuit id j is a monotonically increasing counter starting at zero.
struct RuleKeys {
  Key k_T;
  Key k_A;
  uint32_t next_j = 0;
};

// (s̃, h̃): s̃ opens only under L1^{w0} xor k_A; h̃ authenticates the false
// predicate label so AS can tell "predicate false" from tampering.
struct DecodingBlob {
  Ciphertext s_tilde;
  std::array<uint8_t, 32> h_tilde{};
};

struct GarbledBundle {
  uint32_t j = 0;
  GarbledCircuit F;
  std::vector<Label> C;  // labels of the rule-constant wires
  DecodingBlob d;

  size_t byte_size() const;
};

struct TriggerMsg {
  uint32_t j = 0;
  std::vector<Label> X;
  Ciphertext ct;  // E(k_v, t || v)
};

struct ActionMsg {
  uint32_t j = 0;
  std::vector<Label> Y;
  Ciphertext ct;
  DecodingBlob d;
};

enum class AsStatus : uint8_t { Fired, NotFired, Reject };

// Reject causes are surfaced for tests only; production callers must treat
// all rejects alike.
enum class RejectCause : uint8_t {
  None = 0,
  BlobAuth,       // s̃ failed and h̃ does not match either
  BlobFormat,     // s̃ opened but its contents are malformed
  CircuitId,      // j mismatch between message and blob
  OutputHash,     // rebuilt g hashes to something other than h
  PayloadAuth,    // ct failed to open under k_v
  Stale,          // timestamp older than tau
};

struct AsResult {
  AsStatus status = AsStatus::Reject;
  RejectCause cause = RejectCause::None;
  std::vector<uint8_t> y;  // decoded transform outputs (Fired only)
  Bytes v;                 // decrypted payload (Fired only)
};

// --- TC -------------------------------------------------------------------

// Garbles one instance of the rule circuit under the id keys.next_j and
// advances the counter. `rng` only feeds AEAD IVs; the garbling itself is
// deterministic in (k_T, j).
GarbledBundle ckt_garbling(const CompiledRule& rule, RuleKeys& keys, Rng& rng);

// --- TS -------------------------------------------------------------------

// TS's view: the shared trigger key plus which circuit ids exist and which
// were already used for real data.
struct TsState {
  Key k_T;
  std::vector<uint32_t> issued;     // J
  std::set<uint32_t> used;          // J'
};

// Encodes real trigger data; picks a random unused id from J \ J'.
TriggerMsg ts_exec(TsState& ts, std::span<const uint8_t> x_bits,
                   std::span<const uint8_t> v, uint64_t t_millis, Rng& rng);

// Cover traffic: a random id from all of J with uniformly random label
// bytes and a random-key ciphertext. Indistinguishable to TAP from real.
TriggerMsg ts_exec_fake(TsState& ts, uint32_t n_trigger_bits, size_t v_len,
                        uint64_t t_millis, Rng& rng);

// Encrypted (j, t) blob for circuit-id synchronization hardening.
Ciphertext ts_make_sync_blob(const Key& k_T, uint32_t j, uint64_t t_millis,
                             Rng& rng);

// --- TAP ------------------------------------------------------------------

// Single-use bundle store keyed by (rule id, j). add() refuses beyond
// capacity; consume() removes and remembers the id.
class TriggerStore {
 public:
  explicit TriggerStore(size_t capacity = 1 << 20) : capacity_(capacity) {}

  bool add(const std::string& rule_id, GarbledBundle bundle);
  std::optional<GarbledBundle> consume(const std::string& rule_id, uint32_t j);
  bool was_consumed(const std::string& rule_id, uint32_t j) const;
  uint32_t newest_id(const std::string& rule_id) const;
  size_t size() const { return bundles_.size(); }

 private:
  size_t capacity_;
  std::map<std::pair<std::string, uint32_t>, GarbledBundle> bundles_;
  std::set<std::pair<std::string, uint32_t>> consumed_;
};

// Evaluates the garbled circuit over X || C. Returns nothing when the j is
// unknown (message dropped). `topology` is the rule circuit distributed at
// setup time.
std::optional<ActionMsg> tap_exec(const Circuit& topology,
                                  const TriggerMsg& msg, TriggerStore& store,
                                  const std::string& rule_id);

// --- AS -------------------------------------------------------------------

AsResult as_exec(const ActionMsg& msg, const Key& k_A, uint32_t tau_seconds,
                 uint64_t now_millis);

// --- TC sync --------------------------------------------------------------

struct SyncCheck {
  uint32_t j = 0;   // id to use next
  bool alarm = false;
};

// Verifies TAP's reported id against TS's encrypted (j, t) blob; a report
// behind the blob means TAP served stale state.
SyncCheck tc_sync_circuit_id(uint32_t tap_reported_j, const Ciphertext& blob,
                             const Key& k_T);

// --- wire format ----------------------------------------------------------
// All hops: 1-byte tag, 4-byte big-endian j, then 4-byte length-prefixed
// segments in a fixed order. Documented in docs/wire-format.md.

inline constexpr uint8_t kTagTriggerMsg = 0x01;
inline constexpr uint8_t kTagActionMsg = 0x02;
inline constexpr uint8_t kTagBundle = 0x03;

Bytes serialize_trigger_msg(const TriggerMsg& m);
std::optional<TriggerMsg> parse_trigger_msg(std::span<const uint8_t> raw);
Bytes serialize_action_msg(const ActionMsg& m);
std::optional<ActionMsg> parse_action_msg(std::span<const uint8_t> raw);
Bytes serialize_bundle(const GarbledBundle& b);
std::optional<GarbledBundle> parse_bundle(std::span<const uint8_t> raw);

}  // namespace etap
