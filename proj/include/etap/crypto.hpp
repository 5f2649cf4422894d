#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace etap {

inline constexpr size_t kKappaBytes = 16;  // security parameter 128 bits

using Bytes = std::vector<uint8_t>;

struct Key {
  std::array<uint8_t, kKappaBytes> bytes{};

  bool operator==(const Key&) const = default;
};

// iv || body || tag on the wire; tag is HMAC-SHA256 over iv || body
// (encrypt-then-MAC), verified before any decryption is attempted.
struct Ciphertext {
  std::array<uint8_t, 16> iv{};
  Bytes body;
  std::array<uint8_t, 32> tag{};

  Bytes serialize() const;
  static std::optional<Ciphertext> parse(std::span<const uint8_t> raw);
};

// SHAKE-128 truncated to kappa bits.
std::array<uint8_t, kKappaBytes> shake128(std::span<const uint8_t> input);

std::array<uint8_t, 32> hmac_sha256(std::span<const uint8_t> key,
                                    std::span<const uint8_t> msg);
std::array<uint8_t, 32> hmac_sha256(const Key& key,
                                    std::span<const uint8_t> msg);

bool ct_equal(std::span<const uint8_t> a, std::span<const uint8_t> b);

// Deterministic byte stream: SHAKE-128(seed || counter). One instance per
// simulated party; not shared across threads.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  void fill(std::span<uint8_t> out);
  Bytes bytes(size_t n);
  Key key();
  uint64_t uniform(uint64_t bound);  // [0, bound)

 private:
  void refill();
  std::array<uint8_t, 32> seed_{};
  uint64_t counter_ = 0;
  std::array<uint8_t, kKappaBytes> buf_{};
  size_t avail_ = 0;
};

// AES-128-CBC with PKCS#7 padding; subkeys derived from `key` by hashing
// with a one-byte domain separator.
Ciphertext aead_encrypt(const Key& key, std::span<const uint8_t> plaintext,
                        Rng& rng);
std::optional<Bytes> aead_decrypt(const Key& key, const Ciphertext& ct);

struct DerivedEncoding {
  std::array<uint8_t, kKappaBytes> e_s;
  std::array<uint8_t, kKappaBytes> e_r;  // lsb forced to 1
  Key k_v;
};

// e_s = H(k_T || j || 0x00), e_r = H(k_T || j || 0x01) with lsb set,
// k_v = H(k_T || j || 0x02); j as 4-byte big-endian.
DerivedEncoding derive_encoding(const Key& k_T, uint32_t j);

Key derive_api_key(const Key& k_service, const std::string& api_url);

// Big-endian helpers used throughout the wire formats.
void put_be32(Bytes& out, uint32_t v);
void put_be64(Bytes& out, uint64_t v);
uint32_t get_be32(std::span<const uint8_t> in);
uint64_t get_be64(std::span<const uint8_t> in);

}  // namespace etap
