#include "etap/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstring>
#include <stdexcept>

namespace etap {

namespace {

struct ShakeCtx {
  EVP_MD_CTX* ctx;
  const EVP_MD* md;
  ShakeCtx() {
    ctx = EVP_MD_CTX_new();
    md = EVP_shake128();
    if (!ctx || !md) throw std::runtime_error("shake128 init failed");
  }
  ~ShakeCtx() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::array<uint8_t, kKappaBytes> shake128(std::span<const uint8_t> input) {
  thread_local ShakeCtx s;
  std::array<uint8_t, kKappaBytes> out{};
  if (EVP_DigestInit_ex(s.ctx, s.md, nullptr) != 1 ||
      EVP_DigestUpdate(s.ctx, input.data(), input.size()) != 1 ||
      EVP_DigestFinalXOF(s.ctx, out.data(), out.size()) != 1)
    throw std::runtime_error("shake128 failed");
  return out;
}

std::array<uint8_t, 32> hmac_sha256(std::span<const uint8_t> key,
                                    std::span<const uint8_t> msg) {
  std::array<uint8_t, 32> out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(),
            msg.size(), out.data(), &len) ||
      len != 32)
    throw std::runtime_error("hmac failed");
  return out;
}

std::array<uint8_t, 32> hmac_sha256(const Key& key,
                                    std::span<const uint8_t> msg) {
  return hmac_sha256(std::span<const uint8_t>(key.bytes), msg);
}

bool ct_equal(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  if (a.size() != b.size()) return false;
  uint8_t acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc |= a[i] ^ b[i];
  return acc == 0;
}

Rng::Rng(uint64_t seed) {
  Bytes tag = {'e', 't', 'a', 'p', '-', 'r', 'n', 'g'};
  for (int i = 7; i >= 0; --i) tag.push_back(uint8_t(seed >> (8 * i)));
  auto h = shake128(tag);
  std::memcpy(seed_.data(), h.data(), h.size());
  auto h2 = shake128(std::span<const uint8_t>(h));
  std::memcpy(seed_.data() + 16, h2.data(), h2.size());
}

void Rng::refill() {
  Bytes in(seed_.begin(), seed_.end());
  put_be64(in, counter_++);
  buf_ = shake128(in);
  avail_ = buf_.size();
}

void Rng::fill(std::span<uint8_t> out) {
  for (uint8_t& o : out) {
    if (avail_ == 0) refill();
    o = buf_[buf_.size() - avail_];
    --avail_;
  }
}

Bytes Rng::bytes(size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

Key Rng::key() {
  Key k;
  fill(k.bytes);
  return k;
}

uint64_t Rng::uniform(uint64_t bound) {
  if (bound == 0) return 0;
  // Rejection sampling over 64-bit draws.
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    std::array<uint8_t, 8> raw;
    fill(raw);
    uint64_t v = get_be64(raw);
    if (v < limit) return v % bound;
  }
}

Bytes Ciphertext::serialize() const {
  Bytes out(iv.begin(), iv.end());
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

std::optional<Ciphertext> Ciphertext::parse(std::span<const uint8_t> raw) {
  if (raw.size() < 16 + 32) return std::nullopt;
  Ciphertext ct;
  std::memcpy(ct.iv.data(), raw.data(), 16);
  ct.body.assign(raw.begin() + 16, raw.end() - 32);
  std::memcpy(ct.tag.data(), raw.data() + raw.size() - 32, 32);
  return ct;
}

namespace {

Key subkey(const Key& key, uint8_t domain) {
  Bytes in(key.bytes.begin(), key.bytes.end());
  in.push_back(domain);
  Key out;
  out.bytes = shake128(in);
  return out;
}

std::optional<Bytes> cbc(const Key& k, std::span<const uint8_t> iv,
                         std::span<const uint8_t> data, bool enc) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("cipher ctx");
  Bytes out(data.size() + 16);
  static const uint8_t dummy = 0;
  const uint8_t* src = data.empty() ? &dummy : data.data();
  int len1 = 0, len2 = 0;
  bool ok = EVP_CipherInit_ex(ctx, EVP_aes_128_cbc(), nullptr, k.bytes.data(),
                              iv.data(), enc ? 1 : 0) == 1 &&
            EVP_CipherUpdate(ctx, out.data(), &len1, src,
                             static_cast<int>(data.size())) == 1 &&
            EVP_CipherFinal_ex(ctx, out.data() + len1, &len2) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) return std::nullopt;
  out.resize(size_t(len1) + size_t(len2));
  return out;
}

}  // namespace

Ciphertext aead_encrypt(const Key& key, std::span<const uint8_t> plaintext,
                        Rng& rng) {
  Key k_enc = subkey(key, 0x00);
  Key k_mac = subkey(key, 0x01);
  Ciphertext ct;
  rng.fill(ct.iv);
  auto body = cbc(k_enc, ct.iv, plaintext, /*enc=*/true);
  if (!body) throw std::runtime_error("cbc encrypt failed");
  ct.body = std::move(*body);
  Bytes mac_input(ct.iv.begin(), ct.iv.end());
  mac_input.insert(mac_input.end(), ct.body.begin(), ct.body.end());
  ct.tag = hmac_sha256(k_mac, mac_input);
  return ct;
}

std::optional<Bytes> aead_decrypt(const Key& key, const Ciphertext& ct) {
  Key k_enc = subkey(key, 0x00);
  Key k_mac = subkey(key, 0x01);
  Bytes mac_input(ct.iv.begin(), ct.iv.end());
  mac_input.insert(mac_input.end(), ct.body.begin(), ct.body.end());
  auto tag = hmac_sha256(k_mac, mac_input);
  if (!ct_equal(tag, ct.tag)) return std::nullopt;
  if (ct.body.empty() || ct.body.size() % 16 != 0) return std::nullopt;
  return cbc(k_enc, ct.iv, ct.body, /*enc=*/false);
}

DerivedEncoding derive_encoding(const Key& k_T, uint32_t j) {
  DerivedEncoding d;
  Bytes in(k_T.bytes.begin(), k_T.bytes.end());
  put_be32(in, j);
  in.push_back(0x00);
  d.e_s = shake128(in);
  in.back() = 0x01;
  d.e_r = shake128(in);
  d.e_r[kKappaBytes - 1] |= 0x01;  // lsb(e_r) = 1 for point-and-permute
  in.back() = 0x02;
  d.k_v.bytes = shake128(in);
  return d;
}

Key derive_api_key(const Key& k_service, const std::string& api_url) {
  Bytes in(k_service.bytes.begin(), k_service.bytes.end());
  in.insert(in.end(), api_url.begin(), api_url.end());
  Key out;
  out.bytes = shake128(in);
  return out;
}

void put_be32(Bytes& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_be64(Bytes& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

uint32_t get_be32(std::span<const uint8_t> in) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in[i];
  return v;
}

uint64_t get_be64(std::span<const uint8_t> in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

}  // namespace etap
