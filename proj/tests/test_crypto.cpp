#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "etap/crypto.hpp"

using namespace etap;

namespace {

Bytes from_hex(const std::string& hex) {
  Bytes out;
  for (size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(uint8_t(std::stoi(hex.substr(i, 2), nullptr, 16)));
  return out;
}

std::string to_hex(std::span<const uint8_t> b) {
  static const char* d = "0123456789abcdef";
  std::string s;
  for (uint8_t x : b) {
    s.push_back(d[x >> 4]);
    s.push_back(d[x & 15]);
  }
  return s;
}

Bytes str_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST_CASE("shake128 known answers") {
  CHECK(to_hex(shake128({})) == "7f9c2ba4e88f827d616045507605853e");
  CHECK(to_hex(shake128(str_bytes("abc"))) ==
        "5881092dd818bf5cf8a3ddb793fbcba7");
}

TEST_CASE("hmac-sha256 rfc 4231 test case 1") {
  Bytes key(20, 0x0b);
  auto mac = hmac_sha256(key, str_bytes("Hi There"));
  CHECK(to_hex(mac) ==
        "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
}

TEST_CASE("hmac-sha256 with 16-byte key struct") {
  Key k;
  for (int i = 0; i < 16; ++i) k.bytes[i] = uint8_t(i);
  auto mac = hmac_sha256(k, str_bytes("etap"));
  CHECK(to_hex(mac) ==
        "774eaf12b325541e8c925d00084c8c6db61843ca5ca3e00affe122148e9deb55");
}

TEST_CASE("rng determinism and divergence") {
  Rng r1(1), r2(1);
  auto a = r1.bytes(100);
  auto b = r2.bytes(100);
  CHECK(a == b);
  Rng r3(2);
  CHECK(a != r3.bytes(100));
  // Stream continues, no repeats of the first block.
  CHECK(r1.bytes(16) != Bytes(a.begin(), a.begin() + 16));
}

TEST_CASE("rng uniform stays in range") {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = r.uniform(17);
    CHECK(v < 17);
  }
}

TEST_CASE("aead round trip") {
  Key k;
  for (int i = 0; i < 16; ++i) k.bytes[i] = uint8_t(0xa0 + i);
  Rng rng(4);
  for (size_t len : {size_t(0), size_t(1), size_t(15), size_t(16), size_t(17),
                     size_t(100), size_t(1000)}) {
    Bytes pt = rng.bytes(len);
    Ciphertext ct = aead_encrypt(k, pt, rng);
    auto back = aead_decrypt(k, ct);
    REQUIRE(back.has_value());
    CHECK(*back == pt);
  }
}

TEST_CASE("aead rejects tampering anywhere") {
  Key k;
  k.bytes.fill(0x55);
  Rng rng(4);
  Bytes pt = str_bytes("the quick brown fox");
  Ciphertext ct = aead_encrypt(k, pt, rng);
  Bytes raw = ct.serialize();
  for (size_t i = 0; i < raw.size(); ++i) {
    Bytes bad = raw;
    bad[i] ^= 0x01;
    auto parsed = Ciphertext::parse(bad);
    REQUIRE(parsed.has_value());
    CHECK_FALSE(aead_decrypt(k, *parsed).has_value());
  }
  // Wrong key fails too.
  Key k2 = k;
  k2.bytes[0] ^= 1;
  CHECK_FALSE(aead_decrypt(k2, ct).has_value());
}

TEST_CASE("ciphertext wire layout is iv || body || tag") {
  Key k;
  k.bytes.fill(1);
  Rng rng(4);
  Ciphertext ct = aead_encrypt(k, str_bytes("x"), rng);
  Bytes raw = ct.serialize();
  CHECK(raw.size() == 16 + 16 + 32);  // one padded block
  auto parsed = Ciphertext::parse(raw);
  REQUIRE(parsed.has_value());
  CHECK(parsed->iv == ct.iv);
  CHECK(parsed->body == ct.body);
  CHECK(parsed->tag == ct.tag);
  CHECK_FALSE(Ciphertext::parse(Bytes(10)).has_value());
}

TEST_CASE("derive_encoding is keyed and per-circuit") {
  Key kt;
  kt.bytes.fill(7);
  auto d1 = derive_encoding(kt, 1);
  auto d1b = derive_encoding(kt, 1);
  auto d2 = derive_encoding(kt, 2);
  CHECK(d1.e_s == d1b.e_s);
  CHECK(d1.e_r == d1b.e_r);
  CHECK(d1.k_v == d1b.k_v);
  CHECK(d1.e_s != d2.e_s);
  CHECK(d1.e_r != d2.e_r);
  CHECK(d1.k_v != d2.k_v);
  CHECK(d1.e_s != d1.e_r);
  // Global offset must have its permute bit set for point-and-permute.
  CHECK((d1.e_r[15] & 1) == 1);
  CHECK((d2.e_r[15] & 1) == 1);
}

TEST_CASE("ct_equal") {
  Bytes a = {1, 2, 3}, b = {1, 2, 3}, c = {1, 2, 4};
  CHECK(ct_equal(a, b));
  CHECK_FALSE(ct_equal(a, c));
  CHECK_FALSE(ct_equal(a, Bytes{1, 2}));
}

TEST_CASE("be32/be64 helpers") {
  Bytes b;
  put_be32(b, 0x01020304u);
  put_be64(b, 0x0a0b0c0d0e0f1011ull);
  CHECK(b.size() == 12);
  CHECK(get_be32(b) == 0x01020304u);
  CHECK(get_be64(std::span(b).subspan(4)) == 0x0a0b0c0d0e0f1011ull);
}
