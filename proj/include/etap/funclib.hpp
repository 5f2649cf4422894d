#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etap/circuit.hpp"
#include "etap/crypto.hpp"
#include "etap/regex.hpp"

namespace etap {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FieldKind : uint8_t { Bool, Int, String };

// A trigger-data field. String fields are padded with 0x00 to a fixed byte
// length; optional fields carry a one-bit presence flag before the payload.
struct FieldSchema {
  std::string name;
  FieldKind kind = FieldKind::Bool;
  uint32_t byte_len = 0;  // strings only
  bool optional = false;

  uint32_t payload_bits() const {
    switch (kind) {
      case FieldKind::Bool: return 1;
      case FieldKind::Int: return 32;
      case FieldKind::String: return byte_len * 8;
    }
    return 0;
  }
  uint32_t total_bits() const { return payload_bits() + (optional ? 1 : 0); }
};

struct TriggerSchema {
  std::vector<FieldSchema> fields;

  uint32_t total_bits() const;
  // Bit offset of a field (presence bit first when optional).
  uint32_t offset_of(const std::string& name) const;
  const FieldSchema& field(const std::string& name) const;
};

struct FieldValue {
  bool present = true;
  bool b = false;
  int32_t i = 0;
  Bytes s;  // unpadded content
};

using TriggerData = std::map<std::string, FieldValue>;

// MSB-first within each byte / integer; absent optional fields are encoded
// as presence 0 with zeroed payload.
std::vector<uint8_t> serialize_trigger_bits(const TriggerSchema& schema,
                                            const TriggerData& data);

std::vector<uint8_t> bytes_to_bits(std::span<const uint8_t> bytes);
Bytes bits_to_bytes(std::span<const uint8_t> bits);
std::vector<uint8_t> int_to_bits(int32_t v);
int32_t bits_to_int(std::span<const uint8_t> bits);
Bytes pad_string(std::span<const uint8_t> content, uint32_t byte_len);
Bytes strip_padding(std::span<const uint8_t> padded);

// Escapes regex metacharacters so a literal rule argument can be embedded
// in a pattern. Alternation arguments like "mp4|avi|mov" are split on '|'
// before escaping.
std::string regex_escape(const std::string& literal);
std::string literal_alternation_pattern(const std::string& arg);

// --- circuit fragment builders (funclib) ----------------------------------
// Integer fragments use 32-bit two's complement, MSB-first Sig vectors.
namespace fn {

Sig cmp_gt(LogicBuilder& lb, std::span<const Sig> a, std::span<const Sig> b);
Sig cmp_lt(LogicBuilder& lb, std::span<const Sig> a, std::span<const Sig> b);
Sig cmp_eq(LogicBuilder& lb, std::span<const Sig> a, std::span<const Sig> b);
// Unsigned a > c for a public constant c.
Sig cmp_gt_const(LogicBuilder& lb, std::span<const Sig> a, uint64_t c);

std::vector<Sig> add(LogicBuilder& lb, std::span<const Sig> a,
                     std::span<const Sig> b);
std::vector<Sig> sub(LogicBuilder& lb, std::span<const Sig> a,
                     std::span<const Sig> b);
std::vector<Sig> mul(LogicBuilder& lb, std::span<const Sig> a,
                     std::span<const Sig> b);
// Unsigned division by a nonzero compile-time constant.
std::vector<Sig> div_const(LogicBuilder& lb, std::span<const Sig> a,
                           uint32_t divisor);

// x: padded field bits; s: constant-wire bits of the literal (may be
// shorter than the field). str_eq additionally requires the next character
// of the longer side to be padding.
Sig str_eq(LogicBuilder& lb, std::span<const Sig> x, std::span<const Sig> s);
Sig startwith(LogicBuilder& lb, std::span<const Sig> x,
              std::span<const Sig> s);
Sig endwith(LogicBuilder& lb, std::span<const Sig> x, const std::string& arg);
Sig contain(LogicBuilder& lb, std::span<const Sig> x, const std::string& arg);

// In-place extraction of the i-th delimiter-separated field; other bytes
// become padding.
std::vector<Sig> split(LogicBuilder& lb, std::span<const Sig> x, char delim,
                       uint32_t index);
// replace(s, "") — the only form the rule dataset uses.
std::vector<Sig> replace_delete(LogicBuilder& lb, std::span<const Sig> x,
                                const std::string& arg);
std::vector<Sig> truncate(LogicBuilder& lb, std::span<const Sig> x,
                          uint32_t n_chars);
std::vector<Sig> tolower(LogicBuilder& lb, std::span<const Sig> x);
std::vector<Sig> extract_phone(LogicBuilder& lb, std::span<const Sig> x);
std::vector<Sig> extract_email(LogicBuilder& lb, std::span<const Sig> x);

// keys[i]/values[i] are constant-wire bit vectors; keys padded to the
// field length. Missing key yields all-zero output.
std::vector<Sig> lookup(LogicBuilder& lb, std::span<const Sig> x,
                        const std::vector<std::vector<Sig>>& keys,
                        const std::vector<std::vector<Sig>>& values);

std::vector<Sig> mux_default(LogicBuilder& lb, Sig present,
                             std::span<const Sig> x,
                             std::span<const Sig> fallback);

// Patterns used by the extraction builders; the boundary class enforces
// non-overlapping matches and shifts the reported end back one character.
extern const char* kPhonePattern;
extern const char* kEmailPattern;
extern const char* kBoundaryClass;

std::vector<Sig> extract_bounded(LogicBuilder& lb, std::span<const Sig> x,
                                 const std::string& pattern);

}  // namespace fn

}  // namespace etap
