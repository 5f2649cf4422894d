#include "etap/funclib.hpp"

#include <algorithm>

namespace etap {

uint32_t TriggerSchema::total_bits() const {
  uint32_t n = 0;
  for (const auto& f : fields) n += f.total_bits();
  return n;
}

uint32_t TriggerSchema::offset_of(const std::string& name) const {
  uint32_t off = 0;
  for (const auto& f : fields) {
    if (f.name == name) return off;
    off += f.total_bits();
  }
  throw SchemaError("unknown field: " + name);
}

const FieldSchema& TriggerSchema::field(const std::string& name) const {
  for (const auto& f : fields)
    if (f.name == name) return f;
  throw SchemaError("unknown field: " + name);
}

std::vector<uint8_t> bytes_to_bits(std::span<const uint8_t> bytes) {
  std::vector<uint8_t> bits;
  bits.reserve(bytes.size() * 8);
  for (uint8_t b : bytes)
    for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
  return bits;
}

Bytes bits_to_bytes(std::span<const uint8_t> bits) {
  Bytes out((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1) out[i / 8] |= uint8_t(0x80 >> (i % 8));
  return out;
}

std::vector<uint8_t> int_to_bits(int32_t v) {
  uint32_t u = static_cast<uint32_t>(v);
  std::vector<uint8_t> bits(32);
  for (int i = 0; i < 32; ++i) bits[i] = (u >> (31 - i)) & 1;
  return bits;
}

int32_t bits_to_int(std::span<const uint8_t> bits) {
  uint32_t u = 0;
  for (size_t i = 0; i < 32 && i < bits.size(); ++i)
    u = (u << 1) | (bits[i] & 1);
  return static_cast<int32_t>(u);
}

Bytes pad_string(std::span<const uint8_t> content, uint32_t byte_len) {
  if (content.size() > byte_len)
    throw SchemaError("string longer than padded field length");
  Bytes out(content.begin(), content.end());
  out.resize(byte_len, 0x00);
  return out;
}

Bytes strip_padding(std::span<const uint8_t> padded) {
  Bytes out;
  for (uint8_t b : padded)
    if (b != 0x00) out.push_back(b);
  return out;
}

std::vector<uint8_t> serialize_trigger_bits(const TriggerSchema& schema,
                                            const TriggerData& data) {
  std::vector<uint8_t> bits;
  bits.reserve(schema.total_bits());
  for (const auto& f : schema.fields) {
    auto it = data.find(f.name);
    const FieldValue* v = it == data.end() ? nullptr : &it->second;
    bool present = v && v->present;
    if (f.optional) bits.push_back(present ? 1 : 0);
    if (!present) {
      if (!f.optional && !v)
        throw SchemaError("missing required field: " + f.name);
      bits.insert(bits.end(), f.payload_bits(), 0);
      continue;
    }
    switch (f.kind) {
      case FieldKind::Bool: bits.push_back(v->b ? 1 : 0); break;
      case FieldKind::Int: {
        auto ib = int_to_bits(v->i);
        bits.insert(bits.end(), ib.begin(), ib.end());
        break;
      }
      case FieldKind::String: {
        auto sb = bytes_to_bits(pad_string(v->s, f.byte_len));
        bits.insert(bits.end(), sb.begin(), sb.end());
        break;
      }
    }
  }
  return bits;
}

std::string regex_escape(const std::string& literal) {
  std::string out;
  for (char c : literal) {
    if (std::string("\\.[]()|*+?{}^$-").find(c) != std::string::npos)
      out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string literal_alternation_pattern(const std::string& arg) {
  std::string out = "(";
  std::string cur;
  for (size_t i = 0;; ++i) {
    if (i == arg.size() || arg[i] == '|') {
      if (out.size() > 1) out.push_back('|');
      out += regex_escape(cur);
      cur.clear();
      if (i == arg.size()) break;
    } else {
      cur.push_back(arg[i]);
    }
  }
  out.push_back(')');
  return out;
}

namespace fn {

const char* kPhonePattern =
    "\\d\\d\\d[-. ]\\d\\d\\d[-. ]\\d\\d\\d\\d";
const char* kEmailPattern =
    "[A-Za-z0-9_.]+@[A-Za-z0-9_]+\\.[A-Za-z]+";
const char* kBoundaryClass = "[^A-Za-z0-9]";

namespace {

// Unsigned greater-than over MSB-first bit vectors of equal width,
// folded from the LSB up: g = (a_k != b_k) ? a_k : g.
Sig unsigned_gt(LogicBuilder& lb, std::span<const Sig> a,
                std::span<const Sig> b) {
  Sig g = Sig::zero();
  for (size_t pos = a.size(); pos > 0; --pos) {
    Sig ai = a[pos - 1];
    Sig bi = b[pos - 1];
    g = lb.mux(lb.lxor(ai, bi), ai, g);
  }
  return g;
}

std::vector<Sig> const_bits(uint64_t c, size_t width) {
  std::vector<Sig> out(width);
  for (size_t i = 0; i < width; ++i)
    out[i] = Sig::of_bit((c >> (width - 1 - i)) & 1);
  return out;
}

}  // namespace

Sig cmp_gt(LogicBuilder& lb, std::span<const Sig> a, std::span<const Sig> b) {
  // Signed comparison: flip the sign bits and compare unsigned.
  std::vector<Sig> au(a.begin(), a.end()), bu(b.begin(), b.end());
  au[0] = lb.lnot(au[0]);
  bu[0] = lb.lnot(bu[0]);
  return unsigned_gt(lb, au, bu);
}

Sig cmp_lt(LogicBuilder& lb, std::span<const Sig> a, std::span<const Sig> b) {
  return cmp_gt(lb, b, a);
}

Sig cmp_eq(LogicBuilder& lb, std::span<const Sig> a, std::span<const Sig> b) {
  Sig r = Sig::one();
  for (size_t i = 0; i < a.size(); ++i)
    r = lb.land(r, lb.lnot(lb.lxor(a[i], b[i])));
  return r;
}

Sig cmp_gt_const(LogicBuilder& lb, std::span<const Sig> a, uint64_t c) {
  auto cb = const_bits(c, a.size());
  return unsigned_gt(lb, a, cb);
}

std::vector<Sig> add(LogicBuilder& lb, std::span<const Sig> a,
                     std::span<const Sig> b) {
  std::vector<Sig> sum(a.size());
  Sig carry = Sig::zero();
  for (size_t pos = a.size(); pos > 0; --pos) {
    size_t i = pos - 1;  // LSB first
    Sig ai = a[i], bi = b[i];
    sum[i] = lb.lxor(lb.lxor(ai, bi), carry);
    carry = lb.lxor(carry, lb.land(lb.lxor(ai, carry), lb.lxor(bi, carry)));
  }
  return sum;
}

std::vector<Sig> sub(LogicBuilder& lb, std::span<const Sig> a,
                     std::span<const Sig> b) {
  // a + ~b + 1
  std::vector<Sig> sum(a.size());
  Sig carry = Sig::one();
  for (size_t pos = a.size(); pos > 0; --pos) {
    size_t i = pos - 1;
    Sig ai = a[i], bi = lb.lnot(b[i]);
    sum[i] = lb.lxor(lb.lxor(ai, bi), carry);
    carry = lb.lxor(carry, lb.land(lb.lxor(ai, carry), lb.lxor(bi, carry)));
  }
  return sum;
}

std::vector<Sig> mul(LogicBuilder& lb, std::span<const Sig> a,
                     std::span<const Sig> b) {
  const size_t w = a.size();
  std::vector<Sig> acc(w, Sig::zero());
  for (size_t k = 0; k < w; ++k) {
    Sig bk = b[w - 1 - k];  // bit of weight 2^k
    // Partial product a << k, truncated to w bits.
    std::vector<Sig> pp(w, Sig::zero());
    for (size_t i = 0; i + k < w; ++i)
      pp[i] = lb.land(a[i + k], bk);
    acc = add(lb, acc, pp);
  }
  return acc;
}

std::vector<Sig> div_const(LogicBuilder& lb, std::span<const Sig> a,
                           uint32_t divisor) {
  if (divisor == 0) throw CircuitError("division by zero constant");
  const size_t w = a.size();
  // Restoring division, remainder held in w+1 bits (MSB first).
  std::vector<Sig> rem(w + 1, Sig::zero());
  std::vector<Sig> q(w);
  auto dbits = const_bits(divisor, w + 1);
  for (size_t i = 0; i < w; ++i) {
    rem.erase(rem.begin());
    rem.push_back(a[i]);
    // ge = !(d > rem)
    Sig ge = lb.lnot(unsigned_gt(lb, dbits, rem));
    q[i] = ge;
    // rem -= ge ? d : 0
    std::vector<Sig> d_masked(w + 1);
    for (size_t j = 0; j <= w; ++j) d_masked[j] = lb.land(dbits[j], ge);
    rem = sub(lb, rem, d_masked);
  }
  return q;
}

Sig str_eq(LogicBuilder& lb, std::span<const Sig> x, std::span<const Sig> s) {
  size_t n = std::min(x.size(), s.size());
  Sig r = Sig::one();
  for (size_t i = 0; i < n; ++i)
    r = lb.land(r, lb.lnot(lb.lxor(x[i], s[i])));
  // The next remaining character of the longer side must be padding.
  std::span<const Sig> longer = x.size() >= s.size() ? x : s;
  for (size_t i = n; i < n + 8 && i < longer.size(); ++i)
    r = lb.land(r, lb.lnot(longer[i]));
  return r;
}

Sig startwith(LogicBuilder& lb, std::span<const Sig> x,
              std::span<const Sig> s) {
  size_t n = std::min(x.size(), s.size());
  Sig r = Sig::one();
  for (size_t i = 0; i < n; ++i)
    r = lb.land(r, lb.lnot(lb.lxor(x[i], s[i])));
  return r;
}

Sig endwith(LogicBuilder& lb, std::span<const Sig> x, const std::string& arg) {
  // Whole padded field must match  any* (alt) padding* .
  std::string pattern =
      "(.|\\x00)*" + literal_alternation_pattern(arg) + "(\\x00)*";
  Dfa dfa = compile_regex(pattern);
  return dfa_match(lb, dfa, x);
}

Sig contain(LogicBuilder& lb, std::span<const Sig> x, const std::string& arg) {
  std::string pattern =
      "(.|\\x00)*" + literal_alternation_pattern(arg) + "(.|\\x00)*";
  Dfa dfa = compile_regex(pattern);
  return dfa_match(lb, dfa, x);
}

std::vector<Sig> split(LogicBuilder& lb, std::span<const Sig> x, char delim,
                       uint32_t index) {
  const size_t n_bytes = x.size() / 8;
  // One-hot delimiter count, saturating at index + 1.
  std::vector<Sig> count(index + 2, Sig::zero());
  count[0] = Sig::one();
  std::vector<Sig> y(x.size(), Sig::zero());
  auto delim_bits = const_bits(static_cast<uint8_t>(delim), 8);
  for (size_t t = 0; t < n_bytes; ++t) {
    auto byte = x.subspan(t * 8, 8);
    Sig is_d = cmp_eq(lb, byte, delim_bits);
    Sig in_field = lb.land(count[index], lb.lnot(is_d));
    for (size_t j = 0; j < 8; ++j) y[t * 8 + j] = lb.land(in_field, byte[j]);
    // Advance the count: one-hot shift when a delimiter is seen.
    std::vector<Sig> nxt(count.size());
    for (size_t k = 0; k < count.size(); ++k) {
      Sig stay = lb.land(count[k], lb.lnot(is_d));
      Sig enter = k > 0 ? lb.land(count[k - 1], is_d) : Sig::zero();
      if (k + 1 == count.size()) {
        // Saturating top state also keeps itself on a delimiter.
        stay = count[k];
      }
      nxt[k] = lb.lxor(stay, enter);
    }
    count = std::move(nxt);
  }
  return y;
}

std::vector<Sig> replace_delete(LogicBuilder& lb, std::span<const Sig> x,
                                const std::string& arg) {
  return replace_fragment(lb, literal_alternation_pattern(arg), x,
                          ReplaceMode::Delete);
}

std::vector<Sig> truncate(LogicBuilder& lb, std::span<const Sig> x,
                          uint32_t n_chars) {
  (void)lb;
  std::vector<Sig> y(x.begin(), x.end());
  for (size_t i = size_t(n_chars) * 8; i < y.size(); ++i) y[i] = Sig::zero();
  return y;
}

std::vector<Sig> tolower(LogicBuilder& lb, std::span<const Sig> x) {
  std::vector<Sig> y(x.begin(), x.end());
  for (size_t t = 0; t + 8 <= x.size(); t += 8) {
    auto c = x.subspan(t, 8);
    // 'A'..'Z' is 010 00001 .. 010 11010.
    Sig prefix = lb.land(lb.land(lb.lnot(c[0]), c[1]), lb.lnot(c[2]));
    std::vector<Sig> low5(c.begin() + 3, c.end());
    Sig nonzero = Sig::zero();
    for (const Sig& b : low5) nonzero = lb.lor(nonzero, b);
    Sig le26 = lb.lnot(cmp_gt_const(lb, low5, 26));
    Sig is_upper = lb.land(lb.land(prefix, nonzero), le26);
    y[t + 2] = lb.lxor(c[2], is_upper);  // the 0x20 bit
  }
  return y;
}

std::vector<Sig> extract_bounded(LogicBuilder& lb, std::span<const Sig> x,
                                 const std::string& pattern) {
  const size_t n = x.size();
  std::string bounded = "(" + pattern + ")" + kBoundaryClass;
  // End markers of the bounded pattern land on the boundary character;
  // shift them back one character to mark the true match end.
  auto e_raw = end_markers(lb, bounded, x);
  std::vector<Sig> e(n, Sig::zero());
  for (size_t i = 0; i + 8 < n; ++i) e[i] = e_raw[i + 8];
  auto b = begin_markers(lb, bounded, x);
  auto m = match_mask(lb, e, b);
  std::vector<Sig> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = lb.land(m[i], x[i]);
  return y;
}

std::vector<Sig> extract_phone(LogicBuilder& lb, std::span<const Sig> x) {
  return extract_bounded(lb, x, kPhonePattern);
}

std::vector<Sig> extract_email(LogicBuilder& lb, std::span<const Sig> x) {
  return extract_bounded(lb, x, kEmailPattern);
}

std::vector<Sig> lookup(LogicBuilder& lb, std::span<const Sig> x,
                        const std::vector<std::vector<Sig>>& keys,
                        const std::vector<std::vector<Sig>>& values) {
  size_t out_bits = values.empty() ? 0 : values[0].size();
  std::vector<Sig> y(out_bits, Sig::zero());
  for (size_t i = 0; i < keys.size(); ++i) {
    // Fold from the padded tail so the zero-suffix checks are identical
    // gates across entries and get shared.
    Sig hit = Sig::one();
    for (size_t j = x.size(); j-- > 0;)
      hit = lb.land(hit, lb.lnot(lb.lxor(x[j], keys[i][j])));
    // y = hit ? v : y, folded as in the mux-chain construction.
    for (size_t j = 0; j < out_bits; ++j)
      y[j] = lb.lxor(lb.land(lb.lxor(values[i][j], y[j]), hit), y[j]);
  }
  return y;
}

std::vector<Sig> mux_default(LogicBuilder& lb, Sig present,
                             std::span<const Sig> x,
                             std::span<const Sig> fallback) {
  std::vector<Sig> y(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = lb.mux(present, x[i], fallback[i]);
  return y;
}

}  // namespace fn
}  // namespace etap
