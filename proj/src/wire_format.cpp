// On-the-wire encoding of the three message types. Every message is
//   tag(1) || j(4, big-endian) || segment*
// where each segment is len(4, big-endian) || bytes. Segment order is fixed
// per tag; see docs/wire-format.md.

#include "etap/protocol.hpp"

namespace etap {

namespace {

void put_segment(Bytes& out, std::span<const uint8_t> seg) {
  put_be32(out, static_cast<uint32_t>(seg.size()));
  out.insert(out.end(), seg.begin(), seg.end());
}

struct Reader {
  std::span<const uint8_t> raw;
  size_t pos = 0;

  bool take(size_t n, std::span<const uint8_t>& out) {
    if (raw.size() - pos < n) return false;
    out = raw.subspan(pos, n);
    pos += n;
    return true;
  }
  bool segment(std::span<const uint8_t>& out) {
    std::span<const uint8_t> len;
    if (!take(4, len)) return false;
    return take(get_be32(len), out);
  }
  bool done() const { return pos == raw.size(); }
};

Bytes labels_bytes(std::span<const Label> ls) {
  Bytes out;
  out.reserve(ls.size() * kKappaBytes);
  for (const Label& l : ls) out.insert(out.end(), l.bytes.begin(), l.bytes.end());
  return out;
}

bool bytes_labels(std::span<const uint8_t> raw, std::vector<Label>& out) {
  if (raw.size() % kKappaBytes != 0) return false;
  out.resize(raw.size() / kKappaBytes);
  for (size_t i = 0; i < out.size(); ++i)
    std::copy_n(raw.begin() + i * kKappaBytes, kKappaBytes,
                out[i].bytes.begin());
  return true;
}

Bytes header(uint8_t tag, uint32_t j) {
  Bytes out;
  out.push_back(tag);
  put_be32(out, j);
  return out;
}

bool read_header(Reader& r, uint8_t tag, uint32_t& j) {
  std::span<const uint8_t> t, jb;
  if (!r.take(1, t) || t[0] != tag) return false;
  if (!r.take(4, jb)) return false;
  j = get_be32(jb);
  return true;
}

}  // namespace

Bytes serialize_trigger_msg(const TriggerMsg& m) {
  Bytes out = header(kTagTriggerMsg, m.j);
  put_segment(out, labels_bytes(m.X));
  put_segment(out, m.ct.serialize());
  return out;
}

std::optional<TriggerMsg> parse_trigger_msg(std::span<const uint8_t> raw) {
  Reader r{raw};
  TriggerMsg m;
  std::span<const uint8_t> xs, cs;
  if (!read_header(r, kTagTriggerMsg, m.j)) return std::nullopt;
  if (!r.segment(xs) || !r.segment(cs) || !r.done()) return std::nullopt;
  if (!bytes_labels(xs, m.X)) return std::nullopt;
  auto ct = Ciphertext::parse(cs);
  if (!ct) return std::nullopt;
  m.ct = std::move(*ct);
  return m;
}

Bytes serialize_action_msg(const ActionMsg& m) {
  Bytes out = header(kTagActionMsg, m.j);
  put_segment(out, labels_bytes(m.Y));
  put_segment(out, m.ct.serialize());
  put_segment(out, m.d.s_tilde.serialize());
  put_segment(out, m.d.h_tilde);
  return out;
}

std::optional<ActionMsg> parse_action_msg(std::span<const uint8_t> raw) {
  Reader r{raw};
  ActionMsg m;
  std::span<const uint8_t> ys, cs, ss, hs;
  if (!read_header(r, kTagActionMsg, m.j)) return std::nullopt;
  if (!r.segment(ys) || !r.segment(cs) || !r.segment(ss) || !r.segment(hs) ||
      !r.done())
    return std::nullopt;
  if (!bytes_labels(ys, m.Y)) return std::nullopt;
  auto ct = Ciphertext::parse(cs);
  auto st = Ciphertext::parse(ss);
  if (!ct || !st || hs.size() != 32) return std::nullopt;
  m.ct = std::move(*ct);
  m.d.s_tilde = std::move(*st);
  std::copy(hs.begin(), hs.end(), m.d.h_tilde.begin());
  return m;
}

Bytes serialize_bundle(const GarbledBundle& b) {
  Bytes out = header(kTagBundle, b.j);
  put_segment(out, b.F.serialize());
  put_segment(out, labels_bytes(b.C));
  put_segment(out, b.d.s_tilde.serialize());
  put_segment(out, b.d.h_tilde);
  return out;
}

std::optional<GarbledBundle> parse_bundle(std::span<const uint8_t> raw) {
  Reader r{raw};
  GarbledBundle b;
  std::span<const uint8_t> fs, cs, ss, hs;
  if (!read_header(r, kTagBundle, b.j)) return std::nullopt;
  if (!r.segment(fs) || !r.segment(cs) || !r.segment(ss) || !r.segment(hs) ||
      !r.done())
    return std::nullopt;
  auto F = GarbledCircuit::parse(fs);
  if (!F) return std::nullopt;
  b.F = std::move(*F);
  if (!bytes_labels(cs, b.C)) return std::nullopt;
  auto st = Ciphertext::parse(ss);
  if (!st || hs.size() != 32) return std::nullopt;
  b.d.s_tilde = std::move(*st);
  std::copy(hs.begin(), hs.end(), b.d.h_tilde.begin());
  return b;
}

}  // namespace etap
