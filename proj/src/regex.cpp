#include "etap/regex.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <ostream>

namespace etap {

// --------------------------------------------------------------------------
// AST
// --------------------------------------------------------------------------

using ByteSet = std::bitset<256>;

struct RegexAst {
  enum Kind { Class, Concat, Alt, Star, Plus, Opt, Empty } kind = Empty;
  ByteSet cls;
  std::vector<RegexAstPtr> children;

  static RegexAstPtr make(Kind k) {
    auto n = std::make_shared<RegexAst>();
    n->kind = k;
    return n;
  }
  static RegexAstPtr make_class(const ByteSet& s) {
    auto n = make(Class);
    n->cls = s;
    return n;
  }
};

namespace {

ByteSet any_byte() {
  ByteSet s;
  s.set();
  return s;
}

ByteSet any_but_padding() {
  ByteSet s = any_byte();
  s.reset(0);
  return s;
}

class Parser {
 public:
  explicit Parser(const std::string& p) : p_(p) {}

  RegexAstPtr parse() {
    RegexAstPtr r = alternation();
    if (pos_ != p_.size())
      fail(std::string("unexpected '") + p_[pos_] + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw RegexError("regex \"" + p_ + "\": " + what);
  }
  bool eof() const { return pos_ >= p_.size(); }
  char peek() const { return p_[pos_]; }

  RegexAstPtr alternation() {
    auto alt = RegexAst::make(RegexAst::Alt);
    alt->children.push_back(concat());
    while (!eof() && peek() == '|') {
      ++pos_;
      alt->children.push_back(concat());
    }
    if (alt->children.size() == 1) return alt->children[0];
    return alt;
  }

  RegexAstPtr concat() {
    auto cat = RegexAst::make(RegexAst::Concat);
    while (!eof() && peek() != '|' && peek() != ')')
      cat->children.push_back(repetition());
    if (cat->children.empty()) return RegexAst::make(RegexAst::Empty);
    if (cat->children.size() == 1) return cat->children[0];
    return cat;
  }

  RegexAstPtr repetition() {
    RegexAstPtr a = atom();
    while (!eof()) {
      char c = peek();
      RegexAst::Kind k;
      if (c == '*') k = RegexAst::Star;
      else if (c == '+') k = RegexAst::Plus;
      else if (c == '?') k = RegexAst::Opt;
      else if (c == '{') fail("unsupported construct '{n,m}'");
      else break;
      ++pos_;
      auto rep = RegexAst::make(k);
      rep->children.push_back(a);
      a = rep;
    }
    return a;
  }

  RegexAstPtr atom() {
    if (eof()) fail("dangling operator");
    char c = p_[pos_++];
    switch (c) {
      case '(': {
        RegexAstPtr inner = alternation();
        if (eof() || p_[pos_] != ')') fail("unbalanced '('");
        ++pos_;
        return inner;
      }
      case '[': return klass();
      case '.': {
        return RegexAst::make_class(any_but_padding());
      }
      case '\\': {
        ByteSet s = escape();
        return RegexAst::make_class(s);
      }
      case '*':
      case '+':
      case '?': fail("dangling repetition operator");
      case '^': fail("unsupported construct '^' (anchors)");
      case '$': fail("unsupported construct '$' (anchors)");
      case '{': fail("unsupported construct '{n,m}'");
      default: {
        ByteSet s;
        s.set(static_cast<uint8_t>(c));
        return RegexAst::make_class(s);
      }
    }
  }

  // After a backslash. Returns the byte set the escape denotes.
  ByteSet escape() {
    if (eof()) fail("trailing backslash");
    char c = p_[pos_++];
    ByteSet s;
    switch (c) {
      case 'd':
        for (int b = '0'; b <= '9'; ++b) s.set(b);
        return s;
      case 'w':
        for (int b = 'a'; b <= 'z'; ++b) s.set(b);
        for (int b = 'A'; b <= 'Z'; ++b) s.set(b);
        for (int b = '0'; b <= '9'; ++b) s.set(b);
        s.set('_');
        return s;
      case 's':
        s.set(' ');
        s.set('\t');
        s.set('\r');
        s.set('\n');
        return s;
      case 'x': {
        if (pos_ + 2 > p_.size()) fail("bad \\x escape");
        auto hex = [&](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          fail("bad \\x escape");
        };
        int v = hex(p_[pos_]) * 16 + hex(p_[pos_ + 1]);
        pos_ += 2;
        s.set(v);
        return s;
      }
      case '0':
        s.set(0);
        return s;
      case 'n': s.set('\n'); return s;
      case 't': s.set('\t'); return s;
      case 'r': s.set('\r'); return s;
      default:
        s.set(static_cast<uint8_t>(c));
        return s;
    }
  }

  RegexAstPtr klass() {
    ByteSet s;
    bool negate = false;
    if (!eof() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    bool first = true;
    while (true) {
      if (eof()) fail("unbalanced '['");
      char c = p_[pos_];
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      ByteSet item;
      uint8_t lo;
      bool single = true;
      if (c == '\\') {
        ++pos_;
        item = escape();
        if (item.count() != 1) {
          s |= item;  // \d etc. inside a class
          continue;
        }
        for (int b = 0; b < 256; ++b)
          if (item.test(b)) lo = uint8_t(b);
      } else {
        ++pos_;
        lo = static_cast<uint8_t>(c);
      }
      if (!eof() && peek() == '-' && pos_ + 1 < p_.size() &&
          p_[pos_ + 1] != ']') {
        pos_ += 1;
        char hc = p_[pos_++];
        uint8_t hi;
        if (hc == '\\') {
          ByteSet e = escape();
          if (e.count() != 1) fail("bad range bound");
          hi = 0;
          for (int b = 0; b < 256; ++b)
            if (e.test(b)) hi = uint8_t(b);
        } else {
          hi = static_cast<uint8_t>(hc);
        }
        if (hi < lo) fail("inverted range");
        for (int b = lo; b <= hi; ++b) s.set(b);
        single = false;
      }
      if (single) s.set(lo);
    }
    if (negate) s = ~s;
    return RegexAst::make_class(s);
  }

  const std::string& p_;
  size_t pos_ = 0;
};

}  // namespace

RegexAstPtr parse_regex(const std::string& pattern) {
  return Parser(pattern).parse();
}

RegexAstPtr reverse_ast(const RegexAstPtr& ast) {
  auto n = std::make_shared<RegexAst>(*ast);
  n->children.clear();
  for (const auto& c : ast->children) n->children.push_back(reverse_ast(c));
  if (n->kind == RegexAst::Concat)
    std::reverse(n->children.begin(), n->children.end());
  return n;
}

// --------------------------------------------------------------------------
// Thompson NFA over byte classes, then subset construction to a byte DFA.
// --------------------------------------------------------------------------

namespace {

struct Nfa {
  struct Node {
    std::vector<std::pair<ByteSet, uint32_t>> edges;
    std::vector<uint32_t> eps;
  };
  std::vector<Node> nodes;
  uint32_t add() {
    nodes.emplace_back();
    return static_cast<uint32_t>(nodes.size() - 1);
  }
};

// Returns (entry, exit).
std::pair<uint32_t, uint32_t> thompson(Nfa& nfa, const RegexAstPtr& ast) {
  switch (ast->kind) {
    case RegexAst::Empty: {
      uint32_t s = nfa.add();
      return {s, s};
    }
    case RegexAst::Class: {
      uint32_t s = nfa.add(), t = nfa.add();
      nfa.nodes[s].edges.push_back({ast->cls, t});
      return {s, t};
    }
    case RegexAst::Concat: {
      uint32_t entry = 0, exit = 0;
      bool first = true;
      for (const auto& c : ast->children) {
        auto [s, t] = thompson(nfa, c);
        if (first) {
          entry = s;
          first = false;
        } else {
          nfa.nodes[exit].eps.push_back(s);
        }
        exit = t;
      }
      return {entry, exit};
    }
    case RegexAst::Alt: {
      uint32_t s = nfa.add(), t = nfa.add();
      for (const auto& c : ast->children) {
        auto [cs, ct] = thompson(nfa, c);
        nfa.nodes[s].eps.push_back(cs);
        nfa.nodes[ct].eps.push_back(t);
      }
      return {s, t};
    }
    case RegexAst::Star: {
      uint32_t s = nfa.add(), t = nfa.add();
      auto [cs, ct] = thompson(nfa, ast->children[0]);
      nfa.nodes[s].eps.push_back(cs);
      nfa.nodes[s].eps.push_back(t);
      nfa.nodes[ct].eps.push_back(cs);
      nfa.nodes[ct].eps.push_back(t);
      return {s, t};
    }
    case RegexAst::Plus: {
      auto [cs, ct] = thompson(nfa, ast->children[0]);
      nfa.nodes[ct].eps.push_back(cs);
      return {cs, ct};
    }
    case RegexAst::Opt: {
      uint32_t s = nfa.add(), t = nfa.add();
      auto [cs, ct] = thompson(nfa, ast->children[0]);
      nfa.nodes[s].eps.push_back(cs);
      nfa.nodes[s].eps.push_back(t);
      nfa.nodes[ct].eps.push_back(t);
      return {s, t};
    }
  }
  throw RegexError("corrupt AST");
}

using StateSet = std::vector<uint32_t>;  // sorted

void closure(const Nfa& nfa, StateSet& set) {
  std::vector<uint8_t> in(nfa.nodes.size(), 0);
  std::deque<uint32_t> work(set.begin(), set.end());
  for (uint32_t s : set) in[s] = 1;
  while (!work.empty()) {
    uint32_t s = work.front();
    work.pop_front();
    for (uint32_t t : nfa.nodes[s].eps)
      if (!in[t]) {
        in[t] = 1;
        work.push_back(t);
      }
  }
  set.clear();
  for (uint32_t i = 0; i < in.size(); ++i)
    if (in[i]) set.push_back(i);
}

struct ByteDfa {
  std::vector<std::array<uint32_t, 256>> next;
  std::vector<uint8_t> accepting;
  uint32_t start = 0;
};

ByteDfa determinize(const Nfa& nfa, uint32_t entry, uint32_t exit) {
  ByteDfa dfa;
  std::map<StateSet, uint32_t> ids;
  std::deque<StateSet> work;

  auto intern = [&](StateSet set) -> uint32_t {
    closure(nfa, set);
    auto it = ids.find(set);
    if (it != ids.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(dfa.next.size());
    ids.emplace(set, id);
    dfa.next.emplace_back();
    dfa.accepting.push_back(
        std::binary_search(set.begin(), set.end(), exit) ? 1 : 0);
    work.push_back(set);
    return id;
  };

  dfa.start = intern({entry});
  while (!work.empty()) {
    StateSet set = work.front();
    work.pop_front();
    uint32_t id = ids.at(set);
    for (int byte = 0; byte < 256; ++byte) {
      StateSet moved;
      for (uint32_t s : set)
        for (const auto& [cls, t] : nfa.nodes[s].edges)
          if (cls.test(byte)) moved.push_back(t);
      std::sort(moved.begin(), moved.end());
      moved.erase(std::unique(moved.begin(), moved.end()), moved.end());
      dfa.next[id][byte] = intern(std::move(moved));
    }
  }
  return dfa;
}

// Expand each byte transition to 8 bit transitions. Intermediate (mid-byte)
// states are never accepting.
struct BitDfa {
  std::vector<std::array<uint32_t, 2>> next;
  std::vector<uint8_t> accepting;
  uint32_t start = 0;
};

BitDfa expand_bits(const ByteDfa& bdfa, BitOrder order) {
  BitDfa out;
  // key: (byte state, depth, partial value)
  std::map<std::tuple<uint32_t, int, int>, uint32_t> ids;
  std::deque<std::tuple<uint32_t, int, int>> work;

  auto intern = [&](uint32_t s, int depth, int partial) -> uint32_t {
    auto key = std::make_tuple(s, depth, partial);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(out.next.size());
    ids.emplace(key, id);
    out.next.emplace_back();
    out.accepting.push_back(depth == 0 && bdfa.accepting[s] ? 1 : 0);
    work.push_back(key);
    return id;
  };

  out.start = intern(bdfa.start, 0, 0);
  while (!work.empty()) {
    auto [s, depth, partial] = work.front();
    work.pop_front();
    uint32_t id = ids.at(std::make_tuple(s, depth, partial));
    for (int bit = 0; bit < 2; ++bit) {
      int value = order == BitOrder::MsbFirst ? (partial << 1) | bit
                                              : partial | (bit << depth);
      if (depth == 7) {
        out.next[id][bit] = intern(bdfa.next[s][value], 0, 0);
      } else {
        out.next[id][bit] = intern(s, depth + 1, value);
      }
    }
  }
  return out;
}

// Hopcroft minimization over the two-symbol alphabet.
BitDfa minimize(const BitDfa& in) {
  const uint32_t n = static_cast<uint32_t>(in.next.size());
  // Inverse transitions.
  std::array<std::vector<std::vector<uint32_t>>, 2> inv;
  for (int b = 0; b < 2; ++b) inv[b].resize(n);
  for (uint32_t s = 0; s < n; ++s)
    for (int b = 0; b < 2; ++b) inv[b][in.next[s][b]].push_back(s);

  std::vector<uint32_t> block_of(n);
  std::vector<std::vector<uint32_t>> blocks(2);
  for (uint32_t s = 0; s < n; ++s) {
    uint32_t b = in.accepting[s] ? 1 : 0;
    block_of[s] = b;
    blocks[b].push_back(s);
  }
  if (blocks[1].empty()) {
    blocks.pop_back();
  } else if (blocks[0].empty()) {
    blocks.erase(blocks.begin());
    for (uint32_t s = 0; s < n; ++s) block_of[s] = 0;
  }

  std::deque<std::pair<uint32_t, int>> work;
  for (uint32_t b = 0; b < blocks.size(); ++b) {
    work.push_back({b, 0});
    work.push_back({b, 1});
  }

  std::vector<uint32_t> touched;
  std::vector<uint32_t> count_in;  // per touched block, number of hit states
  std::vector<uint8_t> hit(n, 0);

  while (!work.empty()) {
    auto [splitter, sym] = work.front();
    work.pop_front();

    // States with a `sym`-transition into the splitter block.
    std::vector<uint32_t> pre;
    for (uint32_t t : blocks[splitter])
      for (uint32_t s : inv[sym][t]) {
        if (!hit[s]) {
          hit[s] = 1;
          pre.push_back(s);
        }
      }
    // Group pre-states by current block and split.
    std::map<uint32_t, std::vector<uint32_t>> by_block;
    for (uint32_t s : pre) by_block[block_of[s]].push_back(s);
    for (uint32_t s : pre) hit[s] = 0;

    for (auto& [b, members] : by_block) {
      if (members.size() == blocks[b].size()) continue;  // no split
      uint32_t nb = static_cast<uint32_t>(blocks.size());
      std::vector<uint32_t> rest;
      std::vector<uint8_t> member_set(n, 0);
      for (uint32_t s : members) member_set[s] = 1;
      for (uint32_t s : blocks[b])
        if (!member_set[s]) rest.push_back(s);
      // Smaller half becomes the new block.
      if (members.size() > rest.size()) std::swap(members, rest);
      blocks[b] = std::move(rest);
      blocks.push_back(members);
      for (uint32_t s : blocks[nb]) block_of[s] = nb;
      work.push_back({nb, 0});
      work.push_back({nb, 1});
    }
  }

  BitDfa out;
  const uint32_t m = static_cast<uint32_t>(blocks.size());
  out.next.resize(m);
  out.accepting.resize(m);
  for (uint32_t b = 0; b < m; ++b) {
    uint32_t rep = blocks[b][0];
    out.accepting[b] = in.accepting[rep];
    for (int sym = 0; sym < 2; ++sym)
      out.next[b][sym] = block_of[in.next[rep][sym]];
  }
  out.start = block_of[in.start];
  return out;
}

Dfa finalize(const BitDfa& bd) {
  // Renumber 1..q in BFS order from the start state.
  const uint32_t n = static_cast<uint32_t>(bd.next.size());
  std::vector<uint32_t> order(n, 0);
  std::vector<uint8_t> seen(n, 0);
  std::deque<uint32_t> work{bd.start};
  seen[bd.start] = 1;
  uint32_t next_id = 1;
  while (!work.empty()) {
    uint32_t s = work.front();
    work.pop_front();
    order[s] = next_id++;
    for (int b = 0; b < 2; ++b)
      if (!seen[bd.next[s][b]]) {
        seen[bd.next[s][b]] = 1;
        work.push_back(bd.next[s][b]);
      }
  }

  Dfa d;
  d.q = next_id - 1;
  d.start = order[bd.start];
  d.next.resize(d.q + 1);
  d.accepting.assign(d.q + 1, 0);
  for (uint32_t s = 0; s < n; ++s) {
    if (!seen[s]) continue;
    uint32_t id = order[s];
    d.accepting[id] = bd.accepting[s];
    for (int b = 0; b < 2; ++b) d.next[id][b] = order[bd.next[s][b]];
  }
  return d;
}

}  // namespace

Dfa ast_to_dfa(const RegexAstPtr& ast, BitOrder order, bool unanchored) {
  RegexAstPtr root = ast;
  if (unanchored) {
    auto star = RegexAst::make(RegexAst::Star);
    star->children.push_back(RegexAst::make_class(any_byte()));
    auto cat = RegexAst::make(RegexAst::Concat);
    cat->children.push_back(star);
    cat->children.push_back(ast);
    root = cat;
  }
  Nfa nfa;
  auto [entry, exit] = thompson(nfa, root);
  ByteDfa bdfa = determinize(nfa, entry, exit);
  BitDfa bit = expand_bits(bdfa, order);
  return finalize(minimize(bit));
}

Dfa compile_regex(const std::string& pattern, BitOrder order) {
  return ast_to_dfa(parse_regex(pattern), order, /*unanchored=*/false);
}

Dfa compile_search(const std::string& pattern) {
  return ast_to_dfa(parse_regex(pattern), BitOrder::MsbFirst,
                    /*unanchored=*/true);
}

Dfa compile_contains(const std::string& pattern) {
  // Trailing any-byte star makes accepting states absorbing.
  auto star = RegexAst::make(RegexAst::Star);
  star->children.push_back(RegexAst::make_class(any_byte()));
  auto cat = RegexAst::make(RegexAst::Concat);
  cat->children.push_back(parse_regex(pattern));
  cat->children.push_back(star);
  return ast_to_dfa(cat, BitOrder::MsbFirst, /*unanchored=*/true);
}

Dfa compile_search_reversed(const std::string& pattern) {
  return ast_to_dfa(reverse_ast(parse_regex(pattern)), BitOrder::LsbFirst,
                    /*unanchored=*/true);
}

uint32_t Dfa::run(std::span<const uint8_t> bits) const {
  uint32_t s = start;
  for (uint8_t b : bits) s = step(s, b);
  return s;
}

void Dfa::dump(std::ostream& os) const {
  os << "states " << q << " start " << start << '\n';
  for (uint32_t s = 1; s <= q; ++s)
    os << s << (accepting[s] ? "*" : " ") << " 0->" << next[s][0] << " 1->"
       << next[s][1] << '\n';
}

// --------------------------------------------------------------------------
// Circuit emission
// --------------------------------------------------------------------------

DfaUnroll unroll_dfa(LogicBuilder& lb, const Dfa& dfa,
                     std::span<const Sig> input_bits, bool backward) {
  // P_b^j = { i : T(i,b) = j }
  std::array<std::vector<std::vector<uint32_t>>, 2> pred;
  for (int b = 0; b < 2; ++b) pred[b].assign(dfa.q + 1, {});
  for (uint32_t i = 1; i <= dfa.q; ++i)
    for (int b = 0; b < 2; ++b) pred[b][dfa.next[i][b]].push_back(i);

  DfaUnroll u;
  const size_t n = input_bits.size();
  u.states.reserve(n + 1);
  std::vector<Sig> cur(dfa.q + 1, Sig::zero());
  cur[dfa.start] = Sig::one();
  u.states.push_back(cur);

  for (size_t step = 0; step < n; ++step) {
    Sig x = input_bits[backward ? n - 1 - step : step];
    std::vector<Sig> nxt(dfa.q + 1, Sig::zero());
    for (uint32_t j = 1; j <= dfa.q; ++j) {
      Sig a = Sig::zero();
      for (uint32_t i : pred[0][j]) a = lb.lxor(a, cur[i]);
      Sig b = Sig::zero();
      for (uint32_t i : pred[1][j]) b = lb.lxor(b, cur[i]);
      // T^j = ((a ^ b) & x) ^ a; one AND at most, none when a == b.
      nxt[j] = lb.lxor(lb.land(lb.lxor(a, b), x), a);
    }
    cur = std::move(nxt);
    Sig acc = Sig::zero();
    for (uint32_t s = 1; s <= dfa.q; ++s)
      if (dfa.accepting[s]) acc = lb.lxor(acc, cur[s]);
    u.accept.push_back(acc);
    u.states.push_back(cur);
  }
  return u;
}

Sig dfa_match(LogicBuilder& lb, const Dfa& dfa, std::span<const Sig> bits) {
  DfaUnroll u = unroll_dfa(lb, dfa, bits);
  return bits.empty() ? Sig::of_bit(dfa.accepting[dfa.start])
                      : u.accept.back();
}

std::vector<Sig> end_markers(LogicBuilder& lb, const std::string& pattern,
                             std::span<const Sig> bits) {
  Dfa dfa = compile_search(pattern);
  return unroll_dfa(lb, dfa, bits).accept;
}

std::vector<Sig> begin_markers(LogicBuilder& lb, const std::string& pattern,
                               std::span<const Sig> bits) {
  Dfa dfa = compile_search_reversed(pattern);
  DfaUnroll u = unroll_dfa(lb, dfa, bits, /*backward=*/true);
  // accept[k] was recorded after consuming x_{n-k}; flip to b_1..b_n.
  std::vector<Sig> b(u.accept.rbegin(), u.accept.rend());
  return b;
}

std::vector<Sig> match_mask(LogicBuilder& lb, std::span<const Sig> e,
                            std::span<const Sig> b) {
  std::vector<Sig> m(b.size());
  for (size_t i = 0; i < b.size(); ++i) {
    m[i] = i == 0 ? b[0]
                  : lb.lor(b[i], lb.land(lb.lnot(e[i - 1]), m[i - 1]));
  }
  return m;
}

std::vector<Sig> mask_for_pattern(LogicBuilder& lb, const std::string& pattern,
                                  std::span<const Sig> bits) {
  auto e = end_markers(lb, pattern, bits);
  auto b = begin_markers(lb, pattern, bits);
  return match_mask(lb, e, b);
}

std::vector<Sig> extract_fragment(LogicBuilder& lb, const std::string& pattern,
                                  std::span<const Sig> bits) {
  auto m = mask_for_pattern(lb, pattern, bits);
  std::vector<Sig> y(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) y[i] = lb.land(m[i], bits[i]);
  return y;
}

std::vector<Sig> replace_fragment(LogicBuilder& lb, const std::string& pattern,
                                  std::span<const Sig> bits,
                                  ReplaceMode mode) {
  auto e = end_markers(lb, pattern, bits);
  auto b = begin_markers(lb, pattern, bits);
  auto m = match_mask(lb, e, b);
  std::vector<Sig> y(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    Sig keep = lb.land(lb.lnot(m[i]), bits[i]);
    if (mode == ReplaceMode::Delete) {
      y[i] = keep;
    } else {
      // Begin marker sampled at the first bit of this character forces the
      // whole character to 0xff.
      size_t char_start = i - (i % 8);
      y[i] = lb.lor(b[char_start], keep);
    }
  }
  return y;
}

namespace {

template <typename Fn>
Circuit single_field_circuit(uint32_t n_bits, Fn&& fn) {
  CircuitBuilder cb;
  WireRange in = cb.add_input(n_bits, InputClass::Trigger);
  LogicBuilder lb(cb);
  std::vector<Sig> bits(n_bits);
  for (uint32_t i = 0; i < n_bits; ++i) bits[i] = Sig::of(in[i]);
  std::vector<Sig> outs = fn(lb, bits);
  std::vector<WireId> out_wires;
  out_wires.reserve(outs.size());
  for (Sig s : outs) out_wires.push_back(lb.materialize(s));
  cb.set_outputs(std::move(out_wires));
  return cb.build();
}

}  // namespace

Circuit build_match_circuit(const std::string& pattern, uint32_t n_bits) {
  Dfa dfa = compile_contains(pattern);
  return single_field_circuit(n_bits, [&](LogicBuilder& lb, auto& bits) {
    return std::vector<Sig>{dfa_match(lb, dfa, bits)};
  });
}

Circuit build_end_marker_circuit(const std::string& pattern, uint32_t n_bits) {
  return single_field_circuit(n_bits, [&](LogicBuilder& lb, auto& bits) {
    return end_markers(lb, pattern, bits);
  });
}

Circuit build_begin_marker_circuit(const std::string& pattern,
                                   uint32_t n_bits) {
  return single_field_circuit(n_bits, [&](LogicBuilder& lb, auto& bits) {
    return begin_markers(lb, pattern, bits);
  });
}

Circuit build_extract_circuit(const std::string& pattern, uint32_t n_bits) {
  return single_field_circuit(n_bits, [&](LogicBuilder& lb, auto& bits) {
    return extract_fragment(lb, pattern, bits);
  });
}

Circuit build_replace_circuit(const std::string& pattern, uint32_t n_bits,
                              ReplaceMode mode) {
  return single_field_circuit(n_bits, [&](LogicBuilder& lb, auto& bits) {
    return replace_fragment(lb, pattern, bits, mode);
  });
}

}  // namespace etap
