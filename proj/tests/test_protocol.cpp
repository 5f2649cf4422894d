#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "etap/expr.hpp"
#include "etap/protocol.hpp"

using namespace etap;

namespace {

struct Fixture {
  Rule rule;
  CompiledRule cr;
  RuleKeys keys;
  TsState ts;
  TriggerStore store;
  std::string rid = "r";

  Fixture() {
    rule.name = "r";
    rule.schema.fields = {{"Text", FieldKind::String, 12, false}};
    rule.predicate = parse_expr("x[Text].startwith(\"go\")");
    rule.payload = {parse_expr("x[Text]")};
    cr = compile_rule(rule);

    Rng kr(7);
    keys.k_T = kr.key();
    keys.k_A = kr.key();
    ts.k_T = keys.k_T;
  }

  void provision(uint32_t count, Rng& rng) {
    for (uint32_t i = 0; i < count; ++i) {
      GarbledBundle b = ckt_garbling(cr, keys, rng);
      ts.issued.push_back(b.j);
      REQUIRE(store.add(rid, std::move(b)));
    }
  }

  TriggerMsg trigger(const std::string& text, const Bytes& v, uint64_t t,
                     Rng& rng) {
    TriggerData data{{"Text", {.s = Bytes(text.begin(), text.end())}}};
    auto bits = serialize_trigger_bits(rule.schema, data);
    return ts_exec(ts, bits, v, t, rng);
  }

  AsResult round_trip(const std::string& text, const Bytes& v, uint64_t t_send,
                      uint64_t t_recv, Rng& rng) {
    TriggerMsg tm = trigger(text, v, t_send, rng);
    auto am = tap_exec(cr.circuit, tm, store, rid);
    REQUIRE(am.has_value());
    return as_exec(*am, keys.k_A, rule.tau_seconds, t_recv);
  }
};

}  // namespace

TEST_CASE("fired path recovers outputs and payload") {
  Fixture fx;
  Rng rng(1);
  fx.provision(8, rng);

  Bytes v{'p', 'a', 'y'};
  AsResult r = fx.round_trip("go now", v, 1000, 2000, rng);
  REQUIRE(r.status == AsStatus::Fired);
  CHECK(r.v == v);

  PlainOutput want = plain_eval(fx.rule,
                                {{"Text", {.s = Bytes{'g', 'o', ' ', 'n', 'o',
                                                      'w'}}}});
  CHECK(r.y == want.bits);
}

TEST_CASE("false predicate yields NotFired and reveals nothing") {
  Fixture fx;
  Rng rng(2);
  fx.provision(8, rng);

  AsResult r = fx.round_trip("stop", {'v'}, 1000, 2000, rng);
  CHECK(r.status == AsStatus::NotFired);
  CHECK(r.y.empty());
  CHECK(r.v.empty());
}

TEST_CASE("stale timestamp rejected, fresh accepted at the boundary") {
  Fixture fx;
  Rng rng(3);
  fx.provision(8, rng);

  // tau is 60s; exactly tau late is still fine, one ms more is not.
  AsResult ok = fx.round_trip("go", {'v'}, 1000, 1000 + 60'000, rng);
  CHECK(ok.status == AsStatus::Fired);
  AsResult late = fx.round_trip("go", {'v'}, 1000, 1000 + 60'001, rng);
  CHECK(late.status == AsStatus::Reject);
  CHECK(late.cause == RejectCause::Stale);
}

TEST_CASE("single-use bundles: replayed id is dropped by TAP") {
  Fixture fx;
  Rng rng(4);
  fx.provision(4, rng);

  TriggerMsg tm = fx.trigger("go", {'v'}, 1000, rng);
  auto am1 = tap_exec(fx.cr.circuit, tm, fx.store, fx.rid);
  REQUIRE(am1.has_value());
  auto am2 = tap_exec(fx.cr.circuit, tm, fx.store, fx.rid);
  CHECK(!am2.has_value());
  CHECK(fx.store.was_consumed(fx.rid, tm.j));

  // Unknown id likewise.
  tm.j = 999;
  CHECK(!tap_exec(fx.cr.circuit, tm, fx.store, fx.rid).has_value());
}

TEST_CASE("TS never reuses an id for real data") {
  Fixture fx;
  Rng rng(5);
  fx.provision(6, rng);

  std::set<uint32_t> seen;
  for (int i = 0; i < 6; ++i) {
    TriggerMsg tm = fx.trigger("go", {'v'}, 1000, rng);
    CHECK(seen.insert(tm.j).second);
  }
  CHECK_THROWS(fx.trigger("go", {'v'}, 1000, rng));
}

TEST_CASE("cover traffic looks like real traffic and evaluates to garbage") {
  Fixture fx;
  Rng rng(6);
  fx.provision(8, rng);

  uint32_t n = fx.cr.circuit.n_trigger_bits;
  TriggerMsg fake = ts_exec_fake(fx.ts, n, 3, 1000, rng);
  TriggerMsg real = fx.trigger("go", {'v'}, 1000, rng);

  // Same shape on the wire.
  CHECK(fake.X.size() == real.X.size());
  CHECK(serialize_trigger_msg(fake).size() == serialize_trigger_msg(real).size());

  // TAP processes it normally; AS rejects the result.
  auto am = tap_exec(fx.cr.circuit, fake, fx.store, fx.rid);
  REQUIRE(am.has_value());
  AsResult r = as_exec(*am, fx.keys.k_A, fx.rule.tau_seconds, 2000);
  CHECK(r.status == AsStatus::Reject);
}

TEST_CASE("garbling is deterministic in (k_T, j); blobs differ only by IVs") {
  Fixture fx;
  Rng rng1(7), rng2(8);
  RuleKeys k1 = fx.keys, k2 = fx.keys;
  GarbledBundle a = ckt_garbling(fx.cr, k1, rng1);
  GarbledBundle b = ckt_garbling(fx.cr, k2, rng2);
  CHECK(a.j == b.j);
  CHECK(a.F.and_ct == b.F.and_ct);
  CHECK(a.C == b.C);
  CHECK(a.d.h_tilde == b.d.h_tilde);
  CHECK(a.d.s_tilde.body != b.d.s_tilde.body);  // fresh IV
}

TEST_CASE("action message tampering is rejected") {
  Fixture fx;
  Rng rng(9);
  fx.provision(64, rng);

  auto fresh = [&](const std::string& text) {
    TriggerMsg tm = fx.trigger(text, {'v'}, 1000, rng);
    auto am = tap_exec(fx.cr.circuit, tm, fx.store, fx.rid);
    REQUIRE(am.has_value());
    return *am;
  };

  SUBCASE("flip a bit in the predicate label") {
    ActionMsg am = fresh("go");
    am.Y[0].bytes[0] ^= 1;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
    CHECK(r.cause == RejectCause::BlobAuth);
  }
  SUBCASE("flip a bit in an output label") {
    ActionMsg am = fresh("go");
    am.Y[5].bytes[3] ^= 0x10;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
    CHECK(r.cause == RejectCause::OutputHash);
  }
  SUBCASE("flip the lsb of an output label") {
    // Changes the decoded bit, so the rebuilt false label is wrong too.
    ActionMsg am = fresh("go");
    am.Y[5].bytes[kKappaBytes - 1] ^= 1;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
    CHECK(r.cause == RejectCause::OutputHash);
  }
  SUBCASE("swap the payload ciphertext") {
    ActionMsg am = fresh("go");
    ActionMsg other = fresh("go faster");
    am.ct = other.ct;  // encrypted under a different j's k_v
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
    CHECK(r.cause == RejectCause::PayloadAuth);
  }
  SUBCASE("splice the decoding blob from another instance") {
    ActionMsg am = fresh("go");
    ActionMsg other = fresh("go faster");
    am.d = other.d;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
  }
  SUBCASE("lie about j") {
    ActionMsg am = fresh("go");
    am.j ^= 1;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
    // Either h̃ no longer matches (NotFired path) or the embedded j does.
    CHECK(r.cause != RejectCause::None);
  }
  SUBCASE("tamper with s_tilde") {
    ActionMsg am = fresh("go");
    am.d.s_tilde.body[0] ^= 1;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
    CHECK(r.cause == RejectCause::BlobAuth);
  }
  SUBCASE("forge h_tilde on a false-predicate run") {
    ActionMsg am = fresh("stop");
    am.d.h_tilde[0] ^= 1;
    AsResult r = as_exec(am, fx.keys.k_A, 60, 2000);
    CHECK(r.status == AsStatus::Reject);
  }
}

TEST_CASE("trigger store capacity and bookkeeping") {
  TriggerStore small(2);
  Fixture fx;
  Rng rng(10);
  GarbledBundle b1 = ckt_garbling(fx.cr, fx.keys, rng);
  GarbledBundle b2 = ckt_garbling(fx.cr, fx.keys, rng);
  GarbledBundle b3 = ckt_garbling(fx.cr, fx.keys, rng);
  CHECK(small.add("r", b1));
  CHECK(small.add("r", b2));
  CHECK(!small.add("r", b3));  // full
  CHECK(small.consume("r", b1.j).has_value());
  CHECK(small.add("r", b3));
  CHECK(!small.add("r", b1));  // already consumed
  CHECK(small.newest_id("r") == b3.j);
}

TEST_CASE("circuit id sync blob") {
  Key k_T = Rng(11).key();
  Rng rng(12);
  Ciphertext blob = ts_make_sync_blob(k_T, 41, 1000, rng);

  SyncCheck ok = tc_sync_circuit_id(41, blob, k_T);
  CHECK(!ok.alarm);
  CHECK(ok.j == 41);

  SyncCheck ahead = tc_sync_circuit_id(45, blob, k_T);
  CHECK(!ahead.alarm);  // TAP saw newer consumption than this blob
  CHECK(ahead.j == 45);

  SyncCheck stale = tc_sync_circuit_id(12, blob, k_T);
  CHECK(stale.alarm);
  CHECK(stale.j == 41);

  blob.body[0] ^= 1;
  CHECK(tc_sync_circuit_id(41, blob, k_T).alarm);
}

TEST_CASE("wire round trips") {
  Fixture fx;
  Rng rng(13);
  fx.provision(4, rng);

  GarbledBundle b = ckt_garbling(fx.cr, fx.keys, rng);
  Bytes bw = serialize_bundle(b);
  auto b2 = parse_bundle(bw);
  REQUIRE(b2.has_value());
  CHECK(b2->j == b.j);
  CHECK(b2->F.and_ct == b.F.and_ct);
  CHECK(b2->C == b.C);
  CHECK(b2->d.h_tilde == b.d.h_tilde);
  CHECK(serialize_bundle(*b2) == bw);
  CHECK(b.byte_size() == bw.size());

  TriggerMsg tm = fx.trigger("go", {'v'}, 1000, rng);
  Bytes tw = serialize_trigger_msg(tm);
  auto tm2 = parse_trigger_msg(tw);
  REQUIRE(tm2.has_value());
  CHECK(tm2->j == tm.j);
  CHECK(tm2->X == tm.X);
  CHECK(serialize_trigger_msg(*tm2) == tw);

  auto am = tap_exec(fx.cr.circuit, *tm2, fx.store, fx.rid);
  REQUIRE(am.has_value());
  Bytes aw = serialize_action_msg(*am);
  auto am2 = parse_action_msg(aw);
  REQUIRE(am2.has_value());
  CHECK(serialize_action_msg(*am2) == aw);
  CHECK(as_exec(*am2, fx.keys.k_A, 60, 2000).status == AsStatus::Fired);

  // Parsers reject truncation, trailing bytes and wrong tags.
  for (Bytes* w : {&bw, &tw, &aw}) {
    Bytes cut(w->begin(), w->end() - 1);
    Bytes ext = *w;
    ext.push_back(0);
    Bytes wrong = *w;
    wrong[0] ^= 0x40;
    CHECK((!parse_bundle(cut).has_value() || w != &bw));
    CHECK((!parse_trigger_msg(cut).has_value() || w != &tw));
    CHECK((!parse_action_msg(cut).has_value() || w != &aw));
    CHECK(!parse_bundle(ext).has_value());
    CHECK(!parse_trigger_msg(ext).has_value());
    CHECK(!parse_action_msg(ext).has_value());
    CHECK(!parse_bundle(wrong).has_value());
    CHECK(!parse_trigger_msg(wrong).has_value());
    CHECK(!parse_action_msg(wrong).has_value());
  }
}

TEST_CASE("per-instance traffic carries only the AND table plus blobs") {
  Fixture fx;
  Rng rng(14);
  GarbledBundle b = ckt_garbling(fx.cr, fx.keys, rng);
  size_t ands = fx.cr.circuit.stats().and_count;
  // tag+j+4 headers + F + C + s̃ + h̃
  size_t expect = 5 + 4 * 4 + (16 + 32 * ands) +
                  16 * fx.cr.const_bits.size() +
                  b.d.s_tilde.serialize().size() + 32;
  CHECK(serialize_bundle(b).size() == expect);
}
