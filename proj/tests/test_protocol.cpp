/*
 *   Copyright (c) 2026 The Varikey Authors.
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "varikey/protocol.hpp"

using namespace varikey;
using namespace varikey::protocol;
namespace ks = varikey::keyschedule;

namespace {

struct Trio {
    EntityState tag;
    EntityState reader;
    EntityState server;
};

Trio make_trio(std::uint64_t p, unsigned N, unsigned n, unsigned blocks,
               std::uint64_t seed) {
    ks::KeyMaterial km = ks::keygen(N, n, p, seed);
    u128 id = make_u128(seed, 0x1d);
    u128 s = make_u128(seed, 0x5ec);
    return Trio{make_tag(km, id, s, seed + 1, blocks),
                make_reader(km, {s}, seed + 2, blocks),
                make_server(km, {s}, seed + 3, blocks)};
}

struct RunLog {
    std::optional<SessionOutcome> outcome;
    std::optional<AbortReason> abort;
    unsigned abort_step = 0;
    std::vector<ProtocolMessage> wire;  // messages in transit order
};

// Drives one full session with no interference.
RunLog run_honest(Trio& t) {
    RunLog log;
    ProtocolMessage m = make_query(t.reader);
    log.wire.push_back(m);
    EntityState* order[] = {&t.tag, &t.reader, &t.server,
                            &t.reader, &t.tag, &t.reader, &t.server};
    for (EntityState* e : order) {
        StepResult r = handle(*e, m);
        if (r.abort) {
            log.abort = r.abort;
            log.abort_step = r.step;
            return log;
        }
        if (r.outcome) {
            log.outcome = r.outcome;
            return log;
        }
        REQUIRE(r.reply.has_value());
        m = *r.reply;
        log.wire.push_back(m);
    }
    return log;
}

}  // namespace

TEST_CASE("wire codec round-trip and layout") {
    ProtocolMessage q;
    q.type = MsgType::query;
    q.session_id = 0x0102030405060708ull;
    auto bytes = encode_message(q);
    CHECK(bytes.size() == 20);  // fixed header only
    CHECK(bytes[0] == 0xA5);
    CHECK(bytes[1] == 0x5A);
    CHECK(bytes[2] == 1);  // version
    CHECK(bytes[3] == 0);  // query
    CHECK(bytes[4] == 0x01);
    CHECK(bytes[11] == 0x08);
    CHECK(decode_message(bytes) == q);

    ProtocolMessage m;
    m.type = MsgType::tag_hello;
    m.session_id = 7;
    m.symbol_width_bits = 4;
    m.original_bit_length = 12;
    m.payload = {0xdead, 1, 0};
    auto enc = encode_message(m);
    CHECK(enc.size() == 20 + 3 * 8);
    CHECK(decode_message(enc) == m);

    // random round-trips
    std::mt19937_64 eng(31);
    for (int i = 0; i < 300; ++i) {
        ProtocolMessage r;
        r.type = static_cast<MsgType>(1 + eng() % 6);
        r.session_id = eng();
        r.symbol_width_bits = 1 + eng() % 63;
        r.original_bit_length = static_cast<std::uint32_t>(eng());
        r.payload.resize(1 + eng() % 64);
        for (auto& s : r.payload) s = eng();
        CHECK(decode_message(encode_message(r)) == r);
    }
}

TEST_CASE("wire codec rejects damaged buffers") {
    ProtocolMessage m;
    m.type = MsgType::tag_hello;
    m.symbol_width_bits = 1;
    m.original_bit_length = 2;
    m.payload = {1, 0};
    auto bytes = encode_message(m);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_message(truncated), DecodeError);

    auto bad_magic = bytes;
    bad_magic[0] = 0;
    CHECK_THROWS_AS(decode_message(bad_magic), DecodeError);

    auto bad_type = bytes;
    bad_type[3] = 9;
    CHECK_THROWS_AS(decode_message(bad_type), DecodeError);

    auto bad_version = bytes;
    bad_version[2] = 2;
    CHECK_THROWS_AS(decode_message(bad_version), DecodeError);

    std::vector<std::uint8_t> tiny(bytes.begin(), bytes.begin() + 8);
    CHECK_THROWS_AS(decode_message(tiny), DecodeError);

    // payload on a query is invalid in both directions
    ProtocolMessage badq;
    badq.type = MsgType::query;
    badq.payload = {1};
    CHECK_THROWS_AS(encode_message(badq), DecodeError);
}

TEST_CASE("payload encryption round-trip") {
    ks::KeyMaterial km = ks::keygen(2, 2, 16, 5);
    unsigned width = modmatrix::symbol_width_for(km.am_table);
    BitVec bits;
    bits.append_u128(make_u128(0x1234, 0x5678));
    bits.append_u128(make_u128(0x9abc, 0xdef0));

    ks::Schedule base = ks::base_schedule(km);
    auto payload = encrypt_payload(bits, base, km, width);
    CHECK(payload.size() % base.order == 0);
    CHECK(decrypt_payload(payload, base, km, width, 256) == bits);

    ks::Schedule derived = ks::derive_schedule(3, 7, 11, km, 2);
    auto payload2 = encrypt_payload(bits, derived, km, width);
    CHECK(decrypt_payload(payload2, derived, km, width, 256) == bits);

    // wrong symbol count is rejected
    auto clipped = payload;
    clipped.pop_back();
    CHECK_THROWS_AS(decrypt_payload(clipped, base, km, width, 256), EncodingError);
}

TEST_CASE("honest fourteen-step session succeeds") {
    Trio t = make_trio(16, 2, 2, 2, 100);
    RunLog log = run_honest(t);
    REQUIRE(log.outcome.has_value());
    CHECK(log.outcome->id == t.tag.id);
    CHECK(log.wire.size() == 7);  // query + six ciphertext messages

    // agreement between the parties that share each value
    CHECK(t.tag.n_t == t.reader.n_t);
    CHECK(t.reader.n_r == t.server.n_r);
    CHECK(t.tag.round == t.reader.round);
    CHECK(t.reader.round == t.server.round);
    CHECK(t.reader.recovered_id == t.tag.id);
    CHECK(t.server.recovered_id == t.tag.id);

    // all parties derive the same schedule from the agreed secrets
    auto sched_of = [](const EntityState& e) {
        return ks::derive_schedule(e.round->s_c, e.round->s_p, e.round->s_d, e.km,
                                   e.blocks);
    };
    CHECK(sched_of(t.tag) == sched_of(t.reader));
    CHECK(sched_of(t.reader) == sched_of(t.server));
}

TEST_CASE("sessions succeed across parameter sets") {
    std::mt19937_64 eng(32);
    std::vector<std::uint64_t> ps{8, 16, 26, 256};
    for (int i = 0; i < 25; ++i) {
        std::uint64_t p = ps[i % ps.size()];
        unsigned N = 1 + eng() % 3;
        unsigned n = 1 + eng() % 3;
        unsigned blocks = 1 + static_cast<unsigned>(eng() % N);
        Trio t = make_trio(p, N, n, blocks, eng());
        RunLog log = run_honest(t);
        REQUIRE(log.outcome.has_value());
        CHECK(log.outcome->id == t.tag.id);
    }
}

TEST_CASE("tag hello is deterministic from the seed and fresh per session") {
    Trio a = make_trio(16, 2, 2, 2, 7);
    Trio b = make_trio(16, 2, 2, 2, 7);
    ProtocolMessage qa = make_query(a.reader);
    ProtocolMessage qb = make_query(b.reader);
    auto ha = tag_on_query(a.tag, qa);
    auto hb = tag_on_query(b.tag, qb);
    CHECK(ha.reply->payload == hb.reply->payload);
    CHECK(a.tag.n_t == b.tag.n_t);

    // a second session from the same tag uses a fresh nonce and payload
    reset_session(a.tag);
    ProtocolMessage q2 = make_query(a.reader);
    auto h2 = tag_on_query(a.tag, q2);
    CHECK(h2.reply->payload != ha.reply->payload);

    // different seeds give different payloads
    Trio c = make_trio(16, 2, 2, 2, 8);
    ks::KeyMaterial km = c.tag.km;
    EntityState other = make_tag(km, c.tag.id, c.tag.s, 999, 2);
    ProtocolMessage qc = make_query(c.reader);
    auto hc = tag_on_query(c.tag, qc);
    auto ho = tag_on_query(other, qc);
    CHECK(hc.reply->payload != ho.reply->payload);

    // the hello decrypts back to the nonce and secret
    BitVec bits = decrypt_payload(hc.reply->payload, ks::base_schedule(c.tag.km),
                                  c.tag.km, c.tag.width, 256);
    CHECK(bits.read_u128(0) == *c.tag.n_t);
    CHECK(bits.read_u128(128) == c.tag.s);
}

TEST_CASE("reader rejects unknown secrets and malformed hellos") {
    Trio t = make_trio(16, 2, 2, 2, 200);
    ProtocolMessage q = make_query(t.reader);

    // a tag with a secret the reader does not know
    EntityState stranger =
        make_tag(t.tag.km, make_u128(1, 2), make_u128(3, 4), 77, 2);
    auto hello = tag_on_query(stranger, q);
    auto res = reader_on_tag_hello(t.reader, *hello.reply);
    CHECK(res.abort == AbortReason::unknown_secret);
    CHECK(res.step == 4);
    CHECK(t.reader.phase == Phase::idle);

    // truncated payload
    make_query(t.reader);
    auto hello2 = tag_on_query(t.tag, q);
    ProtocolMessage cut = *hello2.reply;
    cut.payload.resize(cut.payload.size() - 1);
    auto res2 = reader_on_tag_hello(t.reader, cut);
    CHECK(res2.abort == AbortReason::malformed);
}

TEST_CASE("nonce checks catch tampering and replay") {
    Trio t = make_trio(16, 2, 2, 2, 300);
    ProtocolMessage m = make_query(t.reader);
    m = *tag_on_query(t.tag, m).reply;
    m = *reader_on_tag_hello(t.reader, m).reply;
    ProtocolMessage server_reply = *server_on_reader(t.server, m).reply;

    // flip one ciphertext symbol in the server's reply: the recovered nonce
    // or secrets change, so the reader aborts
    ProtocolMessage tampered = server_reply;
    tampered.payload[0] ^= 1;
    auto res = reader_on_server(t.reader, tampered);
    CHECK(res.abort.has_value());
    CHECK(res.step == 8);

    // an honest rerun gives the reader a fresh nonce, so replaying the old
    // server reply fails the nonce check
    Trio t2 = make_trio(16, 2, 2, 2, 300);
    ProtocolMessage m2 = make_query(t2.reader);
    m2 = *tag_on_query(t2.tag, m2).reply;
    ProtocolMessage hop = *reader_on_tag_hello(t2.reader, m2).reply;
    (void)hop;
    reset_session(t2.reader);
    ProtocolMessage m3 = make_query(t2.reader);
    m3 = *tag_on_query(t2.tag, m3).reply;
    m3 = *reader_on_tag_hello(t2.reader, m3).reply;
    // t2.reader now expects its second nonce; the stale reply carries the first
    auto stale = reader_on_server(t2.reader, server_reply);
    CHECK(stale.abort.has_value());
}

TEST_CASE("challenge verification at the tag") {
    Trio t = make_trio(16, 2, 2, 2, 400);
    ProtocolMessage m = make_query(t.reader);
    m = *tag_on_query(t.tag, m).reply;
    m = *reader_on_tag_hello(t.reader, m).reply;
    m = *server_on_reader(t.server, m).reply;
    ProtocolMessage challenge = *reader_on_server(t.reader, m).reply;

    ProtocolMessage tampered = challenge;
    tampered.payload[3] ^= 1;
    auto res = tag_on_challenge(t.tag, tampered);
    CHECK(res.abort.has_value());
    CHECK(res.step == 10);
    CHECK(t.tag.phase == Phase::idle);
}

TEST_CASE("final messages carry incremented nonces and the identity") {
    Trio t = make_trio(16, 2, 2, 2, 500);
    ProtocolMessage m = make_query(t.reader);
    m = *tag_on_query(t.tag, m).reply;
    u128 n_t = *t.tag.n_t;
    m = *reader_on_tag_hello(t.reader, m).reply;
    m = *server_on_reader(t.server, m).reply;
    m = *reader_on_server(t.reader, m).reply;
    ProtocolMessage tag_final = *tag_on_challenge(t.tag, m).reply;

    ks::Schedule sched = ks::derive_schedule(
        t.tag.round->s_c, t.tag.round->s_p, t.tag.round->s_d, t.tag.km, 2);
    BitVec bits =
        decrypt_payload(tag_final.payload, sched, t.tag.km, t.tag.width, 256);
    CHECK(bits.read_u128(0) == n_t + 1);
    CHECK(bits.read_u128(128) == t.tag.id);

    // corrupting one round secret at the reader breaks its schedule and the
    // decrypt fails closed
    t.reader.round->s_p += 1;
    t.reader.prev_round.reset();
    auto res = reader_on_tag_final(t.reader, tag_final);
    CHECK(res.abort.has_value());
    CHECK(res.step == 12);
}

TEST_CASE("nonce increment wraps at the 128-bit boundary") {
    Trio t = make_trio(16, 2, 2, 2, 600);
    ProtocolMessage m = make_query(t.reader);
    m = *tag_on_query(t.tag, m).reply;
    // force the extreme nonce on both sides before the challenge leg
    u128 top = ~u128{0};
    t.tag.n_t = top;
    m = *reader_on_tag_hello(t.reader, m).reply;
    t.reader.n_t = top;
    m = *server_on_reader(t.server, m).reply;
    m = *reader_on_server(t.reader, m).reply;
    m = *tag_on_challenge(t.tag, m).reply;
    auto res = reader_on_tag_final(t.reader, m);
    REQUIRE(res.reply.has_value());  // wrapped nonce still verifies

    ks::Schedule sched = ks::derive_schedule(
        t.tag.round->s_c, t.tag.round->s_p, t.tag.round->s_d, t.tag.km, 2);
    BitVec bits = decrypt_payload(m.payload, sched, t.tag.km, t.tag.width, 256);
    CHECK(bits.read_u128(0) == u128{0});
}

TEST_CASE("retained previous round secrets allow one retry") {
    Trio t = make_trio(16, 2, 2, 2, 700);
    RunLog first = run_honest(t);
    REQUIRE(first.outcome.has_value());
    RoundSecrets good = *t.reader.round;

    // manufacture divergence: the reader's current triple is wrong, the
    // retained one is right; a final message built under the retained triple
    // still verifies through the retry path
    reset_session(t.tag);
    reset_session(t.reader);
    reset_session(t.server);
    t.reader.phase = Phase::reader_awaiting_tag_final;
    t.reader.n_t = make_u128(0, 41);
    t.reader.n_r = make_u128(0, 51);
    t.reader.prev_round = good;
    t.reader.round = RoundSecrets{good.s_d + 1, good.s_p + 1, good.s_c + 1};

    ks::Schedule sched =
        ks::derive_schedule(good.s_c, good.s_p, good.s_d, t.reader.km, 2);
    BitVec bits;
    bits.append_u128(make_u128(0, 42));  // n_t + 1
    bits.append_u128(t.tag.id);
    ProtocolMessage final_msg;
    final_msg.type = MsgType::tag_final;
    final_msg.session_id = 1;
    final_msg.symbol_width_bits = t.reader.width;
    final_msg.original_bit_length = 256;
    final_msg.payload = encrypt_payload(bits, sched, t.reader.km, t.reader.width);

    auto res = reader_on_tag_final(t.reader, final_msg);
    REQUIRE(res.reply.has_value());
    CHECK(t.reader.recovered_id == t.tag.id);

    // without the retained triple the same message aborts
    Trio t2 = make_trio(16, 2, 2, 2, 700);
    run_honest(t2);
    reset_session(t2.reader);
    t2.reader.phase = Phase::reader_awaiting_tag_final;
    t2.reader.n_t = make_u128(0, 41);
    t2.reader.n_r = make_u128(0, 51);
    t2.reader.prev_round.reset();
    t2.reader.round = RoundSecrets{good.s_d + 1, good.s_p + 1, good.s_c + 1};
    auto res2 = reader_on_tag_final(t2.reader, final_msg);
    CHECK(res2.abort.has_value());
}

TEST_CASE("out-of-phase and misaddressed messages") {
    Trio t = make_trio(16, 2, 2, 2, 800);

    // a query reaching the server changes nothing
    ProtocolMessage q;
    q.type = MsgType::query;
    EntityState before = t.server;
    StepResult r = handle(t.server, q);
    CHECK(!r.reply);
    CHECK(!r.abort);
    CHECK(!r.outcome);
    CHECK(t.server.phase == before.phase);
    CHECK(t.server.last_step == before.last_step);

    // a tag-final arriving while the reader is idle aborts out of phase
    ProtocolMessage stray;
    stray.type = MsgType::tag_final;
    stray.symbol_width_bits = 1;
    stray.original_bit_length = 256;
    stray.payload.assign(256, 0);
    auto res = handle(t.reader, stray);
    CHECK(res.abort == AbortReason::out_of_phase);
}

TEST_CASE("phase advances monotonically through an honest session") {
    Trio t = make_trio(16, 2, 2, 2, 900);
    ProtocolMessage m = make_query(t.reader);
    unsigned tag_last = 0, reader_last = t.reader.last_step, server_last = 0;
    EntityState* order[] = {&t.tag, &t.reader, &t.server,
                            &t.reader, &t.tag, &t.reader, &t.server};
    for (EntityState* e : order) {
        StepResult r = handle(*e, m);
        unsigned& last = e == &t.tag ? tag_last
                         : e == &t.reader ? reader_last
                                          : server_last;
        CHECK(e->last_step > last);
        last = e->last_step;
        if (r.outcome) break;
        REQUIRE(r.reply.has_value());
        m = *r.reply;
    }
}
