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
#include "varikey/protocol.hpp"

#include <cstring>

namespace varikey::protocol {

namespace ks = varikey::keyschedule;
namespace mm = varikey::modmatrix;

namespace {

constexpr std::uint16_t kMagic = 0xA55A;
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 20;
constexpr std::uint32_t kTwoFieldBits = 256;   // nonce + one more 128-bit field
constexpr std::uint32_t kFourFieldBits = 512;  // nonce + the three round secrets

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t read_be(std::span<const std::uint8_t> b, std::size_t off,
                      std::size_t len) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < len; ++i) v = (v << 8) | b[off + i];
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const ProtocolMessage& msg) {
    if ((msg.type == MsgType::query) != msg.payload.empty()) {
        throw DecodeError("payload must be empty exactly for a query");
    }
    if (msg.payload.size() > 0xffff) throw DecodeError("payload too long");
    if (msg.symbol_width_bits > 63) throw DecodeError("symbol width too large");
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + 8 * msg.payload.size());
    put_u16(out, kMagic);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(msg.type));
    put_u64(out, msg.session_id);
    out.push_back(static_cast<std::uint8_t>(msg.symbol_width_bits));
    out.push_back(0);  // reserved
    put_u32(out, msg.original_bit_length);
    put_u16(out, static_cast<std::uint16_t>(msg.payload.size()));
    for (std::uint64_t s : msg.payload) put_u64(out, s);
    return out;
}

ProtocolMessage decode_message(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw DecodeError("buffer shorter than header");
    if (read_be(bytes, 0, 2) != kMagic) throw DecodeError("bad magic");
    if (bytes[2] != kVersion) throw DecodeError("unsupported version");
    std::uint8_t type_raw = bytes[3];
    if (type_raw > static_cast<std::uint8_t>(MsgType::reader_final)) {
        throw DecodeError("unknown message type " + std::to_string(type_raw));
    }
    ProtocolMessage msg;
    msg.type = static_cast<MsgType>(type_raw);
    msg.session_id = read_be(bytes, 4, 8);
    msg.symbol_width_bits = bytes[12];
    if (msg.symbol_width_bits > 63) throw DecodeError("symbol width too large");
    msg.original_bit_length = static_cast<std::uint32_t>(read_be(bytes, 14, 4));
    std::size_t count = read_be(bytes, 18, 2);
    if (bytes.size() != kHeaderSize + 8 * count) {
        throw DecodeError("length mismatch: declared " + std::to_string(count) +
                          " symbols for " + std::to_string(bytes.size()) + " bytes");
    }
    if ((msg.type == MsgType::query) != (count == 0)) {
        throw DecodeError("payload must be empty exactly for a query");
    }
    msg.payload.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        msg.payload.push_back(read_be(bytes, kHeaderSize + 8 * i, 8));
    }
    return msg;
}

std::vector<std::uint64_t> encrypt_payload(const BitVec& bits,
                                           const ks::Schedule& sched,
                                           const ks::KeyMaterial& km,
                                           unsigned width) {
    mm::SymbolVector sv = mm::encode_bits(bits, width, sched.order);
    std::vector<std::uint64_t> out;
    out.reserve(sv.symbols.size());
    for (std::size_t off = 0; off < sv.symbols.size(); off += sched.order) {
        auto seg = std::span<const std::uint64_t>(sv.symbols).subspan(off, sched.order);
        auto c = ks::schedule_encrypt(seg, sched, km);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

BitVec decrypt_payload(std::span<const std::uint64_t> payload,
                       const ks::Schedule& sched, const ks::KeyMaterial& km,
                       unsigned width, std::uint32_t original_bit_length) {
    if (width == 0) throw EncodingError("zero symbol width");
    std::size_t needed = (original_bit_length + width - 1) / width;
    needed = (needed + sched.order - 1) / sched.order * sched.order;
    if (needed == 0) needed = sched.order;
    if (payload.size() != needed) {
        throw EncodingError("payload has " + std::to_string(payload.size()) +
                            " symbols, expected " + std::to_string(needed));
    }
    mm::SymbolVector sv;
    sv.symbol_width_bits = width;
    sv.original_bit_length = original_bit_length;
    sv.symbols.reserve(payload.size());
    for (std::size_t off = 0; off < payload.size(); off += sched.order) {
        auto seg = payload.subspan(off, sched.order);
        auto t = ks::schedule_decrypt(seg, sched, km);
        sv.symbols.insert(sv.symbols.end(), t.begin(), t.end());
    }
    return mm::decode_bits(sv);  // rejects wide symbols and nonzero padding
}

EntityState make_tag(ks::KeyMaterial km, u128 id, u128 s, std::uint64_t seed,
                     unsigned blocks) {
    EntityState st(seed);
    st.role = Role::tag;
    st.width = mm::symbol_width_for(km.am_table);
    st.km = std::move(km);
    st.blocks = blocks;
    st.id = id;
    st.s = s;
    return st;
}

EntityState make_reader(ks::KeyMaterial km, std::set<u128> secrets,
                        std::uint64_t seed, unsigned blocks) {
    EntityState st(seed);
    st.role = Role::reader;
    st.width = mm::symbol_width_for(km.am_table);
    st.km = std::move(km);
    st.blocks = blocks;
    st.known_secrets = std::move(secrets);
    return st;
}

EntityState make_server(ks::KeyMaterial km, std::set<u128> secrets,
                        std::uint64_t seed, unsigned blocks) {
    EntityState st = make_reader(std::move(km), std::move(secrets), seed, blocks);
    st.role = Role::server;
    return st;
}

void reset_session(EntityState& state) {
    state.phase = Phase::idle;
    state.last_step = 0;
    state.session_id = 0;
    state.n_t.reset();
    state.n_r.reset();
    state.recovered_id.reset();
    state.session_s = 0;
    // accepted round secrets survive the reset; they become prev_round when
    // the next session's secrets are accepted
}

namespace {

// Accepts a fresh round-secret triple. The outgoing triple is kept as a
// fallback only when its session never completed; a confirmed triple is
// spent and must not decrypt anything further.
void accept_round(EntityState& st, const RoundSecrets& rs) {
    if (st.round && !st.round_confirmed) {
        st.prev_round = st.round;
    } else {
        st.prev_round.reset();
    }
    st.round = rs;
    st.round_confirmed = false;
}

StepResult abort_with(EntityState& st, AbortReason why, unsigned step) {
    reset_session(st);
    StepResult r;
    r.abort = why;
    r.step = step;
    return r;
}

ProtocolMessage make_reply(const EntityState& st, MsgType type,
                           std::uint32_t bits, std::vector<std::uint64_t> payload) {
    ProtocolMessage m;
    m.type = type;
    m.session_id = st.session_id;
    m.symbol_width_bits = st.width;
    m.original_bit_length = bits;
    m.payload = std::move(payload);
    return m;
}

// Decrypts a base-schedule message expecting `fields` 128-bit fields.
// Returns the fields, or nullopt when the payload is malformed.
std::optional<std::vector<u128>> open_base(EntityState& st,
                                           const ProtocolMessage& msg,
                                           unsigned fields) {
    st.work.decrypts += 1;
    std::uint32_t want_bits = fields * 128;
    if (msg.original_bit_length != want_bits || msg.symbol_width_bits != st.width) {
        return std::nullopt;
    }
    try {
        BitVec bits = decrypt_payload(msg.payload, ks::base_schedule(st.km), st.km,
                                      st.width, msg.original_bit_length);
        std::vector<u128> out;
        for (unsigned f = 0; f < fields; ++f) out.push_back(bits.read_u128(f * 128));
        return out;
    } catch (const Error&) {
        return std::nullopt;
    }
}

BitVec two_fields(u128 a, u128 b) {
    BitVec bits;
    bits.append_u128(a);
    bits.append_u128(b);
    return bits;
}

BitVec four_fields(u128 a, const RoundSecrets& rs) {
    BitVec bits;
    bits.append_u128(a);
    bits.append_u128(rs.s_d);
    bits.append_u128(rs.s_p);
    bits.append_u128(rs.s_c);
    return bits;
}

ks::Schedule round_schedule(const EntityState& st, const RoundSecrets& rs) {
    return ks::derive_schedule(rs.s_c, rs.s_p, rs.s_d, st.km, st.blocks);
}

// Decrypts a derived-schedule message and checks the expected nonce; retries
// once with the previous round's secrets when the current ones fail, which
// realizes the fall-back-to-the-previous-key recovery path.
struct FinalOpen {
    bool ok = false;
    u128 id = 0;
    RoundSecrets used;  // the triple that verified, for the reply leg
    AbortReason why = AbortReason::malformed;
};

FinalOpen open_final(EntityState& st, const ProtocolMessage& msg,
                     u128 expected_nonce) {
    FinalOpen result;
    if (msg.symbol_width_bits != st.width ||
        msg.original_bit_length != kTwoFieldBits) {
        result.why = AbortReason::malformed;
        return result;
    }
    bool first = true;
    for (const std::optional<RoundSecrets>& rs : {st.round, st.prev_round}) {
        if (!rs) break;
        st.work.decrypts += 1;
        try {
            BitVec bits = decrypt_payload(msg.payload, round_schedule(st, *rs),
                                          st.km, st.width, msg.original_bit_length);
            u128 nonce = bits.read_u128(0);
            if (nonce == expected_nonce) {
                result.ok = true;
                result.id = bits.read_u128(128);
                result.used = *rs;
                return result;
            }
            result.why = AbortReason::nonce_mismatch;
        } catch (const Error&) {
            if (first) result.why = AbortReason::malformed;
        }
        first = false;
    }
    return result;
}

}  // namespace

ProtocolMessage make_query(EntityState& reader) {
    reader.session_id = reader.prng.next_u64();
    reader.phase = Phase::reader_awaiting_tag_hello;
    reader.last_step = 1;
    ProtocolMessage q;
    q.type = MsgType::query;
    q.session_id = reader.session_id;
    return q;
}

StepResult tag_on_query(EntityState& tag, const ProtocolMessage& msg) {
    if (tag.phase != Phase::idle) return abort_with(tag, AbortReason::out_of_phase, 2);
    tag.session_id = msg.session_id;
    tag.n_t = tag.prng.next_u128();
    tag.phase = Phase::tag_awaiting_challenge;
    tag.last_step = 3;
    StepResult r;
    r.step = 3;
    r.reply = make_reply(
        tag, MsgType::tag_hello, kTwoFieldBits,
        encrypt_payload(two_fields(*tag.n_t, tag.s), ks::base_schedule(tag.km),
                        tag.km, tag.width));
    return r;
}

StepResult reader_on_tag_hello(EntityState& reader, const ProtocolMessage& msg) {
    if (reader.phase != Phase::reader_awaiting_tag_hello) {
        return abort_with(reader, AbortReason::out_of_phase, 4);
    }
    auto fields = open_base(reader, msg, 2);
    if (!fields) return abort_with(reader, AbortReason::malformed, 4);
    u128 n_t = (*fields)[0];
    u128 s = (*fields)[1];
    reader.work.lookups += 1;
    if (!reader.known_secrets.contains(s)) {
        return abort_with(reader, AbortReason::unknown_secret, 4);
    }
    reader.n_t = n_t;
    reader.session_s = s;
    reader.n_r = reader.prng.next_u128();
    reader.phase = Phase::reader_awaiting_server;
    reader.last_step = 5;
    StepResult r;
    r.step = 5;
    r.reply = make_reply(
        reader, MsgType::reader_to_server, kTwoFieldBits,
        encrypt_payload(two_fields(*reader.n_r, s), ks::base_schedule(reader.km),
                        reader.km, reader.width));
    return r;
}

StepResult server_on_reader(EntityState& server, const ProtocolMessage& msg) {
    if (server.phase != Phase::idle) {
        return abort_with(server, AbortReason::out_of_phase, 6);
    }
    server.session_id = msg.session_id;
    auto fields = open_base(server, msg, 2);
    if (!fields) return abort_with(server, AbortReason::malformed, 6);
    u128 n_r = (*fields)[0];
    u128 s = (*fields)[1];
    server.work.lookups += 1;
    if (!server.known_secrets.contains(s)) {
        return abort_with(server, AbortReason::unknown_secret, 6);
    }
    server.n_r = n_r;
    server.session_s = s;
    RoundSecrets rs{server.prng.next_u128(), server.prng.next_u128(),
                    server.prng.next_u128()};
    accept_round(server, rs);
    server.phase = Phase::server_awaiting_reader_final;
    server.last_step = 7;
    StepResult r;
    r.step = 7;
    r.reply = make_reply(
        server, MsgType::server_to_reader, kFourFieldBits,
        encrypt_payload(four_fields(n_r, rs), ks::base_schedule(server.km),
                        server.km, server.width));
    return r;
}

StepResult reader_on_server(EntityState& reader, const ProtocolMessage& msg) {
    if (reader.phase != Phase::reader_awaiting_server) {
        return abort_with(reader, AbortReason::out_of_phase, 8);
    }
    auto fields = open_base(reader, msg, 4);
    if (!fields) return abort_with(reader, AbortReason::malformed, 8);
    if ((*fields)[0] != *reader.n_r) {
        return abort_with(reader, AbortReason::nonce_mismatch, 8);
    }
    RoundSecrets rs{(*fields)[1], (*fields)[2], (*fields)[3]};
    accept_round(reader, rs);
    reader.phase = Phase::reader_awaiting_tag_final;
    reader.last_step = 9;
    StepResult r;
    r.step = 9;
    r.reply = make_reply(
        reader, MsgType::challenge, kFourFieldBits,
        encrypt_payload(four_fields(*reader.n_t, rs), ks::base_schedule(reader.km),
                        reader.km, reader.width));
    return r;
}

StepResult tag_on_challenge(EntityState& tag, const ProtocolMessage& msg) {
    if (tag.phase != Phase::tag_awaiting_challenge) {
        return abort_with(tag, AbortReason::out_of_phase, 10);
    }
    auto fields = open_base(tag, msg, 4);
    if (!fields) return abort_with(tag, AbortReason::malformed, 10);
    if ((*fields)[0] != *tag.n_t) {
        return abort_with(tag, AbortReason::nonce_mismatch, 10);
    }
    RoundSecrets rs{(*fields)[1], (*fields)[2], (*fields)[3]};
    accept_round(tag, rs);
    ks::Schedule sched;
    try {
        sched = round_schedule(tag, rs);
    } catch (const ScheduleError&) {
        return abort_with(tag, AbortReason::schedule_error, 10);
    }
    tag.phase = Phase::done;
    tag.last_step = 11;
    StepResult r;
    r.step = 11;
    r.reply = make_reply(
        tag, MsgType::tag_final, kTwoFieldBits,
        encrypt_payload(two_fields(*tag.n_t + 1, tag.id), sched, tag.km, tag.width));
    return r;
}

StepResult reader_on_tag_final(EntityState& reader, const ProtocolMessage& msg) {
    if (reader.phase != Phase::reader_awaiting_tag_final) {
        return abort_with(reader, AbortReason::out_of_phase, 12);
    }
    FinalOpen open = open_final(reader, msg, *reader.n_t + 1);
    if (!open.ok) return abort_with(reader, open.why, 12);
    reader.recovered_id = open.id;
    if (reader.round && open.used == *reader.round) reader.round_confirmed = true;
    reader.phase = Phase::done;
    reader.last_step = 13;
    StepResult r;
    r.step = 13;
    r.reply = make_reply(
        reader, MsgType::reader_final, kTwoFieldBits,
        encrypt_payload(two_fields(*reader.n_r + 1, open.id),
                        round_schedule(reader, open.used), reader.km,
                        reader.width));
    return r;
}

StepResult server_on_reader_final(EntityState& server, const ProtocolMessage& msg) {
    if (server.phase != Phase::server_awaiting_reader_final) {
        return abort_with(server, AbortReason::out_of_phase, 14);
    }
    FinalOpen open = open_final(server, msg, *server.n_r + 1);
    if (!open.ok) return abort_with(server, open.why, 14);
    server.recovered_id = open.id;
    if (server.round && open.used == *server.round) server.round_confirmed = true;
    server.phase = Phase::done;
    server.last_step = 14;
    StepResult r;
    r.step = 14;
    r.outcome = SessionOutcome{open.id};
    return r;
}

StepResult handle(EntityState& state, const ProtocolMessage& msg) {
    switch (state.role) {
        case Role::tag:
            if (msg.type == MsgType::query) return tag_on_query(state, msg);
            if (msg.type == MsgType::challenge) return tag_on_challenge(state, msg);
            break;
        case Role::reader:
            if (msg.type == MsgType::tag_hello) return reader_on_tag_hello(state, msg);
            if (msg.type == MsgType::server_to_reader) return reader_on_server(state, msg);
            if (msg.type == MsgType::tag_final) return reader_on_tag_final(state, msg);
            break;
        case Role::server:
            if (msg.type == MsgType::reader_to_server) return server_on_reader(state, msg);
            if (msg.type == MsgType::reader_final)
                return server_on_reader_final(state, msg);
            break;
    }
    return StepResult{};  // not addressed to this entity; ignored
}

}  // namespace varikey::protocol
