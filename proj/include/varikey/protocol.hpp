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
#ifndef VARIKEY_PROTOCOL_HPP
#define VARIKEY_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "varikey/bits.hpp"
#include "varikey/keyschedule.hpp"
#include "varikey/u128.hpp"

namespace varikey::protocol {

/// Deterministic per-entity generator: reproducible 128-bit outputs from a
/// 64-bit seed. The engine is fully specified, so transcripts replay across
/// platforms.
class Prng {
public:
    explicit Prng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t next_u64() { return eng_(); }
    u128 next_u128() {
        std::uint64_t hi = eng_();
        return make_u128(hi, eng_());
    }

private:
    std::mt19937_64 eng_;
};

enum class MsgType : std::uint8_t {
    query = 0,
    tag_hello = 1,
    reader_to_server = 2,
    server_to_reader = 3,
    challenge = 4,
    tag_final = 5,
    reader_final = 6,
};

/// Typed wire message. The payload carries ciphertext symbols; the declared
/// width and bit length describe the plaintext encoding underneath and the
/// session id is unauthenticated plumbing for multiplexing.
struct ProtocolMessage {
    MsgType type = MsgType::query;
    std::uint64_t session_id = 0;
    unsigned symbol_width_bits = 0;
    std::uint32_t original_bit_length = 0;
    std::vector<std::uint64_t> payload;

    bool operator==(const ProtocolMessage&) const = default;
};

/// Big-endian layout: magic 0xA55A (2), version (1), msg_type (1),
/// session_id (8), symbol_width_bits (1), reserved (1),
/// original_bit_length (4), symbol_count (2), then 8 bytes per symbol.
/// The fixed header is 20 bytes; a query is exactly the header.
std::vector<std::uint8_t> encode_message(const ProtocolMessage& msg);
ProtocolMessage decode_message(std::span<const std::uint8_t> bytes);

enum class Role { tag, reader, server };

enum class Phase {
    idle,
    reader_awaiting_tag_hello,
    tag_awaiting_challenge,
    reader_awaiting_server,
    server_awaiting_reader_final,
    reader_awaiting_tag_final,
    done,
};

enum class AbortReason {
    unknown_secret,
    malformed,
    nonce_mismatch,
    schedule_error,
    out_of_phase,
};

struct SessionOutcome {
    u128 id = 0;  // the authenticated tag identifier
    bool operator==(const SessionOutcome&) const = default;
};

struct RoundSecrets {
    u128 s_d = 0;
    u128 s_p = 0;
    u128 s_c = 0;
    bool operator==(const RoundSecrets&) const = default;
};

struct WorkCounters {
    std::uint64_t decrypts = 0;
    std::uint64_t lookups = 0;
};

struct EntityState {
    Role role = Role::tag;
    keyschedule::KeyMaterial km;
    unsigned blocks = 1;  // block level used for the derived schedule
    unsigned width = 1;   // symbol width valid under every table modulus

    u128 id = 0;                   // tag identity (tag only)
    u128 s = 0;                    // tag's long-term shared secret (tag only)
    std::set<u128> known_secrets;  // reader/server lookup store
    u128 session_s = 0;            // secret recovered this session

    std::optional<u128> n_t;
    std::optional<u128> n_r;
    std::optional<RoundSecrets> round;
    // Retained only while the session that delivered `round` has not been
    // verified end to end; a confirmed round never becomes a fallback, so a
    // recorded transcript cannot be replayed into the next session.
    std::optional<RoundSecrets> prev_round;
    bool round_confirmed = false;
    std::optional<u128> recovered_id;

    Phase phase = Phase::idle;
    unsigned last_step = 0;  // monotone within a session
    std::uint64_t session_id = 0;
    WorkCounters work;
    Prng prng;

    explicit EntityState(std::uint64_t seed) : prng(seed) {}
};

EntityState make_tag(keyschedule::KeyMaterial km, u128 id, u128 s,
                     std::uint64_t seed, unsigned blocks);
EntityState make_reader(keyschedule::KeyMaterial km, std::set<u128> secrets,
                        std::uint64_t seed, unsigned blocks);
EntityState make_server(keyschedule::KeyMaterial km, std::set<u128> secrets,
                        std::uint64_t seed, unsigned blocks);

/// Outcome of feeding one message to one entity. At most one of reply /
/// abort / outcome is set; all empty means the message was ignored.
struct StepResult {
    std::optional<ProtocolMessage> reply;
    std::optional<AbortReason> abort;
    std::optional<SessionOutcome> outcome;
    unsigned step = 0;  // protocol step that produced this result
};

/// Step 1: the reader opens a session and emits the query.
ProtocolMessage make_query(EntityState& reader);

/// Steps 2-3: nonce generation and the encrypted hello.
StepResult tag_on_query(EntityState& tag, const ProtocolMessage& msg);
/// Steps 4-5: secret lookup, then the encrypted reader-to-server hop.
StepResult reader_on_tag_hello(EntityState& reader, const ProtocolMessage& msg);
/// Steps 6-7: secret lookup, fresh round secrets, reply toward the reader.
StepResult server_on_reader(EntityState& server, const ProtocolMessage& msg);
/// Steps 8-9: reader nonce check, round secrets accepted, challenge emitted.
StepResult reader_on_server(EntityState& reader, const ProtocolMessage& msg);
/// Steps 10-11: tag nonce check, schedule derivation, final tag message.
StepResult tag_on_challenge(EntityState& tag, const ProtocolMessage& msg);
/// Steps 12-13: schedule re-derivation, identity recovery, final reader hop.
StepResult reader_on_tag_final(EntityState& reader, const ProtocolMessage& msg);
/// Step 14: server-side verification; yields the session outcome.
StepResult server_on_reader_final(EntityState& server, const ProtocolMessage& msg);

/// Dispatches a delivered message by role, type, and phase. Messages that do
/// not apply to the entity are ignored without a state change.
StepResult handle(EntityState& state, const ProtocolMessage& msg);

/// Ends the current session: phase back to idle, per-session values cleared.
/// Accepted round secrets are retained (and become the previous round's
/// secrets once a new round is accepted).
void reset_session(EntityState& state);

/// Ciphertext payload for a bit string under a schedule: bits are chunked
/// into width-bit symbols, padded to the schedule order, and each segment is
/// encrypted through the chain.
std::vector<std::uint64_t> encrypt_payload(const BitVec& bits,
                                           const keyschedule::Schedule& sched,
                                           const keyschedule::KeyMaterial& km,
                                           unsigned width);

/// Inverse of encrypt_payload; throws EncodingError when the payload shape,
/// symbol ranges, or padding are inconsistent with the declared bit length.
BitVec decrypt_payload(std::span<const std::uint64_t> payload,
                       const keyschedule::Schedule& sched,
                       const keyschedule::KeyMaterial& km, unsigned width,
                       std::uint32_t original_bit_length);

}  // namespace varikey::protocol

#endif
