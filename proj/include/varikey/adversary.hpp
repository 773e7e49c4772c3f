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
#ifndef VARIKEY_ADVERSARY_HPP
#define VARIKEY_ADVERSARY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varikey/protocol.hpp"

namespace varikey::adversary {

enum class Scenario {
    replay,
    impersonate_tag,
    impersonate_reader,
    mitm_tamper,
    desync,
    dos_flood,
    tracking,
};

Scenario scenario_from_name(std::string_view name);  // ConfigError on unknown
std::string_view scenario_name(Scenario s);

struct TranscriptEntry {
    unsigned step = 0;  // transit step: 1, 3, 5, 7, 9, 11 or 13
    protocol::MsgType type = protocol::MsgType::query;
    std::vector<std::uint8_t> bytes;  // exactly what crossed the wire
    bool operator==(const TranscriptEntry&) const = default;
};

using Transcript = std::vector<TranscriptEntry>;

/// Stores observed wire bytes verbatim; replaying yields identical bytes.
class MessageArchive {
public:
    MessageArchive() = default;
    explicit MessageArchive(const Transcript& t) : entries_(t) {}
    void store(const TranscriptEntry& e) { entries_.push_back(e); }
    std::size_t size() const { return entries_.size(); }
    const TranscriptEntry& at(std::size_t i) const { return entries_.at(i); }
    std::vector<std::uint8_t> replay(std::size_t i) const {
        return entries_.at(i).bytes;
    }

private:
    std::vector<TranscriptEntry> entries_;
};

/// One scripted interference on the insecure channel.
struct ChannelAction {
    enum class Kind { deliver, drop, replay, tamper, inject };
    Kind kind = Kind::deliver;
    unsigned target_step = 0;          // transit step the action applies to
    std::size_t replay_ref = 0;        // archive index for Kind::replay
    std::size_t symbol_index = 0;      // payload position for Kind::tamper
    std::uint64_t xor_mask = 0;        // mask for Kind::tamper
    std::optional<protocol::ProtocolMessage> forged;  // for Kind::inject
};

struct ScenarioConfig {
    std::uint64_t p = 16;
    unsigned N = 2;
    unsigned n = 2;
    unsigned blocks = 2;
    unsigned flood_count = 8;
    unsigned tamper_step = 7;
};

/// key=value lines ('#' comments); returns scenario, seed and parameters.
struct ScenarioSpec {
    Scenario scenario = Scenario::replay;
    std::uint64_t seed = 0;
    ScenarioConfig config;
};
ScenarioSpec parse_scenario_config(std::string_view text);

struct ScenarioVerdict {
    bool attack_succeeded = false;
    std::optional<unsigned> abort_step;
    Transcript transcript;  // the adversarial session's traffic
    std::string detail;
};

/// The three honest endpoints of a run; a null pointer marks an absent
/// entity whose traffic (if any) must come from the script.
struct Entities {
    protocol::EntityState* tag = nullptr;
    protocol::EntityState* reader = nullptr;
    protocol::EntityState* server = nullptr;
};

struct SessionResult {
    std::optional<protocol::SessionOutcome> outcome;
    std::optional<protocol::AbortReason> abort;
    unsigned abort_step = 0;
    Transcript transcript;
};

/// Drives the standard message flow (transit steps 1,3,5,7,9,11,13) with the
/// scripted channel actions applied in transit. Entities are reset to idle at
/// the start; retained round secrets survive per protocol rules.
SessionResult run_session(Entities entities,
                          std::span<const ChannelAction> script = {},
                          const MessageArchive* archive = nullptr);

/// Executes one attack scenario, including its honest baseline (the baseline
/// must succeed or the configuration is rejected with ConfigError).
ScenarioVerdict run_scenario(Scenario scenario, const ScenarioConfig& config,
                             std::uint64_t seed);

/// Hex dump, one message per line.
std::string transcript_hex(const Transcript& t);

/// Number of initial moduli p' <= limit whose selection table contains q.
/// An observer of q cannot pin down p when this exceeds one.
unsigned modulus_preimage_count(std::uint64_t q, std::uint64_t limit);

}  // namespace varikey::adversary

#endif
