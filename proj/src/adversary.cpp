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
#include "varikey/adversary.hpp"

#include <array>
#include <random>
#include <sstream>

namespace varikey::adversary {

namespace pr = varikey::protocol;
namespace ks = varikey::keyschedule;

Scenario scenario_from_name(std::string_view name) {
    if (name == "replay") return Scenario::replay;
    if (name == "impersonate-tag") return Scenario::impersonate_tag;
    if (name == "impersonate-reader") return Scenario::impersonate_reader;
    if (name == "mitm-tamper") return Scenario::mitm_tamper;
    if (name == "desync") return Scenario::desync;
    if (name == "dos-flood") return Scenario::dos_flood;
    if (name == "tracking") return Scenario::tracking;
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string_view scenario_name(Scenario s) {
    switch (s) {
        case Scenario::replay: return "replay";
        case Scenario::impersonate_tag: return "impersonate-tag";
        case Scenario::impersonate_reader: return "impersonate-reader";
        case Scenario::mitm_tamper: return "mitm-tamper";
        case Scenario::desync: return "desync";
        case Scenario::dos_flood: return "dos-flood";
        case Scenario::tracking: return "tracking";
    }
    return "?";
}

ScenarioSpec parse_scenario_config(std::string_view text) {
    ScenarioSpec spec;
    bool have_scenario = false;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' ||
                                 line.back() == '\t')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line.erase(0, start);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        try {
            if (key == "scenario") {
                spec.scenario = scenario_from_name(value);
                have_scenario = true;
            } else if (key == "seed") {
                spec.seed = std::stoull(value);
            } else if (key == "p") {
                spec.config.p = std::stoull(value);
            } else if (key == "N") {
                spec.config.N = static_cast<unsigned>(std::stoul(value));
            } else if (key == "n") {
                spec.config.n = static_cast<unsigned>(std::stoul(value));
            } else if (key == "blocks") {
                spec.config.blocks = static_cast<unsigned>(std::stoul(value));
            } else if (key == "flood_count") {
                spec.config.flood_count = static_cast<unsigned>(std::stoul(value));
            } else if (key == "tamper_step") {
                spec.config.tamper_step = static_cast<unsigned>(std::stoul(value));
            } else {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("line " + std::to_string(lineno) + ": bad value '" +
                              value + "' for key '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("line " + std::to_string(lineno) + ": bad value '" +
                              value + "' for key '" + key + "'");
        }
    }
    if (!have_scenario) throw ConfigError("missing 'scenario=' line");
    return spec;
}

namespace {

constexpr std::array<unsigned, 7> kTransitSteps{1, 3, 5, 7, 9, 11, 13};

struct Trio {
    pr::EntityState tag;
    pr::EntityState reader;
    pr::EntityState server;
    u128 tag_id;
    u128 secret;
};

Trio make_trio(const ScenarioConfig& cfg, std::uint64_t seed) {
    if (cfg.N == 0 || cfg.n == 0 || cfg.blocks == 0 || cfg.blocks > cfg.N) {
        throw ConfigError("bad entity parameters: N, n >= 1 and 1 <= blocks <= N");
    }
    ks::KeyMaterial km = ks::keygen(cfg.N, cfg.n, cfg.p, seed);
    u128 id = make_u128(0x1d00 + seed, seed * 3 + 1);
    u128 s = make_u128(0x5ec0 + seed, seed * 7 + 5);
    return Trio{pr::make_tag(km, id, s, seed + 11, cfg.blocks),
                pr::make_reader(km, {s}, seed + 22, cfg.blocks),
                pr::make_server(km, {s}, seed + 33, cfg.blocks),
                id,
                s};
}

const ChannelAction* find_action(std::span<const ChannelAction> script,
                                 unsigned step) {
    for (const ChannelAction& a : script) {
        if (a.target_step == step) return &a;
    }
    return nullptr;
}

void record(Transcript& t, unsigned step, const std::vector<std::uint8_t>& bytes) {
    TranscriptEntry e;
    e.step = step;
    e.bytes = bytes;
    if (bytes.size() > 3 &&
        bytes[3] <= static_cast<std::uint8_t>(pr::MsgType::reader_final)) {
        e.type = static_cast<pr::MsgType>(bytes[3]);
    }
    t.push_back(std::move(e));
}

}  // namespace

SessionResult run_session(Entities en, std::span<const ChannelAction> script,
                          const MessageArchive* archive) {
    SessionResult res;
    if (en.tag) pr::reset_session(*en.tag);
    if (en.reader) pr::reset_session(*en.reader);
    if (en.server) pr::reset_session(*en.server);

    pr::EntityState* consumers[] = {en.tag,    en.reader, en.server, en.reader,
                                    en.tag,    en.reader, en.server};
    std::optional<pr::ProtocolMessage> pending;
    if (en.reader) pending = pr::make_query(*en.reader);

    for (std::size_t i = 0; i < kTransitSteps.size(); ++i) {
        unsigned step = kTransitSteps[i];
        std::optional<std::vector<std::uint8_t>> bytes;
        if (pending) bytes = pr::encode_message(*pending);
        pending.reset();

        if (const ChannelAction* act = find_action(script, step)) {
            switch (act->kind) {
                case ChannelAction::Kind::deliver:
                    break;
                case ChannelAction::Kind::drop:
                    bytes.reset();
                    break;
                case ChannelAction::Kind::replay:
                    if (!archive) throw ConfigError("replay action without archive");
                    bytes = archive->replay(act->replay_ref);
                    break;
                case ChannelAction::Kind::tamper: {
                    if (!bytes) break;
                    pr::ProtocolMessage m = pr::decode_message(*bytes);
                    if (act->symbol_index >= m.payload.size()) {
                        throw ConfigError("tamper index " +
                                          std::to_string(act->symbol_index) +
                                          " outside payload");
                    }
                    m.payload[act->symbol_index] ^= act->xor_mask;
                    bytes = pr::encode_message(m);
                    break;
                }
                case ChannelAction::Kind::inject:
                    if (!act->forged) throw ConfigError("inject action without message");
                    bytes = pr::encode_message(*act->forged);
                    break;
            }
        }
        if (!bytes) continue;  // nothing crossed the wire at this step
        record(res.transcript, step, *bytes);

        pr::EntityState* consumer = consumers[i];
        if (!consumer) continue;  // absent endpoint; message falls on the floor
        pr::ProtocolMessage msg;
        try {
            msg = pr::decode_message(*bytes);
        } catch (const DecodeError&) {
            res.abort = pr::AbortReason::malformed;
            res.abort_step = step + 1;
            return res;
        }
        pr::StepResult r = pr::handle(*consumer, msg);
        if (r.abort) {
            res.abort = r.abort;
            res.abort_step = r.step;
            return res;
        }
        if (r.outcome) {
            res.outcome = r.outcome;
            return res;
        }
        pending = std::move(r.reply);
    }
    return res;
}

namespace {

ScenarioVerdict verdict_from(const SessionResult& run, bool attack_succeeded,
                             std::string detail) {
    ScenarioVerdict v;
    v.attack_succeeded = attack_succeeded;
    if (run.abort) v.abort_step = run.abort_step;
    v.transcript = run.transcript;
    v.detail = std::move(detail);
    return v;
}

// A well-formed hello carrying a wrong secret: decrypts cleanly, fails the
// lookup. This is the most expensive message a reader can be made to reject.
pr::ProtocolMessage forge_wrong_secret_hello(const Trio& t, std::mt19937_64& eng) {
    u128 wrong = make_u128(eng(), eng());
    if (wrong == t.secret) wrong += 1;
    pr::EntityState fake = pr::make_tag(t.tag.km, make_u128(eng(), eng()), wrong,
                                        eng(), t.tag.blocks);
    pr::ProtocolMessage q;
    q.type = pr::MsgType::query;
    q.session_id = eng();
    pr::StepResult r = pr::tag_on_query(fake, q);
    return *r.reply;
}

// A key-less forgery: correct framing, uniformly random symbols below p.
pr::ProtocolMessage forge_random_payload(pr::MsgType type, std::uint64_t session_id,
                                         unsigned width, std::uint32_t bits,
                                         std::size_t symbols, std::uint64_t p,
                                         std::mt19937_64& eng) {
    pr::ProtocolMessage m;
    m.type = type;
    m.session_id = session_id;
    m.symbol_width_bits = width;
    m.original_bit_length = bits;
    m.payload.resize(symbols);
    for (auto& s : m.payload) s = eng() % p;
    return m;
}

ScenarioVerdict scenario_replay(Trio& t, const MessageArchive& archive,
                                std::mt19937_64&) {
    // The recorded tag messages are played back into a fresh session; the
    // real tag is out of range.
    std::vector<ChannelAction> script;
    ChannelAction hello;
    hello.kind = ChannelAction::Kind::replay;
    hello.target_step = 3;
    hello.replay_ref = 1;
    script.push_back(hello);
    ChannelAction final_msg;
    final_msg.kind = ChannelAction::Kind::replay;
    final_msg.target_step = 11;
    final_msg.replay_ref = 5;
    script.push_back(final_msg);

    Entities en{nullptr, &t.reader, &t.server};
    SessionResult run = run_session(en, script, &archive);
    bool won = run.outcome.has_value();
    return verdict_from(run, won,
                        won ? "replayed transcript was accepted (schedule collision)"
                            : "replayed transcript rejected");
}

ScenarioVerdict scenario_impersonate_tag(Trio& t, std::mt19937_64& eng) {
    std::vector<ChannelAction> script;
    ChannelAction inject;
    inject.kind = ChannelAction::Kind::inject;
    inject.target_step = 3;
    inject.forged = forge_wrong_secret_hello(t, eng);
    script.push_back(inject);

    Entities en{nullptr, &t.reader, &t.server};
    SessionResult run = run_session(en, script);
    return verdict_from(run, run.outcome.has_value(),
                        "hello with unknown secret value");
}

ScenarioVerdict scenario_impersonate_reader(Trio& t, std::mt19937_64& eng) {
    // The fake reader holds no key material: it can query the tag, observe
    // the opaque hello, and must fabricate the challenge leg.
    pr::reset_session(t.tag);
    ScenarioVerdict v;
    v.detail = "key-less reader forgery";

    pr::ProtocolMessage q;
    q.type = pr::MsgType::query;
    q.session_id = eng();
    record(v.transcript, 1, pr::encode_message(q));
    pr::StepResult hello = pr::tag_on_query(t.tag, q);
    record(v.transcript, 3, pr::encode_message(*hello.reply));

    // the forger mirrors the shape of an honest challenge
    std::size_t order = t.tag.km.order();
    std::size_t raw = (512 + t.tag.width - 1) / t.tag.width;
    std::size_t symbols = (raw + order - 1) / order * order;
    pr::ProtocolMessage forged = forge_random_payload(
        pr::MsgType::challenge, q.session_id, t.tag.width, 512, symbols,
        t.tag.km.p, eng);
    record(v.transcript, 9, pr::encode_message(forged));
    pr::StepResult res = pr::tag_on_challenge(t.tag, forged);
    if (res.abort) v.abort_step = res.step;
    v.attack_succeeded = res.reply.has_value();
    return v;
}

ScenarioVerdict scenario_mitm_tamper(Trio& t, const ScenarioConfig& cfg,
                                     std::mt19937_64& eng) {
    bool is_transit = false;
    for (unsigned s : kTransitSteps) is_transit |= (s == cfg.tamper_step);
    if (!is_transit || cfg.tamper_step == 1) {
        throw ConfigError("tamper_step must be one of 3, 5, 7, 9, 11, 13");
    }
    // probe the honest flow to size the target payload
    Entities en{&t.tag, &t.reader, &t.server};
    SessionResult probe = run_session(en);
    if (!probe.outcome) throw ConfigError("tamper probe session failed");
    std::size_t payload_size = 0;
    for (const TranscriptEntry& e : probe.transcript) {
        if (e.step == cfg.tamper_step) {
            payload_size = pr::decode_message(e.bytes).payload.size();
        }
    }
    ChannelAction tamper;
    tamper.kind = ChannelAction::Kind::tamper;
    tamper.target_step = cfg.tamper_step;
    tamper.symbol_index = eng() % payload_size;
    tamper.xor_mask = 1;
    std::vector<ChannelAction> script{tamper};
    SessionResult run = run_session(en, script);
    return verdict_from(run, run.outcome.has_value(),
                        "one symbol flipped at step " +
                            std::to_string(cfg.tamper_step));
}

ScenarioVerdict scenario_desync(Trio& t, std::mt19937_64&) {
    // Block the tag's final message, then check that the next honest session
    // still authenticates.
    ChannelAction drop;
    drop.kind = ChannelAction::Kind::drop;
    drop.target_step = 11;
    std::vector<ChannelAction> script{drop};
    Entities en{&t.tag, &t.reader, &t.server};
    SessionResult blocked = run_session(en, script);

    SessionResult recovery = run_session(en);
    ScenarioVerdict v;
    v.attack_succeeded = !recovery.outcome.has_value();
    v.transcript = blocked.transcript;
    if (recovery.abort) v.abort_step = recovery.abort_step;
    v.detail = v.attack_succeeded
                   ? "post-desync session failed to authenticate"
                   : "fresh round secrets restored synchronization";
    return v;
}

ScenarioVerdict scenario_dos_flood(Trio& t, const ScenarioConfig& cfg,
                                   std::mt19937_64& eng) {
    if (cfg.flood_count == 0) throw ConfigError("flood_count must be >= 1");
    ScenarioVerdict v;
    bool bounded = true;
    bool authenticated = false;
    for (unsigned i = 0; i < cfg.flood_count; ++i) {
        pr::reset_session(t.reader);
        pr::ProtocolMessage q = pr::make_query(t.reader);
        record(v.transcript, 1, pr::encode_message(q));
        pr::ProtocolMessage bogus = forge_wrong_secret_hello(t, eng);
        bogus.session_id = q.session_id;
        record(v.transcript, 3, pr::encode_message(bogus));
        std::uint64_t d0 = t.reader.work.decrypts;
        std::uint64_t l0 = t.reader.work.lookups;
        pr::StepResult r = pr::reader_on_tag_hello(t.reader, bogus);
        authenticated |= r.reply.has_value();
        if (r.step != 4 || !r.abort) authenticated = true;
        bounded &= (t.reader.work.decrypts - d0 == 1) &&
                   (t.reader.work.lookups - l0 == 1);
        if (r.abort) v.abort_step = r.step;
    }
    // the flood must not block honest service
    Entities en{&t.tag, &t.reader, &t.server};
    SessionResult after = run_session(en);
    v.attack_succeeded = authenticated || !bounded || !after.outcome.has_value();
    v.detail = std::string("per-message work ") +
               (bounded ? "stayed at one decrypt + one lookup"
                        : "exceeded one decrypt + one lookup") +
               (after.outcome ? "; honest session still succeeds"
                              : "; honest session blocked");
    return v;
}

ScenarioVerdict scenario_tracking(Trio& t, std::mt19937_64&) {
    Entities en{&t.tag, &t.reader, &t.server};
    SessionResult a = run_session(en);
    SessionResult b = run_session(en);
    ScenarioVerdict v;
    v.transcript = b.transcript;
    if (!a.outcome || !b.outcome) {
        v.attack_succeeded = true;
        v.detail = "tracking sessions did not complete";
        return v;
    }
    // the distinguisher wins if any ciphertext repeats across the sessions
    for (const TranscriptEntry& ea : a.transcript) {
        if (ea.step == 1) continue;
        for (const TranscriptEntry& eb : b.transcript) {
            if (eb.step != ea.step) continue;
            pr::ProtocolMessage ma = pr::decode_message(ea.bytes);
            pr::ProtocolMessage mb = pr::decode_message(eb.bytes);
            if (ma.payload == mb.payload) {
                v.attack_succeeded = true;
                v.detail = "ciphertext collision at step " + std::to_string(ea.step);
                return v;
            }
        }
    }
    v.detail = "no ciphertext repeats across sessions";
    return v;
}

}  // namespace

ScenarioVerdict run_scenario(Scenario scenario, const ScenarioConfig& config,
                             std::uint64_t seed) {
    Trio t = make_trio(config, seed);
    std::mt19937_64 eng(seed ^ 0xad7e55a11ull);

    // honest baseline with the same configuration; a failing baseline means
    // the scenario would be vacuous
    Entities en{&t.tag, &t.reader, &t.server};
    SessionResult baseline = run_session(en);
    if (!baseline.outcome || baseline.outcome->id != t.tag_id) {
        throw ConfigError("honest baseline failed for scenario " +
                          std::string(scenario_name(scenario)));
    }

    switch (scenario) {
        case Scenario::replay: {
            MessageArchive archive(baseline.transcript);
            return scenario_replay(t, archive, eng);
        }
        case Scenario::impersonate_tag:
            return scenario_impersonate_tag(t, eng);
        case Scenario::impersonate_reader:
            return scenario_impersonate_reader(t, eng);
        case Scenario::mitm_tamper:
            return scenario_mitm_tamper(t, config, eng);
        case Scenario::desync:
            return scenario_desync(t, eng);
        case Scenario::dos_flood:
            return scenario_dos_flood(t, config, eng);
        case Scenario::tracking:
            return scenario_tracking(t, eng);
    }
    throw ConfigError("unhandled scenario");
}

std::string transcript_hex(const Transcript& t) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (const TranscriptEntry& e : t) {
        for (std::uint8_t b : e.bytes) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0xf]);
        }
        out.push_back('\n');
    }
    return out;
}

unsigned modulus_preimage_count(std::uint64_t q, std::uint64_t limit) {
    unsigned count = 0;
    for (std::uint64_t p = 4; p <= limit; ++p) {
        try {
            for (std::uint64_t entry : ks::build_am_table(p)) {
                if (entry == q) {
                    ++count;
                    break;
                }
            }
        } catch (const NoDivisorsError&) {
        }
    }
    return count;
}

}  // namespace varikey::adversary
