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
#include "varikey/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <sstream>

#include "varikey/adversary.hpp"
#include "varikey/analysis.hpp"
#include "varikey/banlogic.hpp"
#include "varikey/keyschedule.hpp"
#include "varikey/protocol.hpp"

namespace varikey::cli {

namespace ks = varikey::keyschedule;
namespace pr = varikey::protocol;
namespace adv = varikey::adversary;
namespace an = varikey::analysis;
namespace mm = varikey::modmatrix;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-") {
        out << text;
        return;
    }
    std::ofstream f(out_path);
    if (!f.good()) throw Error("cannot write '" + out_path + "'");
    f << text;
}

struct SecretArgs {
    std::string sc, sp, sd;
    unsigned blocks = 1;
};

ks::Schedule schedule_from_args(const SecretArgs& sa, const ks::KeyMaterial& km) {
    return ks::derive_schedule(u128_parse(sa.sc), u128_parse(sa.sp),
                               u128_parse(sa.sd), km, sa.blocks);
}

constexpr const char* kCipherMagic = "AMCIPH v1";

std::string format_ciphertext(const std::vector<std::uint64_t>& symbols,
                              unsigned width, std::size_t bits, unsigned blocks) {
    std::ostringstream out;
    out << kCipherMagic << " width=" << width << " bits=" << bits
        << " blocks=" << blocks << "\n";
    bool first = true;
    for (std::uint64_t s : symbols) {
        if (!first) out << ' ';
        out << s;
        first = false;
    }
    out << "\n";
    return out.str();
}

struct Ciphertext {
    std::vector<std::uint64_t> symbols;
    unsigned width = 0;
    std::uint32_t bits = 0;
    unsigned blocks = 0;
};

Ciphertext parse_ciphertext(const std::string& text) {
    std::istringstream in(text);
    std::string magic, v, wf, bf, kf;
    in >> magic >> v >> wf >> bf >> kf;
    if (magic != "AMCIPH" || v != "v1" || wf.rfind("width=", 0) != 0 ||
        bf.rfind("bits=", 0) != 0 || kf.rfind("blocks=", 0) != 0) {
        throw DecodeError("bad ciphertext header");
    }
    Ciphertext c;
    c.width = static_cast<unsigned>(std::stoul(wf.substr(6)));
    c.bits = static_cast<std::uint32_t>(std::stoul(bf.substr(5)));
    c.blocks = static_cast<unsigned>(std::stoul(kf.substr(7)));
    std::uint64_t s;
    while (in >> s) c.symbols.push_back(s);
    if (c.symbols.empty()) throw DecodeError("ciphertext has no symbols");
    return c;
}

int cmd_keygen(unsigned N, unsigned n, std::uint64_t p, std::uint64_t seed,
               const std::string& out_path, std::ostream& out) {
    ks::KeyMaterial km = ks::keygen(N, n, p, seed);
    emit(ks::save_key_material(km), out_path, out);
    return 0;
}

int cmd_encrypt(const std::string& keys_path, const SecretArgs& sa,
                const std::string& hex, const std::string& out_path,
                std::ostream& out) {
    ks::KeyMaterial km = ks::load_key_material(slurp(keys_path));
    ks::Schedule sched = schedule_from_args(sa, km);
    unsigned width = mm::symbol_width_for(km.am_table);
    BitVec bits = BitVec::from_hex(hex);
    auto symbols = pr::encrypt_payload(bits, sched, km, width);
    emit(format_ciphertext(symbols, width, bits.size(), sa.blocks), out_path, out);
    return 0;
}

int cmd_decrypt(const std::string& keys_path, const SecretArgs& sa,
                const std::string& in_path, const std::string& out_path,
                std::ostream& out) {
    ks::KeyMaterial km = ks::load_key_material(slurp(keys_path));
    Ciphertext c = parse_ciphertext(slurp(in_path));
    SecretArgs effective = sa;
    effective.blocks = c.blocks;
    ks::Schedule sched = schedule_from_args(effective, km);
    BitVec bits = pr::decrypt_payload(c.symbols, sched, km, c.width, c.bits);
    emit(bits.to_hex() + "\n", out_path, out);
    return 0;
}

int cmd_simulate(const std::string& scenario_name, std::uint64_t seed,
                 const std::string& config_path, adv::ScenarioConfig cfg,
                 const std::string& transcript_path, std::ostream& out) {
    if (!config_path.empty()) {
        adv::ScenarioSpec spec = adv::parse_scenario_config(slurp(config_path));
        cfg = spec.config;
        adv::ScenarioVerdict v = adv::run_scenario(spec.scenario, cfg, spec.seed);
        out << "scenario=" << adv::scenario_name(spec.scenario)
            << " seed=" << spec.seed << "\n"
            << "attack_succeeded=" << (v.attack_succeeded ? "true" : "false")
            << "\n";
        if (v.abort_step) out << "abort_step=" << *v.abort_step << "\n";
        out << "detail=" << v.detail << "\n";
        if (!transcript_path.empty()) {
            emit(adv::transcript_hex(v.transcript), transcript_path, out);
        }
        return 0;
    }
    if (scenario_name.empty() || scenario_name == "honest") {
        ks::KeyMaterial km = ks::keygen(cfg.N, cfg.n, cfg.p, seed);
        u128 id = make_u128(seed, 0xeeff);
        u128 s = make_u128(seed, 0xaabb);
        pr::EntityState tag = pr::make_tag(km, id, s, seed + 1, cfg.blocks);
        pr::EntityState reader = pr::make_reader(km, {s}, seed + 2, cfg.blocks);
        pr::EntityState server = pr::make_server(km, {s}, seed + 3, cfg.blocks);
        adv::Entities en{&tag, &reader, &server};
        adv::SessionResult r = adv::run_session(en);
        out << "scenario=honest seed=" << seed << "\n";
        if (r.outcome) {
            out << "outcome=MutualAuthSuccess id=0x" << u128_hex(r.outcome->id)
                << "\n";
        } else {
            out << "outcome=failed";
            if (r.abort) out << " abort_step=" << r.abort_step;
            out << "\n";
        }
        if (!transcript_path.empty()) {
            emit(adv::transcript_hex(r.transcript), transcript_path, out);
        }
        return r.outcome ? 0 : 1;
    }
    adv::Scenario sc = adv::scenario_from_name(scenario_name);
    adv::ScenarioVerdict v = adv::run_scenario(sc, cfg, seed);
    out << "scenario=" << adv::scenario_name(sc) << " seed=" << seed << "\n"
        << "attack_succeeded=" << (v.attack_succeeded ? "true" : "false") << "\n";
    if (v.abort_step) out << "abort_step=" << *v.abort_step << "\n";
    out << "detail=" << v.detail << "\n";
    if (!transcript_path.empty()) {
        emit(adv::transcript_hex(v.transcript), transcript_path, out);
    }
    return 0;
}

int cmd_ban_check(const std::string& path, bool print_proof, std::ostream& out) {
    namespace ban = varikey::banlogic;
    ban::Fixture f = ban::load_fixture(slurp(path));
    ban::Derivation d = ban::derive(f.assumption_statements(),
                                    f.message_statements(), f.goal_statements());
    if (print_proof) out << ban::format_proof(d, f);
    std::size_t total = f.goals.size();
    out << (total - d.underivable.size()) << "/" << total << " goals derived\n";
    if (!d.success) {
        for (const ban::Statement& g : d.underivable) {
            out << "underivable: " << ban::to_string(g) << "\n";
        }
        return 1;
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"variable key-matrix encryption and authentication toolkit",
                 "varikey"};
    app.require_subcommand(1);

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate key material");
    unsigned kg_N = 2, kg_n = 2;
    std::uint64_t kg_p = 16, kg_seed = 0;
    std::string kg_out;
    keygen->add_option("--N", kg_N, "number of base matrices")->required();
    keygen->add_option("--n", kg_n, "matrix order")->required();
    keygen->add_option("--p", kg_p, "initial modulus (composite)")->required();
    keygen->add_option("--seed", kg_seed, "generator seed");
    keygen->add_option("--out", kg_out, "output file (default stdout)");

    // encrypt / decrypt
    SecretArgs enc_sa, dec_sa;
    std::string enc_keys, enc_hex, enc_out;
    auto* encrypt = app.add_subcommand("encrypt", "encrypt a hex bit string");
    encrypt->add_option("--keys", enc_keys, "key material file")->required();
    encrypt->add_option("--sc", enc_sa.sc, "modulus-selection secret")->required();
    encrypt->add_option("--sp", enc_sa.sp, "order-selection secret")->required();
    encrypt->add_option("--sd", enc_sa.sd, "block-selection secret")->required();
    encrypt->add_option("--blocks", enc_sa.blocks, "block level (1..N)")
        ->required();
    encrypt->add_option("--hex", enc_hex, "plaintext bits as hex")->required();
    encrypt->add_option("--out", enc_out, "output file (default stdout)");

    std::string dec_keys, dec_in, dec_out;
    auto* decrypt = app.add_subcommand("decrypt", "decrypt a ciphertext file");
    decrypt->add_option("--keys", dec_keys, "key material file")->required();
    decrypt->add_option("--sc", dec_sa.sc, "modulus-selection secret")->required();
    decrypt->add_option("--sp", dec_sa.sp, "order-selection secret")->required();
    decrypt->add_option("--sd", dec_sa.sd, "block-selection secret")->required();
    decrypt->add_option("--in", dec_in, "ciphertext file")->required();
    decrypt->add_option("--out", dec_out, "output file (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate",
                                        "run an honest session or an attack");
    std::string sim_scenario, sim_config, sim_transcript;
    std::uint64_t sim_seed = 0;
    adv::ScenarioConfig sim_cfg;
    simulate->add_option("--scenario", sim_scenario,
                         "replay | impersonate-tag | impersonate-reader | "
                         "mitm-tamper | desync | dos-flood | tracking | honest");
    simulate->add_option("--seed", sim_seed, "scenario seed");
    simulate->add_option("--config", sim_config, "key=value scenario file");
    simulate->add_option("--p", sim_cfg.p, "initial modulus");
    simulate->add_option("--N", sim_cfg.N, "number of base matrices");
    simulate->add_option("--n", sim_cfg.n, "matrix order");
    simulate->add_option("--blocks", sim_cfg.blocks, "block level");
    simulate->add_option("--flood-count", sim_cfg.flood_count,
                         "bogus messages for dos-flood");
    simulate->add_option("--tamper-step", sim_cfg.tamper_step,
                         "transit step for mitm-tamper");
    simulate->add_option("--transcript", sim_transcript,
                         "write the hex transcript to this file");

    // analyze-storage
    auto* analyze = app.add_subcommand("analyze-storage",
                                       "storage saving ratio tables");
    bool an_table9 = false, an_hist = false, an_uniform = false;
    std::string an_sweep, an_algorithm, an_out;
    unsigned an_Q = 2, an_N = 2, an_n = 2, an_lo = 0, an_hi = 0;
    analyze->add_flag("--table9", an_table9, "emit the 7x3 reference grid");
    analyze->add_flag("--histogram", an_hist, "emit all seven ratios at Q,N,n");
    analyze->add_option("--sweep", an_sweep, "sweep axis: Q, N or n");
    analyze->add_option("--lo", an_lo, "sweep range start");
    analyze->add_option("--hi", an_hi, "sweep range end");
    analyze->add_option("--Q", an_Q, "proper-divisor count");
    analyze->add_option("--N", an_N, "number of base matrices");
    analyze->add_option("--n", an_n, "matrix order");
    analyze->add_option("--algorithm", an_algorithm,
                        "single-report algorithm name");
    analyze->add_flag("--consistent-plus-one", an_uniform,
                      "recompute with a uniform +1 in every storage count");
    analyze->add_option("--out", an_out, "output file (default stdout)");

    // winograd-report
    auto* wino = app.add_subcommand("winograd-report",
                                    "operation counts per plaintext length");
    std::uint64_t wn_min = 2, wn_max = 20;
    std::string wn_out;
    wino->add_option("--min", wn_min, "smallest plaintext length");
    wino->add_option("--max", wn_max, "largest plaintext length");
    wino->add_option("--out", wn_out, "output file (default stdout)");

    // ban-check
    auto* ban = app.add_subcommand("ban-check", "replay a belief derivation");
    std::string ban_file;
    bool ban_proof = false;
    ban->add_option("file", ban_file, "fixture file")->required();
    ban->add_flag("--print-proof", ban_proof, "print the numbered steps");

    std::vector<const char*> argv;
    argv.push_back("varikey");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (keygen->parsed()) return cmd_keygen(kg_N, kg_n, kg_p, kg_seed, kg_out, out);
        if (encrypt->parsed()) return cmd_encrypt(enc_keys, enc_sa, enc_hex, enc_out, out);
        if (decrypt->parsed()) return cmd_decrypt(dec_keys, dec_sa, dec_in, dec_out, out);
        if (simulate->parsed()) {
            return cmd_simulate(sim_scenario, sim_seed, sim_config, sim_cfg,
                                sim_transcript, out);
        }
        if (analyze->parsed()) {
            std::string text;
            if (an_table9) {
                text = an::table9_csv(an_Q, an_uniform);
            } else if (an_hist) {
                text = an::histogram_csv(an_Q, an_N, an_n, an_uniform);
            } else if (!an_sweep.empty()) {
                an::SweepAxis axis = an::axis_from_name(an_sweep);
                unsigned lo = an_lo, hi = an_hi;
                if (lo == 0 && hi == 0) {
                    lo = axis == an::SweepAxis::Q ? 2 : axis == an::SweepAxis::N ? 2 : 1;
                    hi = axis == an::SweepAxis::Q ? 10 : axis == an::SweepAxis::N ? 6 : 8;
                }
                text = an::sweep_csv(axis, lo, hi, {an_Q, an_N, an_n,
                                                    an::Algorithm::am_sueo_dbltkm},
                                     an_uniform);
            } else if (!an_algorithm.empty()) {
                an::Config cfg{an_Q, an_N, an_n,
                               an::algorithm_from_name(an_algorithm)};
                an::StorageReport r = an::storage(cfg, an_uniform);
                std::ostringstream line;
                line << "algorithm=" << an_algorithm << " Q=" << an_Q
                     << " N=" << an_N << " n=" << an_n << " s_with=" << r.s_with
                     << " s_without=" << r.s_without << " k=" << r.k_percent()
                     << "%\n";
                text = line.str();
            } else {
                err << "error: pick one of --table9, --histogram, --sweep, "
                       "--algorithm\n";
                return 2;
            }
            emit(text, an_out, out);
            return 0;
        }
        if (wino->parsed()) {
            emit(an::winograd_csv(wn_min, wn_max), wn_out, out);
            return 0;
        }
        if (ban->parsed()) return cmd_ban_check(ban_file, ban_proof, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 2;
}

}  // namespace varikey::cli
