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
#include "varikey/keyschedule.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace varikey::keyschedule {

namespace mm = varikey::modmatrix;

std::vector<std::uint64_t> build_am_table(std::uint64_t p) {
    if (p < 4) throw NoDivisorsError("modulus " + std::to_string(p) +
                                     " has no proper divisors");
    std::vector<std::uint64_t> divisors;
    for (std::uint64_t d = 2; d * d <= p; ++d) {
        if (p % d == 0) {
            divisors.push_back(d);
            std::uint64_t other = p / d;
            if (other != d && other != p) divisors.push_back(other);
        }
    }
    if (divisors.empty()) {
        throw NoDivisorsError("modulus " + std::to_string(p) + " is prime");
    }
    std::vector<std::uint64_t> table = divisors;
    for (std::uint64_t d : divisors) table.push_back(p * d);
    std::sort(table.begin(), table.end());
    return table;
}

std::uint64_t am_select(u128 s_c, std::span<const std::uint64_t> table) {
    if (table.empty()) throw ScheduleError("modulus table is empty");
    return table[u128_mod(s_c, table.size())];
}

namespace {

// Falling factorial N * (N-1) * ... * (N-i+1): the number of ordered
// sequences of i distinct indices out of N.
std::uint64_t perm_count(unsigned n, unsigned i) {
    std::uint64_t v = 1;
    for (unsigned k = 0; k < i; ++k) v *= n - k;
    return v;
}

}  // namespace

std::uint64_t z_sueo(unsigned n_matrices) {
    if (n_matrices == 0) throw ScheduleError("need at least one base matrix");
    if (n_matrices > 20) {
        throw ScheduleError("sequence table size overflows 64 bits beyond N=20");
    }
    std::uint64_t total = 0;
    for (unsigned i = 1; i <= n_matrices; ++i) total += perm_count(n_matrices, i);
    return total;
}

std::vector<unsigned> sueo_select(u128 s_p, unsigned n_matrices) {
    std::uint64_t m2 = u128_mod(s_p, z_sueo(n_matrices));
    unsigned len = 1;
    while (true) {
        std::uint64_t size = perm_count(n_matrices, len);
        if (m2 < size) break;
        m2 -= size;
        ++len;
    }
    // Lexicographic unranking of a len-permutation of {1..N}.
    std::vector<unsigned> avail(n_matrices);
    for (unsigned i = 0; i < n_matrices; ++i) avail[i] = i + 1;
    std::vector<unsigned> seq;
    seq.reserve(len);
    for (unsigned pos = 0; pos < len; ++pos) {
        std::uint64_t block = perm_count(n_matrices - pos - 1, len - pos - 1);
        std::size_t pick = static_cast<std::size_t>(m2 / block);
        m2 %= block;
        seq.push_back(avail[pick]);
        avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return seq;
}

std::uint64_t z_dbltkm(unsigned n_matrices) {
    if (n_matrices == 0) throw ScheduleError("need at least one base matrix");
    if (n_matrices > 13) {
        throw ScheduleError("block table size overflows 64 bits beyond N=13");
    }
    std::uint64_t total = 0;
    std::uint64_t power = 1;
    for (unsigned i = 1; i <= n_matrices; ++i) {
        power *= 2 * n_matrices;
        total += power;
    }
    return total;
}

std::uint64_t dbltkm_level_start(unsigned n_matrices, unsigned level) {
    if (level < 1 || level > n_matrices) {
        throw ScheduleError("block level " + std::to_string(level) +
                            " outside [1, " + std::to_string(n_matrices) + "]");
    }
    std::uint64_t total = 0;
    std::uint64_t power = 1;
    for (unsigned j = 1; j < level; ++j) {
        power *= 2 * n_matrices;
        total += power;
    }
    return total;
}

Descriptor dbltkm_select(u128 s_d, unsigned n_matrices, unsigned block_count) {
    const std::uint64_t z = z_dbltkm(n_matrices);
    const std::uint64_t base = 2 * n_matrices;
    std::uint64_t m3 = u128_mod(s_d, z);
    std::uint64_t start = dbltkm_level_start(n_matrices, block_count);
    std::uint64_t cap = 1;
    for (unsigned j = 0; j < block_count; ++j) cap *= base;
    std::uint64_t offset =
        m3 >= start ? (m3 - start) % cap : (cap - (start - m3) % cap) % cap;
    Descriptor d(block_count);
    for (unsigned j = block_count; j-- > 0;) {
        std::uint64_t digit = offset % base;
        offset /= base;
        d[j].transposed = digit >= n_matrices;
        d[j].base_index =
            static_cast<unsigned>(digit % n_matrices) + 1;
    }
    return d;
}

Schedule derive_schedule(u128 s_c, u128 s_p, u128 s_d, const KeyMaterial& km,
                         unsigned blocks) {
    if (blocks < 1 || blocks > km.matrix_count()) {
        throw ScheduleError("block count " + std::to_string(blocks) +
                            " outside [1, " + std::to_string(km.matrix_count()) +
                            "]");
    }
    Schedule sched;
    sched.modulus = am_select(s_c, km.am_table);
    sched.order = blocks * km.order();
    std::size_t chain_len = sueo_select(s_p, km.matrix_count()).size();
    sched.chain.reserve(chain_len);
    for (std::size_t j = 0; j < chain_len; ++j) {
        sched.chain.push_back(
            dbltkm_select(s_d + static_cast<u128>(j), km.matrix_count(), blocks));
    }
    return sched;
}

Schedule base_schedule(const KeyMaterial& km) {
    Schedule sched;
    sched.modulus = km.p;
    sched.order = km.order();
    sched.chain = {Descriptor{BlockSpec{1, false}}};
    return sched;
}

mm::IntMatrix resolve_descriptor(const Descriptor& d, const KeyMaterial& km) {
    std::vector<mm::IntMatrix> blocks;
    blocks.reserve(d.size());
    for (const BlockSpec& spec : d) {
        if (spec.base_index < 1 || spec.base_index > km.matrix_count()) {
            throw ScheduleError("base matrix index " +
                                std::to_string(spec.base_index) + " out of range");
        }
        const mm::IntMatrix& base = km.base_matrices[spec.base_index - 1];
        blocks.push_back(spec.transposed ? mm::transpose(base) : base);
    }
    return mm::block_diag(blocks);
}

namespace {

void require_order(std::size_t got, std::size_t want, const char* who) {
    if (got != want) {
        throw ShapeError(std::string(who) + ": expected " + std::to_string(want) +
                         " symbols, got " + std::to_string(got));
    }
}

// Inverse of one diagonal block under the schedule modulus. When the modulus
// divides p, the mod-p inverse reduced mod q is the mod-q inverse; for the
// composite entries p*d a fresh inverse is computed directly.
mm::IntMatrix block_inverse(const mm::IntMatrix& block, const KeyMaterial& km,
                            std::uint64_t q) {
    if (q <= km.p && km.p % q == 0) {
        return mm::matrix_mod_inverse(block, km.p).reduced(q);
    }
    return mm::matrix_mod_inverse(block, q);
}

}  // namespace

std::vector<std::uint64_t> schedule_encrypt(std::span<const std::uint64_t> t,
                                            const Schedule& sched,
                                            const KeyMaterial& km) {
    require_order(t.size(), sched.order, "schedule_encrypt");
    std::vector<std::uint64_t> cur(t.begin(), t.end());
    for (const Descriptor& d : sched.chain) {
        cur = mm::encrypt(cur, resolve_descriptor(d, km), sched.modulus);
    }
    return cur;
}

std::vector<std::uint64_t> schedule_encrypt(const mm::SymbolVector& t,
                                            const Schedule& sched,
                                            const KeyMaterial& km) {
    return schedule_encrypt(std::span<const std::uint64_t>(t.symbols), sched, km);
}

std::vector<std::uint64_t> schedule_decrypt(std::span<const std::uint64_t> c,
                                            const Schedule& sched,
                                            const KeyMaterial& km) {
    require_order(c.size(), sched.order, "schedule_decrypt");
    std::vector<std::uint64_t> cur(c.begin(), c.end());
    for (auto it = sched.chain.rbegin(); it != sched.chain.rend(); ++it) {
        std::vector<mm::IntMatrix> inv_blocks;
        inv_blocks.reserve(it->size());
        for (const BlockSpec& spec : *it) {
            const mm::IntMatrix& base = km.base_matrices[spec.base_index - 1];
            mm::IntMatrix blk = spec.transposed ? mm::transpose(base) : base;
            inv_blocks.push_back(block_inverse(blk, km, sched.modulus));
        }
        cur = mm::decrypt(cur, mm::block_diag(inv_blocks), sched.modulus);
    }
    return cur;
}

KeyMaterial keygen(unsigned n_matrices, unsigned order, std::uint64_t p,
                   std::uint64_t seed) {
    if (n_matrices == 0 || order == 0) {
        throw KeygenError("need at least one matrix of order >= 1");
    }
    KeyMaterial km;
    km.p = p;
    km.am_table = build_am_table(p);  // validates that p is composite
    km.z_sueo = z_sueo(n_matrices);
    km.z_dbltkm = z_dbltkm(n_matrices);
    std::mt19937_64 eng(seed);
    constexpr int kMaxTries = 10000;
    for (unsigned i = 0; i < n_matrices; ++i) {
        bool found = false;
        for (int tries = 0; tries < kMaxTries && !found; ++tries) {
            mm::IntMatrix cand(order);
            for (std::size_t r = 0; r < order; ++r) {
                for (std::size_t c = 0; c < order; ++c) {
                    cand.at(r, c) = static_cast<std::int64_t>(eng() % p);
                }
            }
            if (std::gcd(mm::det_mod(cand, p), p) == 1) {
                km.base_matrices.push_back(std::move(cand));
                found = true;
            }
        }
        if (!found) {
            throw KeygenError("no invertible matrix found mod " +
                              std::to_string(p) + " within " +
                              std::to_string(kMaxTries) + " tries");
        }
    }
    return km;
}

std::string save_key_material(const KeyMaterial& km) {
    std::ostringstream out;
    out << "AMKEYS v1 N=" << km.matrix_count() << " n=" << km.order()
        << " p=" << km.p << "\n";
    for (const mm::IntMatrix& m : km.base_matrices) {
        bool first = true;
        for (std::int64_t e : m.entries()) {
            if (!first) out << ' ';
            out << e;
            first = false;
        }
        out << "\n";
    }
    out << "AMTABLE";
    for (std::uint64_t q : km.am_table) out << ' ' << q;
    out << "\n";
    return out.str();
}

KeyMaterial load_key_material(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw DecodeError("empty key material");
    unsigned N = 0, n = 0;
    std::uint64_t p = 0;
    {
        std::istringstream hdr(line);
        std::string magic, version, nf, of, pf;
        hdr >> magic >> version >> nf >> of >> pf;
        if (magic != "AMKEYS" || version != "v1" || nf.rfind("N=", 0) != 0 ||
            of.rfind("n=", 0) != 0 || pf.rfind("p=", 0) != 0) {
            throw DecodeError("bad key material header: " + line);
        }
        try {
            N = static_cast<unsigned>(std::stoul(nf.substr(2)));
            n = static_cast<unsigned>(std::stoul(of.substr(2)));
            p = std::stoull(pf.substr(2));
        } catch (const std::exception&) {
            throw DecodeError("bad key material header numbers: " + line);
        }
    }
    if (N == 0 || n == 0) throw DecodeError("key material needs N >= 1, n >= 1");
    KeyMaterial km;
    km.p = p;
    km.z_sueo = z_sueo(N);
    km.z_dbltkm = z_dbltkm(N);
    for (unsigned i = 0; i < N; ++i) {
        if (!std::getline(in, line)) throw DecodeError("missing matrix line");
        std::istringstream row(line);
        std::vector<std::int64_t> entries;
        std::int64_t e;
        while (row >> e) entries.push_back(e);
        if (entries.size() != static_cast<std::size_t>(n) * n) {
            throw DecodeError("matrix line has " + std::to_string(entries.size()) +
                              " entries, expected " + std::to_string(n * n));
        }
        mm::IntMatrix m(n, std::move(entries));
        if (std::gcd(mm::det_mod(m, p), p) != 1) {
            throw DecodeError("stored matrix is not invertible mod " +
                              std::to_string(p));
        }
        km.base_matrices.push_back(std::move(m));
    }
    if (!std::getline(in, line)) throw DecodeError("missing AMTABLE line");
    {
        std::istringstream tab(line);
        std::string magic;
        tab >> magic;
        if (magic != "AMTABLE") throw DecodeError("missing AMTABLE line");
        std::uint64_t q;
        while (tab >> q) km.am_table.push_back(q);
    }
    if (km.am_table != build_am_table(p)) {
        throw DecodeError("modulus table does not match its modulus");
    }
    return km;
}

}  // namespace varikey::keyschedule
