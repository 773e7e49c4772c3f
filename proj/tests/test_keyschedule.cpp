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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "varikey/keyschedule.hpp"

using namespace varikey;
using namespace varikey::keyschedule;
namespace mm = varikey::modmatrix;

namespace {

// Oracle: every ordered sequence of distinct indices out of {1..N}, in the
// canonical order (length ascending, lexicographic within a length).
std::vector<std::vector<unsigned>> enumerate_sequences(unsigned N) {
    std::vector<std::vector<unsigned>> all;
    for (unsigned len = 1; len <= N; ++len) {
        std::vector<unsigned> seq;
        std::vector<bool> used(N + 1, false);
        auto rec = [&](auto&& self) -> void {
            if (seq.size() == len) {
                all.push_back(seq);
                return;
            }
            for (unsigned v = 1; v <= N; ++v) {
                if (used[v]) continue;
                used[v] = true;
                seq.push_back(v);
                self(self);
                seq.pop_back();
                used[v] = false;
            }
        };
        rec(rec);
    }
    return all;
}

u128 rand_u128(std::mt19937_64& eng) { return make_u128(eng(), eng()); }

}  // namespace

TEST_CASE("modulus table construction") {
    CHECK(build_am_table(16) ==
          std::vector<std::uint64_t>{2, 4, 8, 32, 64, 128});
    CHECK(build_am_table(6) == std::vector<std::uint64_t>{2, 3, 12, 18});
    CHECK_THROWS_AS(build_am_table(7), NoDivisorsError);
    CHECK_THROWS_AS(build_am_table(2), NoDivisorsError);
    CHECK_THROWS_AS(build_am_table(3), NoDivisorsError);

    // 2Q entries, ascending, first half divisors and second half products
    for (std::uint64_t p : {8ull, 12ull, 16ull, 26ull, 256ull}) {
        auto table = build_am_table(p);
        CHECK(table.size() % 2 == 0);
        CHECK(std::is_sorted(table.begin(), table.end()));
        for (std::uint64_t q : table) {
            bool divisor = q < p && p % q == 0;
            bool product = q > p && q % p == 0 && p % (q / p) == 0;
            CHECK((divisor || product));
        }
    }
}

TEST_CASE("modulus selection by secret value") {
    auto table = build_am_table(16);
    CHECK(am_select(7, table) == table[1]);
    CHECK(am_select(0, table) == table[0]);
    CHECK(am_select(6, table) == 2);  // 6 mod 6 = 0 -> first entry
    CHECK_THROWS_AS(am_select(1, std::vector<std::uint64_t>{}), ScheduleError);

    // 128-bit secrets reduce correctly
    u128 big = make_u128(0xffffffffffffffffull, 0xfffffffffffffffbull);
    CHECK(am_select(big, table) == table[static_cast<std::size_t>(big % 6)]);
}

TEST_CASE("sequence table size and decoding") {
    CHECK(z_sueo(1) == 1);
    CHECK(z_sueo(2) == 4);
    CHECK(z_sueo(3) == 15);
    CHECK(z_sueo(4) == 64);

    CHECK(sueo_select(0, 2) == std::vector<unsigned>{1});
    CHECK(sueo_select(3, 2) == std::vector<unsigned>{2, 1});

    // canonical enumeration matches the brute-force table for N <= 4
    for (unsigned N = 1; N <= 4; ++N) {
        auto all = enumerate_sequences(N);
        CHECK(all.size() == z_sueo(N));
        for (std::uint64_t m2 = 0; m2 < all.size(); ++m2) {
            CHECK(sueo_select(m2, N) == all[static_cast<std::size_t>(m2)]);
        }
    }
}

TEST_CASE("sequence decoding is a bijection") {
    for (unsigned N = 1; N <= 4; ++N) {
        std::set<std::vector<unsigned>> seen;
        for (std::uint64_t m2 = 0; m2 < z_sueo(N); ++m2) {
            auto seq = sueo_select(m2, N);
            CHECK(seen.insert(seq).second);
            // all indices distinct and in range
            std::set<unsigned> uniq(seq.begin(), seq.end());
            CHECK(uniq.size() == seq.size());
            for (unsigned v : seq) {
                CHECK(v >= 1);
                CHECK(v <= N);
            }
        }
    }
}

TEST_CASE("block table size and level ranges") {
    CHECK(z_dbltkm(1) == 2);
    CHECK(z_dbltkm(2) == 20);
    CHECK(z_dbltkm(3) == 258);

    // closed form equals the power sum, exhaustively for N <= 5
    for (unsigned N = 1; N <= 5; ++N) {
        std::uint64_t total = 0;
        for (unsigned i = 1; i <= N; ++i) {
            std::uint64_t sum = 0, pw = 1;
            for (unsigned j = 1; j < i; ++j) {
                pw *= 2 * N;
                sum += pw;
            }
            CHECK(dbltkm_level_start(N, i) == sum);
            total = sum;
        }
        (void)total;
        std::uint64_t z = 0, pw = 1;
        for (unsigned i = 1; i <= N; ++i) {
            pw *= 2 * N;
            z += pw;
        }
        CHECK(z_dbltkm(N) == z);
    }
}

TEST_CASE("block spec decoding") {
    // level-1 order at N=2: A1, A2, A1^T, A2^T
    CHECK(dbltkm_select(0, 2, 1) == Descriptor{BlockSpec{1, false}});
    CHECK(dbltkm_select(1, 2, 1) == Descriptor{BlockSpec{2, false}});
    CHECK(dbltkm_select(2, 2, 1) == Descriptor{BlockSpec{1, true}});
    CHECK(dbltkm_select(3, 2, 1) == Descriptor{BlockSpec{2, true}});

    // level-2 range starts at 4; offset 0 decodes to digits (0,0)
    CHECK(dbltkm_select(4, 2, 2) ==
          Descriptor{BlockSpec{1, false}, BlockSpec{1, false}});
    // most significant digit names the first diagonal block
    CHECK(dbltkm_select(4 + 5, 2, 2) ==
          Descriptor{BlockSpec{2, false}, BlockSpec{2, false}});

    CHECK_THROWS_AS(dbltkm_select(0, 2, 3), ScheduleError);
    CHECK_THROWS_AS(dbltkm_select(0, 2, 0), ScheduleError);
}

TEST_CASE("block spec decoding is a bijection per level") {
    for (unsigned N : {2u, 3u}) {
        for (unsigned level = 1; level <= N; ++level) {
            std::uint64_t cap = 1;
            for (unsigned j = 0; j < level; ++j) cap *= 2 * N;
            std::uint64_t start = dbltkm_level_start(N, level);
            std::set<Descriptor> seen;
            for (std::uint64_t off = 0; off < cap; ++off) {
                CHECK(seen.insert(dbltkm_select(start + off, N, level)).second);
            }
            CHECK(seen.size() == cap);
        }
    }
}

TEST_CASE("key generation") {
    KeyMaterial km = keygen(2, 2, 16, 42);
    CHECK(km.matrix_count() == 2);
    CHECK(km.order() == 2);
    CHECK(km.p == 16);
    CHECK(km.z_sueo == 4);
    CHECK(km.z_dbltkm == 20);
    CHECK(km.am_table == build_am_table(16));

    // deterministic for a fixed seed
    CHECK(keygen(2, 2, 16, 42) == km);
    CHECK(keygen(2, 2, 16, 43) != km);

    // every stored matrix is invertible under every table modulus
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (std::uint64_t p : {8ull, 16ull, 26ull}) {
            KeyMaterial k = keygen(3, 2, p, seed);
            for (const auto& a : k.base_matrices) {
                CHECK(std::gcd(mm::det_mod(a, p), p) == 1);
                for (std::uint64_t q : k.am_table) {
                    CHECK_NOTHROW(mm::matrix_mod_inverse(a, q));
                }
            }
        }
    }

    CHECK_THROWS_AS(keygen(1, 1, 7, 1), NoDivisorsError);
}

TEST_CASE("key material text round-trip") {
    KeyMaterial km = keygen(3, 2, 26, 7);
    std::string text = save_key_material(km);
    KeyMaterial back = load_key_material(text);
    CHECK(back == km);
    CHECK(save_key_material(back) == text);

    CHECK_THROWS_AS(load_key_material("JUNK"), DecodeError);
    CHECK_THROWS_AS(load_key_material("AMKEYS v1 N=1 n=2 p=16\n1 0 0 1\n"),
                    DecodeError);  // missing AMTABLE
    // non-invertible stored matrix is rejected
    CHECK_THROWS_AS(
        load_key_material("AMKEYS v1 N=1 n=2 p=16\n2 0 0 2\nAMTABLE 2 4 8 32 64 128\n"),
        DecodeError);
}

TEST_CASE("schedule derivation basics") {
    KeyMaterial km = keygen(2, 2, 16, 42);
    Schedule s = derive_schedule(0, 0, 0, km, 1);
    CHECK(s.modulus == km.am_table[0]);
    CHECK(s.chain.size() == 1);
    CHECK(s.chain[0] == Descriptor{BlockSpec{1, false}});
    CHECK(s.order == 2);

    Schedule two = derive_schedule(0, 0, 0, km, 2);
    CHECK(two.order == 4);
    CHECK_THROWS_AS(derive_schedule(0, 0, 0, km, 3), ScheduleError);

    // chain elements vary across iterations via the shifted index
    Schedule multi = derive_schedule(0, 2, 5, km, 1);  // m2=2 -> sequence (1,2)
    CHECK(multi.chain.size() == 2);
    CHECK(multi.chain[0] == dbltkm_select(5, 2, 1));
    CHECK(multi.chain[1] == dbltkm_select(6, 2, 1));
}

TEST_CASE("schedule round-trip") {
    std::mt19937_64 eng(12);
    std::vector<std::uint64_t> ps{8, 16, 26, 256};
    for (int i = 0; i < 500; ++i) {
        std::uint64_t p = ps[eng() % ps.size()];
        unsigned N = 1 + eng() % 3;
        unsigned n = 1 + eng() % 3;
        KeyMaterial km = keygen(N, n, p, eng());
        unsigned blocks = 1 + static_cast<unsigned>(eng() % N);
        Schedule sched =
            derive_schedule(rand_u128(eng), rand_u128(eng), rand_u128(eng), km, blocks);
        std::vector<std::uint64_t> t(sched.order);
        for (auto& s : t) s = eng() % sched.modulus;
        auto c = schedule_encrypt(t, sched, km);
        CHECK(schedule_decrypt(c, sched, km) == t);
    }
}

TEST_CASE("every derivable schedule is invertible") {
    // exhaustive over all index triples at small parameters
    for (std::uint64_t p : {8ull, 16ull, 26ull}) {
        KeyMaterial km = keygen(2, 2, p, 99);
        std::uint64_t za = km.am_table.size();
        for (std::uint64_t m1 = 0; m1 < za; ++m1) {
            for (std::uint64_t m2 = 0; m2 < km.z_sueo; ++m2) {
                for (std::uint64_t m3 = 0; m3 < km.z_dbltkm; ++m3) {
                    for (unsigned blocks : {1u, 2u}) {
                        Schedule s = derive_schedule(m1, m2, m3, km, blocks);
                        mm::IntMatrix composite = mm::IntMatrix::identity(s.order);
                        for (const auto& d : s.chain) {
                            composite = mm::multiply(resolve_descriptor(d, km),
                                                     composite, s.modulus);
                        }
                        CHECK_NOTHROW(mm::matrix_mod_inverse(composite, s.modulus));
                    }
                }
            }
        }
    }
}

TEST_CASE("selected modulus never shares a factor with a determinant") {
    std::mt19937_64 eng(13);
    for (std::uint64_t p : {8ull, 16ull, 26ull}) {
        KeyMaterial km = keygen(2, 2, p, eng());
        for (std::uint64_t q : km.am_table) {
            for (const auto& a : km.base_matrices) {
                CHECK(std::gcd(mm::det_mod(a, q), q) == 1);
            }
        }
    }
}

TEST_CASE("distinct secrets give distinct schedules almost always") {
    std::mt19937_64 eng(14);
    KeyMaterial km = keygen(2, 2, 16, 21);
    int distinct = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        Schedule a =
            derive_schedule(rand_u128(eng), rand_u128(eng), rand_u128(eng), km, 2);
        Schedule b =
            derive_schedule(rand_u128(eng), rand_u128(eng), rand_u128(eng), km, 2);
        if (!(a == b)) ++distinct;
    }
    CHECK(distinct >= 990);
}

TEST_CASE("chain order matters for non-commuting matrices") {
    KeyMaterial km = keygen(2, 2, 26, 3);
    const auto& a1 = km.base_matrices[0];
    const auto& a2 = km.base_matrices[1];
    mm::IntMatrix m12 = mm::multiply(a1, a2, 26);
    mm::IntMatrix m21 = mm::multiply(a2, a1, 26);
    REQUIRE(m12 != m21);  // this key set does not commute (checked here)

    Schedule fwd{26, {Descriptor{BlockSpec{1, false}}, Descriptor{BlockSpec{2, false}}}, 2};
    Schedule rev{26, {Descriptor{BlockSpec{2, false}}, Descriptor{BlockSpec{1, false}}}, 2};
    // some basis vector distinguishes the two compositions
    bool differs = false;
    for (std::uint64_t k = 0; k < 2 && !differs; ++k) {
        std::vector<std::uint64_t> t{k == 0 ? 1ull : 0ull, k == 1 ? 1ull : 0ull};
        differs = schedule_encrypt(t, fwd, km) != schedule_encrypt(t, rev, km);
    }
    CHECK(differs);
}

TEST_CASE("base schedule uses the first matrix at the initial modulus") {
    KeyMaterial km = keygen(2, 2, 16, 5);
    Schedule s = base_schedule(km);
    CHECK(s.modulus == 16);
    CHECK(s.order == 2);
    CHECK(s.chain == std::vector<Descriptor>{Descriptor{BlockSpec{1, false}}});

    std::vector<std::uint64_t> t{3, 7};
    CHECK(schedule_encrypt(t, s, km) ==
          mm::encrypt(t, km.base_matrices[0], 16));
}
