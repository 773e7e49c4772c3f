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
#ifndef VARIKEY_KEYSCHEDULE_HPP
#define VARIKEY_KEYSCHEDULE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varikey/modmatrix.hpp"
#include "varikey/u128.hpp"

namespace varikey::keyschedule {

/// One diagonal block of a composed key matrix: a 1-based base-matrix index
/// and an optional transpose.
struct BlockSpec {
    unsigned base_index = 1;
    bool transposed = false;
    auto operator<=>(const BlockSpec&) const = default;
};

/// One chain element: the diagonal blocks of a composed key matrix.
using Descriptor = std::vector<BlockSpec>;

/// Everything an entity pre-stores: N invertible base matrices of order n,
/// the initial modulus p, the modulus table, and the two table sizes.
struct KeyMaterial {
    std::vector<modmatrix::IntMatrix> base_matrices;
    std::uint64_t p = 0;
    std::vector<std::uint64_t> am_table;
    std::uint64_t z_sueo = 0;
    std::uint64_t z_dbltkm = 0;

    unsigned matrix_count() const {
        return static_cast<unsigned>(base_matrices.size());
    }
    std::size_t order() const {
        return base_matrices.empty() ? 0 : base_matrices[0].order();
    }
    bool operator==(const KeyMaterial&) const = default;
};

/// Modulus table for composite p: the proper divisors d (1 < d < p) plus the
/// products p*d, sorted ascending. Throws NoDivisorsError when p is prime or
/// p < 4.
std::vector<std::uint64_t> build_am_table(std::uint64_t p);

/// table[s mod table size]. Throws ScheduleError on an empty table.
std::uint64_t am_select(u128 s_c, std::span<const std::uint64_t> table);

/// Number of ordered sequences of distinct base matrices:
/// sum over i of C(N,i) * i!.
std::uint64_t z_sueo(unsigned n_matrices);

/// Decodes s mod z_sueo(N) into the canonical sequence table: all length-1
/// sequences first (ascending), then each longer length in lexicographic
/// order. Returns 1-based, pairwise distinct indices.
std::vector<unsigned> sueo_select(u128 s_p, unsigned n_matrices);

/// Number of block-composed key matrices: sum over i of (2N)^i.
std::uint64_t z_dbltkm(unsigned n_matrices);

/// First index of level i in the composed-matrix table: sum_{j<i} (2N)^j.
std::uint64_t dbltkm_level_start(unsigned n_matrices, unsigned level);

/// Decodes s mod z_dbltkm(N) at the given level (block count) into block
/// specs: the offset into the level is written in base 2N, most significant
/// digit first; digits below N pick a plain base matrix, digits >= N pick a
/// transposed one. Throws ScheduleError when level is outside [1, N].
Descriptor dbltkm_select(u128 s_d, unsigned n_matrices, unsigned block_count);

/// One round's resolved choices: the active modulus and the ordered chain of
/// composed key matrices (first element applied first when encrypting).
struct Schedule {
    std::uint64_t modulus = 0;
    std::vector<Descriptor> chain;
    std::size_t order = 0;  // block_count * n, fixed across the chain

    bool operator==(const Schedule&) const = default;
};

/// Joint derivation: modulus from s_c, chain length from s_p's sequence,
/// chain element j (1-based) from the block table indexed by s_d + (j-1).
Schedule derive_schedule(u128 s_c, u128 s_p, u128 s_d, const KeyMaterial& km,
                         unsigned blocks);

/// The pre-round schedule: first base matrix, modulus p, single block.
Schedule base_schedule(const KeyMaterial& km);

/// Composes the block-diagonal matrix a descriptor denotes.
modmatrix::IntMatrix resolve_descriptor(const Descriptor& d,
                                        const KeyMaterial& km);

/// Applies the chain in order: c = M_k * ... * M_1 * t mod q.
/// t must have exactly sched.order symbols, all below the modulus.
std::vector<std::uint64_t> schedule_encrypt(std::span<const std::uint64_t> t,
                                            const Schedule& sched,
                                            const KeyMaterial& km);
std::vector<std::uint64_t> schedule_encrypt(const modmatrix::SymbolVector& t,
                                            const Schedule& sched,
                                            const KeyMaterial& km);

/// Applies the inverse matrices in reverse order. Inverses are taken per
/// diagonal block: when the modulus divides p the stored mod-p inverse
/// reduces to a mod-q inverse, otherwise a fresh inverse is computed for the
/// composite modulus.
std::vector<std::uint64_t> schedule_decrypt(std::span<const std::uint64_t> c,
                                            const Schedule& sched,
                                            const KeyMaterial& km);

/// N matrices of order n with entries drawn from a 64-bit generator and
/// reduced mod p, rejection-sampled until the determinant is a unit mod p
/// (at most 10^4 tries per matrix). Deterministic for a fixed seed.
KeyMaterial keygen(unsigned n_matrices, unsigned order, std::uint64_t p,
                   std::uint64_t seed);

/// Line-oriented text format; save/load round-trips bit-exactly.
std::string save_key_material(const KeyMaterial& km);
KeyMaterial load_key_material(std::string_view text);

}  // namespace varikey::keyschedule

#endif
