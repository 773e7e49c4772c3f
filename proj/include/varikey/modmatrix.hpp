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
#ifndef VARIKEY_MODMATRIX_HPP
#define VARIKEY_MODMATRIX_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "varikey/bigint.hpp"
#include "varikey/bits.hpp"
#include "varikey/errors.hpp"

namespace varikey::modmatrix {

/// Square integer matrix with exact arithmetic. Entries are stored as
/// int64; every routine that can outgrow 64 bits accumulates in BigInt.
/// After a mod-m reduction all entries lie in [0, m).
class IntMatrix {
public:
    IntMatrix() = default;
    explicit IntMatrix(std::size_t order)
        : order_(order), entries_(order * order, 0) {}
    IntMatrix(std::size_t order, std::vector<std::int64_t> entries);

    static IntMatrix identity(std::size_t order);

    std::size_t order() const { return order_; }
    std::int64_t at(std::size_t r, std::size_t c) const {
        return entries_[r * order_ + c];
    }
    std::int64_t& at(std::size_t r, std::size_t c) {
        return entries_[r * order_ + c];
    }
    std::span<const std::int64_t> entries() const { return entries_; }

    /// Every entry reduced into [0, m).
    IntMatrix reduced(std::uint64_t m) const;

    bool operator==(const IntMatrix&) const = default;

private:
    std::size_t order_ = 0;
    std::vector<std::int64_t> entries_;
};

/// Greatest common divisor. Throws DomainError when both arguments are zero.
std::uint64_t gcd(std::uint64_t a, std::uint64_t b);

/// Multiplicative inverse of a modulo m, in [1, m). Requires m >= 2.
/// Throws NotInvertibleError (carrying the gcd) when gcd(a mod m, m) != 1.
std::uint64_t mod_inverse_scalar(std::int64_t a, std::uint64_t m);

/// Exact integer determinant (fraction-free elimination).
BigInt det_exact(const IntMatrix& m);

/// Determinant reduced into [0, m). Requires m >= 2.
std::uint64_t det_mod(const IntMatrix& mat, std::uint64_t m);

/// Exact adjugate (transpose of the cofactor matrix), entries as BigInt.
std::vector<BigInt> adjugate_exact(const IntMatrix& m);

/// Matrix B with A*B == B*A == identity (mod m), computed as
/// adjugate(A) * inverse(det(A)) mod m. Throws NotInvertibleError when
/// gcd(det(A) mod m, m) != 1.
IntMatrix matrix_mod_inverse(const IntMatrix& a, std::uint64_t m);

/// c = A*t mod m, elementwise in [0, m). Every symbol of t must already be
/// in [0, m) (EncodingError) and t must match the matrix order (ShapeError).
std::vector<std::uint64_t> encrypt(std::span<const std::uint64_t> t,
                                   const IntMatrix& a, std::uint64_t m);

/// t = B*c mod m; same checks as encrypt.
std::vector<std::uint64_t> decrypt(std::span<const std::uint64_t> c,
                                   const IntMatrix& b, std::uint64_t m);

/// Dot product via the pair-product scheme: for k = floor(n/2),
///   sum_i (a[2i] + b[2i+1]) * (a[2i+1] + b[2i]) - sum a-pairs - sum b-pairs,
/// plus the trailing correction a[n-1]*b[n-1] when n is odd. Exact over the
/// integers; agrees with the plain dot product on every input.
BigInt winograd_dot(std::span<const std::int64_t> a,
                    std::span<const std::int64_t> b);

/// Plain dot product in exact arithmetic (reference path).
BigInt ordinary_dot(std::span<const std::int64_t> a,
                    std::span<const std::int64_t> b);

/// Ordinary matrix product, exact; reduced mod m when m is given.
/// Throws Error if an entry of the exact result cannot be stored (no modulus).
IntMatrix multiply(const IntMatrix& a, const IntMatrix& b,
                   std::optional<std::uint64_t> m = std::nullopt);

/// Pair-product matrix multiplication with the row and column term sums
/// precomputed once per row/column. Identical results to multiply().
IntMatrix winograd_matmul(const IntMatrix& a, const IntMatrix& b,
                          std::optional<std::uint64_t> m = std::nullopt);

struct OpCount {
    std::uint64_t additions = 0;
    std::uint64_t multiplications = 0;
    bool operator==(const OpCount&) const = default;
};

enum class MulMethod { ordinary, winograd };

/// Closed-form operation counts for an n-by-n matrix product.
///   ordinary: n^2(n-1) additions, n^3 multiplications.
///   winograd: n^2(n+2) additions and, with k = floor(n/2),
///             n^2*(k + (n odd ? 1 : 0)) + 2*n*k multiplications,
///             which equals n^2(n/2+1) exactly for even n; the odd case adds
///             one correction product per entry.
OpCount op_counts(std::uint64_t n, MulMethod method);

IntMatrix transpose(const IntMatrix& m);

/// Block-diagonal composition; all blocks must be square (they are by type).
IntMatrix block_diag(std::span<const IntMatrix> blocks);

/// Fixed-width symbol stream produced from a bit string. Symbols are chunked
/// most-significant-bit first and zero-padded at the tail so the symbol count
/// is a multiple of the requested block length; the original bit length
/// travels out of band.
struct SymbolVector {
    std::vector<std::uint64_t> symbols;
    unsigned symbol_width_bits = 0;
    std::uint64_t original_bit_length = 0;

    bool operator==(const SymbolVector&) const = default;
};

/// Chunk bits into width-bit symbols, padded to a multiple of pad_multiple.
SymbolVector encode_bits(const BitVec& bits, unsigned width,
                         std::size_t pad_multiple);

/// Inverse of encode_bits. Rejects symbols >= 2^width and nonzero padding.
BitVec decode_bits(const SymbolVector& v);

/// Widest symbol width usable under every modulus in the table:
/// floor(log2(min entry)).
unsigned symbol_width_for(std::span<const std::uint64_t> moduli);

}  // namespace varikey::modmatrix

#endif
