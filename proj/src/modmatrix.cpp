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
#include "varikey/modmatrix.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

namespace varikey::modmatrix {

namespace {

// Entry reduced into [0, m). Safe for any int64 entry and m < 2^63.
std::uint64_t reduce_entry(std::int64_t e, std::uint64_t m) {
    std::int64_t sm = static_cast<std::int64_t>(m);
    std::int64_t r = e % sm;
    if (r < 0) r += sm;
    return static_cast<std::uint64_t>(r);
}

std::uint64_t reduce_big(const BigInt& v, std::uint64_t m) {
    BigInt r = v % m;
    if (r < 0) r += m;
    return r.convert_to<std::uint64_t>();
}

std::int64_t to_int64_checked(const BigInt& v, const char* what) {
    if (v < std::numeric_limits<std::int64_t>::min() ||
        v > std::numeric_limits<std::int64_t>::max()) {
        throw Error(std::string(what) + ": exact result exceeds 64-bit entry range");
    }
    return v.convert_to<std::int64_t>();
}

void require_same_order(const IntMatrix& a, const IntMatrix& b) {
    if (a.order() != b.order()) {
        throw ShapeError("matrix orders differ: " + std::to_string(a.order()) +
                         " vs " + std::to_string(b.order()));
    }
}

void require_modulus(std::uint64_t m) {
    if (m < 2) throw DomainError("modulus must be >= 2");
}

// Determinant of a BigInt matrix by fraction-free (Bareiss) elimination.
BigInt det_bareiss(std::vector<BigInt> a, std::size_t n) {
    if (n == 0) return 1;
    BigInt sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k * n + k] == 0) {
            std::size_t piv = k + 1;
            while (piv < n && a[piv * n + k] == 0) ++piv;
            if (piv == n) return 0;
            for (std::size_t j = k; j < n; ++j) {
                std::swap(a[k * n + j], a[piv * n + j]);
            }
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] -
                                a[i * n + k] * a[k * n + j]) /
                               prev;
            }
            a[i * n + k] = 0;
        }
        prev = a[k * n + k];
    }
    return sign * a[(n - 1) * n + (n - 1)];
}

std::vector<BigInt> to_big(const IntMatrix& m) {
    std::vector<BigInt> out;
    out.reserve(m.order() * m.order());
    for (std::int64_t e : m.entries()) out.emplace_back(e);
    return out;
}

}  // namespace

IntMatrix::IntMatrix(std::size_t order, std::vector<std::int64_t> entries)
    : order_(order), entries_(std::move(entries)) {
    if (entries_.size() != order_ * order_) {
        throw ShapeError("entry count " + std::to_string(entries_.size()) +
                         " does not fill a square matrix of order " +
                         std::to_string(order_));
    }
}

IntMatrix IntMatrix::identity(std::size_t order) {
    IntMatrix m(order);
    for (std::size_t i = 0; i < order; ++i) m.at(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::reduced(std::uint64_t m) const {
    require_modulus(m);
    IntMatrix out(order_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        out.entries_[i] = static_cast<std::int64_t>(reduce_entry(entries_[i], m));
    }
    return out;
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
    if (a == 0 && b == 0) throw DomainError("gcd(0, 0) is undefined");
    return std::gcd(a, b);
}

std::uint64_t mod_inverse_scalar(std::int64_t a, std::uint64_t m) {
    require_modulus(m);
    std::uint64_t a0 = reduce_entry(a, m);
    std::uint64_t g = std::gcd(a0, m);
    if (g != 1) {
        throw NotInvertibleError("no inverse mod " + std::to_string(m) +
                                     ": gcd = " + std::to_string(g),
                                 g);
    }
    // Extended Euclid over signed 64-bit; coefficients stay below m.
    std::int64_t old_r = static_cast<std::int64_t>(a0);
    std::int64_t r = static_cast<std::int64_t>(m);
    std::int64_t old_s = 1, s = 0;
    while (r != 0) {
        std::int64_t q = old_r / r;
        std::int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    return reduce_entry(old_s, m);
}

BigInt det_exact(const IntMatrix& m) { return det_bareiss(to_big(m), m.order()); }

std::uint64_t det_mod(const IntMatrix& mat, std::uint64_t m) {
    require_modulus(m);
    return reduce_big(det_exact(mat), m);
}

std::vector<BigInt> adjugate_exact(const IntMatrix& m) {
    const std::size_t n = m.order();
    std::vector<BigInt> adj(n * n);
    if (n == 0) return adj;
    if (n == 1) {
        adj[0] = 1;
        return adj;
    }
    std::vector<BigInt> minor((n - 1) * (n - 1));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t k = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == r) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == c) continue;
                    minor[k++] = m.at(i, j);
                }
            }
            BigInt cof = det_bareiss(minor, n - 1);
            if ((r + c) % 2 == 1) cof = -cof;
            adj[c * n + r] = cof;  // transpose of the cofactor matrix
        }
    }
    return adj;
}

IntMatrix matrix_mod_inverse(const IntMatrix& a, std::uint64_t m) {
    require_modulus(m);
    std::uint64_t d = det_mod(a, m);
    std::uint64_t g = std::gcd(d, m);
    if (g != 1) {
        throw NotInvertibleError("matrix not invertible mod " + std::to_string(m) +
                                     ": gcd(det, m) = " + std::to_string(g),
                                 g);
    }
    std::uint64_t dinv = mod_inverse_scalar(static_cast<std::int64_t>(d), m);
    std::vector<BigInt> adj = adjugate_exact(a);
    const std::size_t n = a.order();
    IntMatrix out(n);
    for (std::size_t i = 0; i < n * n; ++i) {
        std::uint64_t e = reduce_big(adj[i], m);
        unsigned __int128 prod = static_cast<unsigned __int128>(e) * dinv;
        out.at(i / n, i % n) = static_cast<std::int64_t>(prod % m);
    }
    return out;
}

namespace {

std::vector<std::uint64_t> mod_matvec(std::span<const std::uint64_t> v,
                                      const IntMatrix& mat, std::uint64_t m,
                                      const char* who) {
    require_modulus(m);
    const std::size_t n = mat.order();
    if (v.size() != n) {
        throw ShapeError(std::string(who) + ": vector length " +
                         std::to_string(v.size()) + " vs matrix order " +
                         std::to_string(n));
    }
    for (std::uint64_t s : v) {
        if (s >= m) {
            throw EncodingError(std::string(who) + ": symbol " + std::to_string(s) +
                                " not below modulus " + std::to_string(m));
        }
    }
    std::vector<std::uint64_t> out(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        unsigned __int128 acc = 0;
        for (std::size_t c = 0; c < n; ++c) {
            std::uint64_t e = reduce_entry(mat.at(r, c), m);
            acc += static_cast<unsigned __int128>(e) * v[c];
            acc %= m;
        }
        out[r] = static_cast<std::uint64_t>(acc);
    }
    return out;
}

}  // namespace

std::vector<std::uint64_t> encrypt(std::span<const std::uint64_t> t,
                                   const IntMatrix& a, std::uint64_t m) {
    return mod_matvec(t, a, m, "encrypt");
}

std::vector<std::uint64_t> decrypt(std::span<const std::uint64_t> c,
                                   const IntMatrix& b, std::uint64_t m) {
    return mod_matvec(c, b, m, "decrypt");
}

BigInt ordinary_dot(std::span<const std::int64_t> a,
                    std::span<const std::int64_t> b) {
    if (a.size() != b.size()) throw ShapeError("dot: vector lengths differ");
    BigInt acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += BigInt(a[i]) * b[i];
    }
    return acc;
}

BigInt winograd_dot(std::span<const std::int64_t> a,
                    std::span<const std::int64_t> b) {
    if (a.size() != b.size()) throw ShapeError("winograd_dot: vector lengths differ");
    const std::size_t n = a.size();
    const std::size_t k = n / 2;
    BigInt pair_sum = 0, a_terms = 0, b_terms = 0;
    for (std::size_t i = 0; i < k; ++i) {
        BigInt left = BigInt(a[2 * i]) + b[2 * i + 1];
        BigInt right = BigInt(a[2 * i + 1]) + b[2 * i];
        pair_sum += left * right;
        a_terms += BigInt(a[2 * i]) * a[2 * i + 1];
        b_terms += BigInt(b[2 * i]) * b[2 * i + 1];
    }
    BigInt acc = pair_sum - a_terms - b_terms;
    if (n % 2 == 1) acc += BigInt(a[n - 1]) * b[n - 1];
    return acc;
}

IntMatrix multiply(const IntMatrix& a, const IntMatrix& b,
                   std::optional<std::uint64_t> m) {
    require_same_order(a, b);
    const std::size_t n = a.order();
    IntMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            BigInt acc = 0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += BigInt(a.at(i, k)) * b.at(k, j);
            }
            out.at(i, j) = m ? static_cast<std::int64_t>(reduce_big(acc, *m))
                             : to_int64_checked(acc, "multiply");
        }
    }
    return out;
}

IntMatrix winograd_matmul(const IntMatrix& a, const IntMatrix& b,
                          std::optional<std::uint64_t> m) {
    require_same_order(a, b);
    const std::size_t n = a.order();
    const std::size_t k = n / 2;
    std::vector<BigInt> row_terms(n, 0), col_terms(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            row_terms[i] += BigInt(a.at(i, 2 * t)) * a.at(i, 2 * t + 1);
            col_terms[i] += BigInt(b.at(2 * t, i)) * b.at(2 * t + 1, i);
        }
    }
    IntMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            BigInt acc = 0;
            for (std::size_t t = 0; t < k; ++t) {
                BigInt left = BigInt(a.at(i, 2 * t)) + b.at(2 * t + 1, j);
                BigInt right = BigInt(a.at(i, 2 * t + 1)) + b.at(2 * t, j);
                acc += left * right;
            }
            acc -= row_terms[i];
            acc -= col_terms[j];
            if (n % 2 == 1) acc += BigInt(a.at(i, n - 1)) * b.at(n - 1, j);
            out.at(i, j) = m ? static_cast<std::int64_t>(reduce_big(acc, *m))
                             : to_int64_checked(acc, "winograd_matmul");
        }
    }
    return out;
}

OpCount op_counts(std::uint64_t n, MulMethod method) {
    if (n == 0) throw DomainError("op_counts requires n >= 1");
    OpCount oc;
    if (method == MulMethod::ordinary) {
        oc.additions = n * n * (n - 1);
        oc.multiplications = n * n * n;
    } else {
        std::uint64_t k = n / 2;
        oc.additions = n * n * (n + 2);
        oc.multiplications = n * n * (k + (n % 2)) + 2 * n * k;
    }
    return oc;
}

IntMatrix transpose(const IntMatrix& m) {
    const std::size_t n = m.order();
    IntMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.at(j, i) = m.at(i, j);
        }
    }
    return out;
}

IntMatrix block_diag(std::span<const IntMatrix> blocks) {
    std::size_t total = 0;
    for (const IntMatrix& b : blocks) total += b.order();
    IntMatrix out(total);
    std::size_t off = 0;
    for (const IntMatrix& b : blocks) {
        for (std::size_t i = 0; i < b.order(); ++i) {
            for (std::size_t j = 0; j < b.order(); ++j) {
                out.at(off + i, off + j) = b.at(i, j);
            }
        }
        off += b.order();
    }
    return out;
}

SymbolVector encode_bits(const BitVec& bits, unsigned width,
                         std::size_t pad_multiple) {
    if (width == 0 || width > 63) {
        throw EncodingError("symbol width must be in [1, 63]");
    }
    if (pad_multiple == 0) throw EncodingError("pad multiple must be >= 1");
    SymbolVector v;
    v.symbol_width_bits = width;
    v.original_bit_length = bits.size();
    std::size_t count = (bits.size() + width - 1) / width;
    count = ((count + pad_multiple - 1) / pad_multiple) * pad_multiple;
    if (count == 0) count = pad_multiple;
    v.symbols.assign(count, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            std::size_t sym = i / width;
            std::size_t pos = i % width;
            v.symbols[sym] |= std::uint64_t{1} << (width - 1 - pos);
        }
    }
    return v;
}

BitVec decode_bits(const SymbolVector& v) {
    const unsigned w = v.symbol_width_bits;
    if (w == 0 || w > 63) throw EncodingError("symbol width must be in [1, 63]");
    const std::uint64_t cap = std::uint64_t{1} << w;
    std::uint64_t capacity = static_cast<std::uint64_t>(v.symbols.size()) * w;
    if (v.original_bit_length > capacity) {
        throw EncodingError("declared bit length " +
                            std::to_string(v.original_bit_length) +
                            " exceeds symbol capacity " + std::to_string(capacity));
    }
    BitVec bits(static_cast<std::size_t>(v.original_bit_length));
    for (std::size_t s = 0; s < v.symbols.size(); ++s) {
        std::uint64_t sym = v.symbols[s];
        if (sym >= cap) {
            throw EncodingError("symbol " + std::to_string(sym) +
                                " does not fit width " + std::to_string(w));
        }
        for (unsigned b = 0; b < w; ++b) {
            std::uint64_t idx = static_cast<std::uint64_t>(s) * w + b;
            bool bit = (sym >> (w - 1 - b)) & 1;
            if (idx < v.original_bit_length) {
                bits.set(static_cast<std::size_t>(idx), bit);
            } else if (bit) {
                throw EncodingError("nonzero padding bit at index " +
                                    std::to_string(idx));
            }
        }
    }
    return bits;
}

unsigned symbol_width_for(std::span<const std::uint64_t> moduli) {
    if (moduli.empty()) throw ScheduleError("empty modulus table");
    std::uint64_t m = *std::min_element(moduli.begin(), moduli.end());
    if (m < 2) throw ScheduleError("modulus below 2 in table");
    return std::bit_width(m) - 1;  // floor(log2(m))
}

}  // namespace varikey::modmatrix
