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
#ifndef VARIKEY_U128_HPP
#define VARIKEY_U128_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "varikey/errors.hpp"

namespace varikey {

/// 128-bit unsigned value: nonces, shared secrets, and tag identifiers.
/// Arithmetic wraps modulo 2^128.
using u128 = unsigned __int128;

constexpr u128 make_u128(std::uint64_t hi, std::uint64_t lo) {
    return (static_cast<u128>(hi) << 64) | lo;
}

constexpr std::uint64_t u128_hi(u128 v) { return static_cast<std::uint64_t>(v >> 64); }
constexpr std::uint64_t u128_lo(u128 v) { return static_cast<std::uint64_t>(v); }

constexpr std::uint64_t u128_mod(u128 v, std::uint64_t m) {
    return static_cast<std::uint64_t>(v % m);
}

inline std::string u128_hex(u128 v) {
    static const char* digits = "0123456789abcdef";
    std::string out(32, '0');
    for (int i = 31; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[static_cast<unsigned>(v & 0xf)];
        v >>= 4;
    }
    return out;
}

/// Parses a hex string (with or without 0x prefix, up to 32 digits) or a
/// decimal string into a 128-bit value. Throws DecodeError on bad input.
u128 u128_parse(std::string_view text);

}  // namespace varikey

#endif
