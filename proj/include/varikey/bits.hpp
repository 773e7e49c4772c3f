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
#ifndef VARIKEY_BITS_HPP
#define VARIKEY_BITS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "varikey/u128.hpp"

namespace varikey {

/// A most-significant-bit-first bit sequence. Sized for protocol payloads
/// (a few hundred bits), so one byte per bit keeps the code obvious.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n) : bits_(n, 0) {}

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    void push_back(bool v) { bits_.push_back(v ? 1 : 0); }

    /// Appends the 128 bits of v, most significant first.
    void append_u128(u128 v);

    /// Reads 128 bits starting at bit offset, most significant first.
    u128 read_u128(std::size_t offset) const;

    /// Hex round-trip; bit count must be a multiple of 4 for to_hex.
    static BitVec from_hex(std::string_view hex);
    std::string to_hex() const;

    bool operator==(const BitVec&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

}  // namespace varikey

#endif
