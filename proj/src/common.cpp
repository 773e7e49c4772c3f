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
#include "varikey/bits.hpp"
#include "varikey/u128.hpp"

namespace varikey {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

u128 u128_parse(std::string_view text) {
    if (text.empty()) throw DecodeError("empty 128-bit value");
    bool hex = false;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        hex = true;
        text.remove_prefix(2);
    }
    if (text.empty()) throw DecodeError("empty 128-bit value after 0x");
    u128 v = 0;
    if (hex) {
        if (text.size() > 32) throw DecodeError("hex value wider than 128 bits");
        for (char c : text) {
            int d = hex_digit(c);
            if (d < 0) throw DecodeError(std::string("bad hex digit '") + c + "'");
            v = (v << 4) | static_cast<unsigned>(d);
        }
    } else {
        for (char c : text) {
            if (c < '0' || c > '9') {
                throw DecodeError(std::string("bad decimal digit '") + c + "'");
            }
            u128 next = v * 10 + static_cast<unsigned>(c - '0');
            if (next < v) throw DecodeError("decimal value wider than 128 bits");
            v = next;
        }
    }
    return v;
}

void BitVec::append_u128(u128 v) {
    for (int i = 127; i >= 0; --i) {
        push_back(((v >> i) & 1) != 0);
    }
}

u128 BitVec::read_u128(std::size_t offset) const {
    if (offset + 128 > size()) {
        throw DecodeError("bit read past end of vector");
    }
    u128 v = 0;
    for (std::size_t i = 0; i < 128; ++i) {
        v = (v << 1) | bits_[offset + i];
    }
    return v;
}

BitVec BitVec::from_hex(std::string_view hex) {
    BitVec out;
    for (char c : hex) {
        int d = hex_digit(c);
        if (d < 0) throw DecodeError(std::string("bad hex digit '") + c + "'");
        for (int b = 3; b >= 0; --b) out.push_back((d >> b) & 1);
    }
    return out;
}

std::string BitVec::to_hex() const {
    if (size() % 4 != 0) throw DecodeError("bit count not a multiple of 4");
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(size() / 4);
    for (std::size_t i = 0; i < size(); i += 4) {
        int v = (bits_[i] << 3) | (bits_[i + 1] << 2) | (bits_[i + 2] << 1) |
                bits_[i + 3];
        out.push_back(digits[v]);
    }
    return out;
}

}  // namespace varikey
