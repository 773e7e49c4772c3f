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
#ifndef VARIKEY_ERRORS_HPP
#define VARIKEY_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace varikey {

/// Base class for all varikey exceptions.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of an operation (e.g. gcd(0,0)).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// A scalar or matrix has no inverse modulo m; carries the offending gcd.
class NotInvertibleError : public Error {
public:
    NotInvertibleError(const std::string& what, std::uint64_t gcd_witness)
        : Error(what), gcd(gcd_witness) {}
    std::uint64_t gcd;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(what) {}
};

/// Symbol out of range for the modulus or width, or bad bit packing.
class EncodingError : public Error {
public:
    explicit EncodingError(const std::string& what) : Error(what) {}
};

/// Index-table selection failed (bad level, empty table, ...).
class ScheduleError : public Error {
public:
    explicit ScheduleError(const std::string& what) : Error(what) {}
};

/// Modulus has no proper divisors, so no selection table exists.
class NoDivisorsError : public ScheduleError {
public:
    explicit NoDivisorsError(const std::string& what) : ScheduleError(what) {}
};

/// Rejection sampling budget exhausted while generating key material.
class KeygenError : public Error {
public:
    explicit KeygenError(const std::string& what) : Error(what) {}
};

/// Malformed wire bytes or key-material text.
class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& what) : Error(what) {}
};

/// Invalid scenario or simulator configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Statement text rejected by the belief-logic parser; position is 0-based.
class BanParseError : public Error {
public:
    BanParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"),
          pos(position) {}
    std::size_t pos;
};

}  // namespace varikey

#endif
