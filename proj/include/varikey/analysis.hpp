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
#ifndef VARIKEY_ANALYSIS_HPP
#define VARIKEY_ANALYSIS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "varikey/bigint.hpp"

namespace varikey::analysis {

/// The seven scheduling variants, in the reference-table row order.
enum class Algorithm {
    sueo,
    am,
    am_sueo,
    dbltkm,
    am_dbltkm,
    sueo_dbltkm,
    am_sueo_dbltkm,
};

inline constexpr std::array<Algorithm, 7> kAlgorithms{
    Algorithm::sueo,       Algorithm::am,
    Algorithm::am_sueo,    Algorithm::dbltkm,
    Algorithm::am_dbltkm,  Algorithm::sueo_dbltkm,
    Algorithm::am_sueo_dbltkm,
};

std::string_view algorithm_name(Algorithm a);
Algorithm algorithm_from_name(std::string_view name);  // ConfigError on unknown

struct Config {
    unsigned Q = 2;  // proper-divisor count of the initial modulus
    unsigned N = 2;  // number of base matrices
    unsigned n = 2;  // matrix order / plaintext length
    Algorithm algorithm = Algorithm::am_sueo_dbltkm;
};

/// Pre-stored variable counts with and without the scheduling algorithm, and
/// the saving ratio in hundredths of a percent (round half up).
struct StorageReport {
    BigInt s_with;
    BigInt s_without;
    std::int64_t k_centi_percent = 0;

    std::string k_percent() const;  // "99.59"
};

BigInt z_am_count(unsigned Q);      // 2Q
BigInt z_sueo_count(unsigned N);    // sum of C(N,i)*i!
BigInt z_dbltkm_count(unsigned N);  // sum of (2N)^i
BigInt binomial(const BigInt& n, unsigned k);

/// The storage formulas exactly as published, including their uneven "+1"
/// terms. With uniform_plus_one every count carries exactly one trailing +1
/// instead, for comparison.
StorageReport storage(const Config& cfg, bool uniform_plus_one = false);

/// Percent string for a signed value in hundredths (round half away from 0).
std::string format_centi(std::int64_t centi);

/// The 7x3 saving-ratio grid over (N,n) in {(2,2),(3,2),(3,3)} as CSV.
std::string table9_csv(unsigned Q = 2, bool uniform_plus_one = false);

/// All seven ratios at one configuration, one row per algorithm.
std::string histogram_csv(unsigned Q, unsigned N, unsigned n,
                          bool uniform_plus_one = false);

enum class SweepAxis { Q, N, n };
SweepAxis axis_from_name(std::string_view name);

/// One row per axis value; columns follow the reference row order.
std::string sweep_csv(SweepAxis axis, unsigned lo, unsigned hi, Config fixed,
                      bool uniform_plus_one = false);

/// Ordinary vs pair-product operation counts and their percentage deltas.
std::string winograd_csv(std::uint64_t n_min, std::uint64_t n_max);

}  // namespace varikey::analysis

#endif
