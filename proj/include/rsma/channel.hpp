// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Two-user uplink channel: parameters and per-scheme SINRs. Everything here is
// in linear units; dB conversion lives at the I/O boundary.
//
// RSMA uses one layer of splitting at U1 with the fixed SIC order
// s11 -> s2 -> s12.

#include <cmath>
#include <stdexcept>
#include <string>

namespace rsma {

inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) noexcept { return 10.0 * std::log10(lin); }

struct SystemParams {
    double g1 = 1.0;         // |h1|^2
    double g2 = 0.7;         // |h2|^2
    double noise_var = 1.0;  // sigma_n^2
    double p_max = 1.0;      // P_t, linear
    double n_min = 100.0;
    double n_max = 3000.0;

    void validate() const {
        if (!(g1 > 0.0) || !(g2 > 0.0)) throw std::invalid_argument("SystemParams: channel gains must be positive");
        if (!(noise_var > 0.0)) throw std::invalid_argument("SystemParams: noise_var must be positive");
        if (!(p_max > 0.0)) throw std::invalid_argument("SystemParams: p_max must be positive");
        if (!(n_min > 0.0) || !(n_min <= n_max))
            throw std::invalid_argument("SystemParams: need 0 < n_min <= n_max");
    }

    /// U1 is labelled the strong user; the formulas do not need it.
    [[nodiscard]] bool strong_user_first() const noexcept { return g1 >= g2; }
};

/// Transmit powers of the three RSMA streams (watts, linear).
struct PowerAllocation {
    double p11 = 0.0;
    double p12 = 0.0;
    double p2 = 0.0;

    [[nodiscard]] double p1() const noexcept { return p11 + p12; }

    [[nodiscard]] bool valid_for(const SystemParams& sys, double tol = 1e-12) const noexcept {
        return p11 >= 0.0 && p12 >= 0.0 && p2 >= 0.0 && p11 + p12 <= sys.p_max * (1.0 + tol) &&
               p2 <= sys.p_max * (1.0 + tol);
    }

    void validate(const SystemParams& sys) const {
        if (!valid_for(sys))
            throw std::invalid_argument("PowerAllocation: need non-negative powers with p11+p12 <= p_max and p2 <= p_max");
    }
};

/// Bandwidth (FDMA) or time (TDMA) share of U1, strictly inside (0, 1).
class OmaFraction {
public:
    explicit OmaFraction(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::domain_error("OmaFraction: alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    /// The power-ratio rule alpha = P1 / (P1 + P2).
    static OmaFraction power_ratio(double p1, double p2) {
        if (!(p1 + p2 > 0.0)) throw std::domain_error("OmaFraction: power-ratio rule needs P1 + P2 > 0");
        return OmaFraction(p1 / (p1 + p2));
    }
    [[nodiscard]] double value() const noexcept { return alpha_; }

private:
    double alpha_;
};

enum class DecodeOrder { U1First, U2First };

struct RsmaSinrs {
    double gamma11 = 0.0;
    double gamma22 = 0.0;
    double gamma12 = 0.0;
};

struct AggregateSinrs {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma_sum = 0.0;
};

/// SINRs of the two users, in user order (U1, U2) regardless of scheme.
struct UserSinrs {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
};

inline RsmaSinrs rsma_sinrs(const PowerAllocation& p, const SystemParams& sys) {
    const double s1 = p.p11 * sys.g1;
    const double s12 = p.p12 * sys.g1;
    const double s2 = p.p2 * sys.g2;
    return {s1 / (s12 + s2 + sys.noise_var), s2 / (s12 + sys.noise_var), s12 / sys.noise_var};
}

inline AggregateSinrs aggregate_sinrs(const PowerAllocation& p, const SystemParams& sys) {
    const double s1 = p.p1() * sys.g1;
    const double s2 = p.p2 * sys.g2;
    return {s1 / (s2 + sys.noise_var), s2 / (s1 + sys.noise_var), (s1 + s2) / sys.noise_var};
}

/// NOMA SINRs returned in user order. With U1First the first user sees the
/// other as interference and U2 is interference-free; U2First mirrors it.
inline UserSinrs noma_sinrs(double p1, double p2, const SystemParams& sys, DecodeOrder order) {
    const double s1 = p1 * sys.g1;
    const double s2 = p2 * sys.g2;
    if (order == DecodeOrder::U1First) return {s1 / (s2 + sys.noise_var), s2 / sys.noise_var};
    return {s1 / sys.noise_var, s2 / (s1 + sys.noise_var)};
}

inline UserSinrs fdma_sinrs(double p1, double p2, OmaFraction alpha, const SystemParams& sys) {
    const double a = alpha.value();
    return {p1 * sys.g1 / (a * sys.noise_var), p2 * sys.g2 / ((1.0 - a) * sys.noise_var)};
}

inline UserSinrs tdma_sinrs(double p1, double p2, const SystemParams& sys) {
    return {p1 * sys.g1 / sys.noise_var, p2 * sys.g2 / sys.noise_var};
}

}  // namespace rsma
