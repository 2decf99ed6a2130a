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

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rsma/channel.hpp"

namespace rsma {

enum class Scheme { Rsma, Noma12, Noma21, Fdma, Tdma };

inline constexpr std::array<Scheme, 5> kAllSchemes{Scheme::Rsma, Scheme::Noma12, Scheme::Noma21,
                                                   Scheme::Fdma, Scheme::Tdma};

inline constexpr std::string_view to_string(Scheme s) noexcept {
    switch (s) {
        case Scheme::Rsma: return "rsma";
        case Scheme::Noma12: return "noma12";
        case Scheme::Noma21: return "noma21";
        case Scheme::Fdma: return "fdma";
        case Scheme::Tdma: return "tdma";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name) {
    for (Scheme s : kAllSchemes)
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

inline constexpr bool is_oma(Scheme s) noexcept { return s == Scheme::Fdma || s == Scheme::Tdma; }

inline constexpr DecodeOrder noma_order(Scheme s) noexcept {
    return s == Scheme::Noma21 ? DecodeOrder::U2First : DecodeOrder::U1First;
}

/// How the OMA resource fraction is chosen.
struct AlphaRule {
    enum class Kind { PowerRatio, Fixed };
    Kind kind = Kind::PowerRatio;
    double fixed = 0.5;

    static AlphaRule power_ratio() { return {}; }
    static AlphaRule fixed_value(double a) {
        OmaFraction check(a);
        return {Kind::Fixed, check.value()};
    }

    [[nodiscard]] OmaFraction resolve(double p1, double p2) const {
        return kind == Kind::Fixed ? OmaFraction(fixed) : OmaFraction::power_ratio(p1, p2);
    }
};

}  // namespace rsma
