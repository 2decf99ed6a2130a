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

// First-order surrogates used by the successive convex approximation.
//
// Throughput: the dispersion factor nu(d) = sqrt(1 - (1 + d)^-2) is replaced
// by its tangent at d_ref, leaving log2(1 + d) minus an affine term, which is
// concave in d.
//
// SINR: gamma(P) >= delta is written as interference - signal/delta <= 0 and
// signal/delta is replaced by its first-order expansion at (P_ref, d_ref).

#include <cmath>
#include <stdexcept>
#include <string>

#include "rsma/channel.hpp"
#include "rsma/fbl.hpp"

namespace rsma {

/// Linearization point of the blocklength iteration: SINR lower bounds
/// (delta), per-stream throughput lower bounds of U1 in bits (tau), powers
/// and blocklength.
struct SlackState {
    double delta11 = 0.0;
    double delta22 = 0.0;
    double delta12 = 0.0;
    double tau11 = 0.0;
    double tau12 = 0.0;
    PowerAllocation powers;
    double n = 0.0;
};

inline constexpr double kDeltaRefFloor = 1e-6;

inline double dispersion_factor(double delta) {
    const double s = 1.0 + delta;
    return std::sqrt(1.0 - 1.0 / (s * s));
}

/// d nu / d delta = (1 + delta)^-3 / nu(delta); singular at delta = 0.
inline double dispersion_factor_slope(double delta) {
    if (!(delta > 0.0)) throw std::domain_error("dispersion_factor_slope: delta must be positive");
    const double s = 1.0 + delta;
    return 1.0 / (s * s * s * dispersion_factor(delta));
}

/// delta -> (1 - eps) n [log2(1 + delta) - E (nu(d_ref) + (delta - d_ref) nu'(d_ref))]
/// with E = Q^-1(eps) log2(e) / sqrt(n).
struct ThroughputSurrogate {
    double delta_ref = 0.0;
    double scale = 0.0;     // (1 - eps) n
    double penalty = 0.0;   // E
    double nu_ref = 0.0;
    double slope_ref = 0.0;

    [[nodiscard]] double rate(double delta) const {
        return std::log2(1.0 + delta) - penalty * (nu_ref + (delta - delta_ref) * slope_ref);
    }
    [[nodiscard]] double operator()(double delta) const { return scale * rate(delta); }

    /// The exact (non-linearized) expression the surrogate is tangent to.
    [[nodiscard]] double exact(double delta) const {
        return scale * (std::log2(1.0 + delta) - penalty * dispersion_factor(delta));
    }
};

inline ThroughputSurrogate linearize_throughput(double delta_ref, ReliabilityTarget eps_msg, double n) {
    if (!(delta_ref > 0.0))
        throw std::domain_error("linearize_throughput: reference SINR must be positive, got " +
                                std::to_string(delta_ref));
    detail::require_blocklength(n, "linearize_throughput");
    ThroughputSurrogate s;
    s.delta_ref = delta_ref;
    s.scale = (1.0 - eps_msg.value()) * n;
    s.penalty = inverse_q(eps_msg) * kLog2e / std::sqrt(n);
    s.nu_ref = dispersion_factor(delta_ref);
    s.slope_ref = dispersion_factor_slope(delta_ref);
    return s;
}

enum class SinrConstraint { Gamma11AtLeastDelta11, Gamma22AtLeastDelta22 };

/// Affine constraint  c11 p11 + c12 p12 + c2 p2 + cd delta + c0 <= 0.
struct AffineSinrConstraint {
    double c11 = 0.0;
    double c12 = 0.0;
    double c2 = 0.0;
    double cd = 0.0;
    double c0 = 0.0;

    [[nodiscard]] double lhs(const PowerAllocation& p, double delta) const {
        return c11 * p.p11 + c12 * p.p12 + c2 * p.p2 + cd * delta + c0;
    }
};

inline AffineSinrConstraint linearize_sinr(SinrConstraint which, const SlackState& ref, const SystemParams& sys) {
    AffineSinrConstraint out;
    if (which == SinrConstraint::Gamma11AtLeastDelta11) {
        const double d = ref.delta11;
        if (!(d > 0.0)) throw std::domain_error("linearize_sinr: reference delta11 must be positive");
        // p12 g1 + p2 g2 + s2 - p11 g1 / d + (delta - d) p11_ref g1 / d^2
        out.c12 = sys.g1;
        out.c2 = sys.g2;
        out.c11 = -sys.g1 / d;
        out.cd = ref.powers.p11 * sys.g1 / (d * d);
        out.c0 = sys.noise_var - ref.powers.p11 * sys.g1 / d;
    } else {
        const double d = ref.delta22;
        if (!(d > 0.0)) throw std::domain_error("linearize_sinr: reference delta22 must be positive");
        // p12 g1 + s2 - p2 g2 / d + (delta - d) p2_ref g2 / d^2
        out.c12 = sys.g1;
        out.c2 = -sys.g2 / d;
        out.cd = ref.powers.p2 * sys.g2 / (d * d);
        out.c0 = sys.noise_var - ref.powers.p2 * sys.g2 / d;
    }
    return out;
}

}  // namespace rsma
