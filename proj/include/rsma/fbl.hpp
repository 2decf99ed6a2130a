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

// Scalar finite-blocklength primitives for the real AWGN channel under the
// normal approximation: Gaussian tail inverse, dispersion, capacity and the
// second-order achievable rate. Rates are in bits per channel use and the
// blocklength is a (real) number of channel uses. A blocklength of +inf
// denotes the infinite-blocklength regime.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rsma {

inline constexpr double kInfiniteBlocklength = std::numeric_limits<double>::infinity();
inline constexpr double kLog2e = std::numbers::log2e;

/// Target decoding error probability of a single stream, 0 < epsilon < 1.
class ReliabilityTarget {
public:
    constexpr ReliabilityTarget() = default;
    explicit ReliabilityTarget(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::domain_error("ReliabilityTarget: epsilon must lie in (0, 1), got " +
                                    std::to_string(epsilon));
    }
    [[nodiscard]] constexpr double value() const noexcept { return epsilon_; }

private:
    double epsilon_ = 1e-6;
};

/// Gaussian tail probability Q(x) = P[N(0,1) > x].
inline double q_function(double x) noexcept {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace detail {

// Lower-tail standard normal quantile for 0 < p <= 0.5. Rational start
// (Acklam) followed by Halley steps on the erfc-based CDF, which stays
// accurate in the deep tail because erfc is evaluated at a positive argument.
inline double lower_normal_quantile(double p) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x = 0.0;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
    for (int step = 0; step < 2; ++step) {
        const double err = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
        const double u = err * sqrt_2pi * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

inline void require_sinr(double gamma, const char* who) {
    if (!(gamma >= 0.0))
        throw std::domain_error(std::string(who) + ": SINR must be non-negative, got " +
                                std::to_string(gamma));
}

inline void require_blocklength(double n, const char* who) {
    if (!(n > 0.0))
        throw std::domain_error(std::string(who) + ": blocklength must be positive, got " +
                                std::to_string(n));
}

}  // namespace detail

/// Inverse of the Gaussian tail function: returns x with Q(x) = p.
inline double inverse_q(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_q: probability must lie in (0, 1), got " +
                                std::to_string(p));
    if (p == 0.5) return 0.0;
    return p < 0.5 ? -detail::lower_normal_quantile(p) : detail::lower_normal_quantile(1.0 - p);
}

inline double inverse_q(ReliabilityTarget eps) { return inverse_q(eps.value()); }

/// V = 1 - (1 + gamma)^-2
inline double channel_dispersion(double gamma) {
    detail::require_sinr(gamma, "channel_dispersion");
    if (std::isinf(gamma)) return 1.0;
    const double s = 1.0 + gamma;
    return 1.0 - 1.0 / (s * s);
}

/// log2(1 + gamma)
inline double shannon_capacity(double gamma) {
    detail::require_sinr(gamma, "shannon_capacity");
    return std::log2(1.0 + gamma);
}

/// sqrt(V / n) * Q^-1(eps) * log2(e). Zero for n = +inf.
inline double dispersion_penalty(double n, double gamma, ReliabilityTarget eps) {
    detail::require_blocklength(n, "dispersion_penalty");
    const double v = channel_dispersion(gamma);
    if (std::isinf(n)) return 0.0;
    return std::sqrt(v / n) * inverse_q(eps) * kLog2e;
}

/// Normal-approximation rate C(gamma) - D(n, gamma, eps). Not clamped: the
/// result is negative when the penalty exceeds the capacity.
inline double fbl_rate(double n, double gamma, ReliabilityTarget eps) {
    return shannon_capacity(gamma) - dispersion_penalty(n, gamma, eps);
}

/// max(fbl_rate, 0); what a physical link actually delivers.
inline double fbl_rate_clamped(double n, double gamma, ReliabilityTarget eps) {
    const double r = fbl_rate(n, gamma, eps);
    return r > 0.0 ? r : 0.0;
}

}  // namespace rsma
