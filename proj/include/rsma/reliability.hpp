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

// Message-level error probabilities over the SIC chain and effective
// throughput (expected delivered bits per block) for RSMA, NOMA and OMA.
//
// Stream-to-user mapping of StreamReliability for the baselines:
//   NOMA: eps11 -> U1's stream, eps22 -> U2's stream (eps12 unused).
//   OMA:  eps11 -> U1,          eps22 -> U2          (eps12 unused).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rsma/channel.hpp"
#include "rsma/fbl.hpp"
#include "rsma/scheme.hpp"

namespace rsma {

struct StreamReliability {
    double eps11 = 1e-6;
    double eps12 = 1e-6;
    double eps22 = 1e-6;

    static StreamReliability uniform(double eps) { return {eps, eps, eps}; }

    void validate() const {
        (void)ReliabilityTarget(eps11);
        (void)ReliabilityTarget(eps12);
        (void)ReliabilityTarget(eps22);
    }
};

struct ThroughputTargets {
    double t1_th = 0.0;  // bits per block
    double t2_th = 0.0;

    void validate() const {
        if (!(t1_th >= 0.0) || !(t2_th >= 0.0))
            throw std::invalid_argument("ThroughputTargets: thresholds must be non-negative");
    }
};

enum class MessageErrorModel { Approximate, Exact };

struct MessageErrors {
    double eps1 = 0.0;
    double eps2 = 0.0;
};

struct ThroughputPair {
    double t1 = 0.0;
    double t2 = 0.0;
};

/// W1 needs s11, s2 (for SIC) and s12; W2 needs s11 and s2.
inline MessageErrors rsma_message_errors(const StreamReliability& s, bool exact) {
    const double e11 = s.eps11, e12 = s.eps12, e22 = s.eps22;
    if (exact) {
        const double e2 = e11 + (1.0 - e11) * e22;
        return {e2 + (1.0 - e11) * (1.0 - e22) * e12, e2};
    }
    return {e11 + e12 + e22, e11 + e22};
}

/// NOMA message errors in user order. For U1First this is
/// (e11 + (1 - e11) e22, e22); U2First swaps the roles of the users.
inline MessageErrors noma_message_errors(double eps11, double eps22,
                                         DecodeOrder order = DecodeOrder::U1First,
                                         bool exact = false) {
    const double first = order == DecodeOrder::U1First ? eps11 : eps22;
    const double second = order == DecodeOrder::U1First ? eps22 : eps11;
    const double chained = exact ? first + (1.0 - first) * second : first + second;
    if (order == DecodeOrder::U1First) return {chained, second};
    return {second, chained};
}

inline ThroughputPair rsma_effective_throughput(double n, const PowerAllocation& p, const SystemParams& sys,
                                                const StreamReliability& s,
                                                MessageErrorModel model = MessageErrorModel::Approximate) {
    detail::require_blocklength(n, "rsma_effective_throughput");
    const RsmaSinrs g = rsma_sinrs(p, sys);
    const MessageErrors e = rsma_message_errors(s, model == MessageErrorModel::Exact);
    const double r1 = fbl_rate_clamped(n, g.gamma11, ReliabilityTarget(s.eps11)) +
                      fbl_rate_clamped(n, g.gamma12, ReliabilityTarget(s.eps12));
    const double r2 = fbl_rate_clamped(n, g.gamma22, ReliabilityTarget(s.eps22));
    return {(1.0 - e.eps1) * n * r1, (1.0 - e.eps2) * n * r2};
}

inline ThroughputPair noma_effective_throughput(double n, double p1, double p2, const SystemParams& sys,
                                                const StreamReliability& s,
                                                DecodeOrder order = DecodeOrder::U1First,
                                                MessageErrorModel model = MessageErrorModel::Approximate) {
    detail::require_blocklength(n, "noma_effective_throughput");
    const UserSinrs g = noma_sinrs(p1, p2, sys, order);
    const MessageErrors e = noma_message_errors(s.eps11, s.eps22, order, model == MessageErrorModel::Exact);
    return {(1.0 - e.eps1) * n * fbl_rate_clamped(n, g.gamma1, ReliabilityTarget(s.eps11)),
            (1.0 - e.eps2) * n * fbl_rate_clamped(n, g.gamma2, ReliabilityTarget(s.eps22))};
}

/// Per-user OMA rate with an explicit pre-log share:
/// prelog * log2(1 + gamma) - sqrt(V / n_user) Q^-1(eps) log2(e).
inline double oma_user_rate(double n_user, double gamma, double prelog, ReliabilityTarget eps) {
    detail::require_blocklength(n_user, "oma_user_rate");
    return prelog * shannon_capacity(gamma) - dispersion_penalty(n_user, gamma, eps);
}

struct OmaSplit {
    double n1 = 0.0;
    double n2 = 0.0;
};

inline OmaSplit oma_blocklengths(double n, OmaFraction alpha) {
    const OmaSplit split{alpha.value() * n, (1.0 - alpha.value()) * n};
    if (!(split.n1 >= 1.0) || !(split.n2 >= 1.0))
        throw std::domain_error("oma_blocklengths: split leaves a user with less than one channel use");
    return split;
}

/// OMA effective throughput using the per-user rate with both the resource
/// share as pre-log factor and the per-user blocklength in the dispersion
/// term; T_i = (1 - eps_i) n_i max(R_i, 0).
inline ThroughputPair oma_effective_throughput(double n, double p1, double p2, OmaFraction alpha,
                                               const SystemParams& sys, const StreamReliability& s,
                                               Scheme scheme) {
    if (!is_oma(scheme)) throw std::invalid_argument("oma_effective_throughput: scheme must be FDMA or TDMA");
    const OmaSplit split = oma_blocklengths(n, alpha);
    const UserSinrs g = scheme == Scheme::Fdma ? fdma_sinrs(p1, p2, alpha, sys) : tdma_sinrs(p1, p2, sys);
    const double a = alpha.value();
    const double r1 = std::max(0.0, oma_user_rate(split.n1, g.gamma1, a, ReliabilityTarget(s.eps11)));
    const double r2 = std::max(0.0, oma_user_rate(split.n2, g.gamma2, 1.0 - a, ReliabilityTarget(s.eps22)));
    return {(1.0 - s.eps11) * split.n1 * r1, (1.0 - s.eps22) * split.n2 * r2};
}

}  // namespace rsma
