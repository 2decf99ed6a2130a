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

// Achievable rate regions at fixed per-user power budgets, without time
// sharing. The RSMA region is traced by the power split of U1 between s11 and
// s12; NOMA curves by backing off the power of the user decoded first's
// interferer; OMA curves by the resource fraction.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/fbl.hpp"
#include "rsma/reliability.hpp"
#include "rsma/scheme.hpp"

namespace rsma {

struct RatePoint {
    double r1 = 0.0;
    double r2 = 0.0;
};

/// One sample of a parametric sweep; `param` is the sweep coordinate
/// (split fraction, power back-off fraction or OMA fraction).
struct SweptPoint {
    double param = 0.0;
    RatePoint rate;
};

/// Upper-right frontier of a region: r1 ascending, r2 non-increasing.
struct RegionBoundary {
    std::vector<RatePoint> points;
    std::string scheme;
    double n = kInfiniteBlocklength;

    [[nodiscard]] bool is_ibl() const noexcept { return std::isinf(n); }
};

inline constexpr int kDefaultRegionPoints = 201;

/// Pareto frontier of a point cloud, sorted by r1 ascending.
inline RegionBoundary pareto_boundary(std::vector<RatePoint> pts, std::string scheme, double n) {
    std::sort(pts.begin(), pts.end(), [](const RatePoint& a, const RatePoint& b) {
        return a.r1 != b.r1 ? a.r1 > b.r1 : a.r2 > b.r2;
    });
    RegionBoundary out{{}, std::move(scheme), n};
    double best_r2 = -1.0;
    for (const RatePoint& p : pts) {
        if (p.r2 > best_r2) {
            out.points.push_back(p);
            best_r2 = p.r2;
        }
    }
    std::reverse(out.points.begin(), out.points.end());
    return out;
}

inline RegionBoundary pareto_boundary(const std::vector<SweptPoint>& sweep, std::string scheme, double n) {
    std::vector<RatePoint> pts;
    pts.reserve(sweep.size());
    for (const auto& s : sweep) pts.push_back(s.rate);
    return pareto_boundary(std::move(pts), std::move(scheme), n);
}

/// Gaussian MAC capacity pentagon at powers (P1, P2): the four frontier
/// vertices from the U2 axis to the U1 axis.
inline RegionBoundary ibl_mac_pentagon(double p1, double p2, const SystemParams& sys) {
    const AggregateSinrs agg = aggregate_sinrs({p1, 0.0, p2}, sys);
    const double c1_alone = shannon_capacity(p1 * sys.g1 / sys.noise_var);
    const double c2_alone = shannon_capacity(p2 * sys.g2 / sys.noise_var);
    return {{{0.0, c2_alone},
             {shannon_capacity(agg.gamma1), c2_alone},
             {c1_alone, shannon_capacity(agg.gamma2)},
             {c1_alone, 0.0}},
            "ibl_mac",
            kInfiniteBlocklength};
}

namespace detail {

inline void require_points(int num_points) {
    if (num_points < 2) throw std::invalid_argument("region sweep needs at least two points");
}

inline double sweep_fraction(int k, int num_points) {
    return static_cast<double>(k) / static_cast<double>(num_points - 1);
}

}  // namespace detail

/// RSMA rate pair at a given split: clamped stream rates, U1 = s11 + s12.
inline RatePoint rsma_rate_point(double n, const PowerAllocation& p, const SystemParams& sys,
                                 const StreamReliability& s) {
    const RsmaSinrs g = rsma_sinrs(p, sys);
    return {fbl_rate_clamped(n, g.gamma11, ReliabilityTarget(s.eps11)) +
                fbl_rate_clamped(n, g.gamma12, ReliabilityTarget(s.eps12)),
            fbl_rate_clamped(n, g.gamma22, ReliabilityTarget(s.eps22))};
}

/// Sweep beta in [0, 1] with p11 = beta P1, p12 = (1 - beta) P1, p2 = P2.
/// beta = 1 is NOMA-12, beta = 0 the NOMA-21 equivalent.
inline std::vector<SweptPoint> rsma_fbl_sweep(double n, double p1_total, double p2, const SystemParams& sys,
                                              const StreamReliability& s, int num_points = kDefaultRegionPoints) {
    detail::require_blocklength(n, "rsma_fbl_sweep");
    detail::require_points(num_points);
    std::vector<SweptPoint> out;
    out.reserve(static_cast<std::size_t>(num_points));
    for (int k = 0; k < num_points; ++k) {
        const double beta = detail::sweep_fraction(k, num_points);
        out.push_back({beta, rsma_rate_point(n, {beta * p1_total, (1.0 - beta) * p1_total, p2}, sys, s)});
    }
    return out;
}

inline RegionBoundary rsma_fbl_boundary(double n, double p1_total, double p2, const SystemParams& sys,
                                        const StreamReliability& s, int num_points = kDefaultRegionPoints) {
    return pareto_boundary(rsma_fbl_sweep(n, p1_total, p2, sys, s, num_points), "rsma", n);
}

/// NOMA corner at full powers.
inline RatePoint noma_fbl_point(double n, double p1, double p2, const SystemParams& sys,
                                const StreamReliability& s, DecodeOrder order) {
    const UserSinrs g = noma_sinrs(p1, p2, sys, order);
    return {fbl_rate_clamped(n, g.gamma1, ReliabilityTarget(s.eps11)),
            fbl_rate_clamped(n, g.gamma2, ReliabilityTarget(s.eps22))};
}

/// NOMA power-swept curve: the interfering user of the first-decoded stream
/// backs off its power by `param` in [0, 1]; param = 1 is the corner.
inline std::vector<SweptPoint> noma_fbl_sweep(double n, double p1, double p2, const SystemParams& sys,
                                              const StreamReliability& s, DecodeOrder order,
                                              int num_points = kDefaultRegionPoints) {
    detail::require_blocklength(n, "noma_fbl_sweep");
    detail::require_points(num_points);
    std::vector<SweptPoint> out;
    out.reserve(static_cast<std::size_t>(num_points));
    for (int k = 0; k < num_points; ++k) {
        const double f = detail::sweep_fraction(k, num_points);
        const RatePoint r = order == DecodeOrder::U1First ? noma_fbl_point(n, p1, f * p2, sys, s, order)
                                                          : noma_fbl_point(n, f * p1, p2, sys, s, order);
        out.push_back({f, r});
    }
    return out;
}

/// OMA rate pair (per-user rate expressions with pre-log share and per-user
/// blocklength alpha n, (1 - alpha) n), clamped at zero.
inline RatePoint oma_rate_point(double n, double p1, double p2, OmaFraction alpha, const SystemParams& sys,
                                const StreamReliability& s, Scheme scheme) {
    if (!is_oma(scheme)) throw std::invalid_argument("oma_rate_point: scheme must be FDMA or TDMA");
    const OmaSplit split = std::isinf(n) ? OmaSplit{n, n} : oma_blocklengths(n, alpha);
    const UserSinrs g = scheme == Scheme::Fdma ? fdma_sinrs(p1, p2, alpha, sys) : tdma_sinrs(p1, p2, sys);
    const double a = alpha.value();
    return {std::max(0.0, oma_user_rate(split.n1, g.gamma1, a, ReliabilityTarget(s.eps11))),
            std::max(0.0, oma_user_rate(split.n2, g.gamma2, 1.0 - a, ReliabilityTarget(s.eps22)))};
}

/// OMA operating point(s) at full powers. With sweep_points == 0 only the
/// point under `rule` is returned; otherwise alpha is swept over the open
/// interval (0, 1) to trace the OMA curve.
inline std::vector<SweptPoint> oma_fbl_points(double n, double p1, double p2, const SystemParams& sys,
                                              const StreamReliability& s, Scheme scheme, const AlphaRule& rule,
                                              int sweep_points = 0) {
    detail::require_blocklength(n, "oma_fbl_points");
    std::vector<SweptPoint> out;
    if (sweep_points == 0) {
        const OmaFraction a = rule.resolve(p1, p2);
        out.push_back({a.value(), oma_rate_point(n, p1, p2, a, sys, s, scheme)});
        return out;
    }
    detail::require_points(sweep_points);
    out.reserve(static_cast<std::size_t>(sweep_points));
    for (int k = 0; k < sweep_points; ++k) {
        const OmaFraction a((k + 1.0) / (sweep_points + 1.0));
        out.push_back({a.value(), oma_rate_point(n, p1, p2, a, sys, s, scheme)});
    }
    return out;
}

inline void validate_boundary(const RegionBoundary& b) {
    if (b.points.empty()) throw std::invalid_argument("region boundary is empty");
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const RatePoint& p = b.points[i];
        if (!(p.r1 >= 0.0) || !(p.r2 >= 0.0))
            throw std::invalid_argument("region boundary has a negative or NaN rate");
        if (i > 0 && (p.r1 < b.points[i - 1].r1 || p.r2 > b.points[i - 1].r2))
            throw std::invalid_argument("region boundary must have r1 ascending and r2 non-increasing");
    }
}

/// Weak containment in the region enclosed by the axes and the piecewise
/// linear frontier, with tolerance `tol` on both coordinates.
inline bool region_contains(const RegionBoundary& outer, const RatePoint& point, double tol = 1e-9) {
    validate_boundary(outer);
    const auto& pts = outer.points;
    if (point.r1 > pts.back().r1 + tol) return false;
    double ceiling = pts.front().r2;
    if (point.r1 > pts.front().r1) {
        ceiling = pts.back().r2;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (point.r1 <= pts[i].r1) {
                const RatePoint& a = pts[i - 1];
                const RatePoint& b = pts[i];
                const double w = b.r1 > a.r1 ? (point.r1 - a.r1) / (b.r1 - a.r1) : 1.0;
                ceiling = a.r2 + w * (b.r2 - a.r2);
                break;
            }
        }
    }
    return point.r2 <= ceiling + tol;
}

}  // namespace rsma
