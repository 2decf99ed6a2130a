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

// Brute-force minimum blocklength by power-grid search and integer bisection
// on n. Only the scalar primitives (Q^-1, dispersion, capacity) are shared
// with the library; SINRs, error cascades and throughputs are written out
// again here so that a mistake in the main code path is not reproduced.
//
// At a fixed n the grid search maximizes the normalized worst-user margin
// min_i (T_i - T_i^th) / T_i^th. A uniform grid with power_steps intervals
// per axis (endpoints included) is scanned first; with zoom_levels > 0 the
// best few cells are then refined by successively finer local grids.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/fbl.hpp"
#include "rsma/reliability.hpp"
#include "rsma/scheme.hpp"

namespace rsma {

struct GridSpec {
    int power_steps = 64;    // intervals per power axis
    double n_tol = 1.0;      // bisection tolerance on n (channel uses)
    int zoom_levels = 30;    // 0 = plain grid
    int zoom_candidates = 8; // coarse cells refined
    int zoom_steps = 16;     // intervals per axis of each local grid

    void validate() const {
        if (power_steps < 2) throw std::invalid_argument("GridSpec: power_steps must be >= 2");
        if (!(n_tol > 0.0)) throw std::invalid_argument("GridSpec: n_tol must be positive");
        if (zoom_levels < 0 || zoom_candidates < 1 || zoom_steps < 2)
            throw std::invalid_argument("GridSpec: invalid zoom settings");
    }
};

namespace oracle_detail {

struct Inputs {
    Scheme scheme;
    SystemParams sys;
    StreamReliability eps;
    ThroughputTargets targets;
    AlphaRule alpha_rule;
    double q11, q12, q22;  // Q^-1 of each stream error, computed once
};

inline double log2p1(double x) { return std::log2(1.0 + x); }

// Rate of one stream, clamped at zero.
inline double stream_rate(double n, double gamma, double q, double prelog = 1.0) {
    const double v = 1.0 - 1.0 / ((1.0 + gamma) * (1.0 + gamma));
    return std::max(0.0, prelog * log2p1(gamma) - std::sqrt(v / n) * q * kLog2e);
}

inline double user_margin(double t, double th) {
    return th > 0.0 ? (t - th) / th : std::numeric_limits<double>::infinity();
}

// Worst normalized margin at blocklength n for a point x of the scheme's
// power space: RSMA (p11, p12, p2), others (p1, p2). Out-of-budget points
// return -inf.
inline double margin_at(const Inputs& in, double n, const std::array<double, 3>& x) {
    const SystemParams& s = in.sys;
    const double pt = s.p_max;
    const double th1 = in.targets.t1_th, th2 = in.targets.t2_th;
    switch (in.scheme) {
        case Scheme::Rsma: {
            const double p11 = x[0], p12 = x[1], p2 = x[2];
            if (p11 + p12 > pt * (1.0 + 1e-12)) return -std::numeric_limits<double>::infinity();
            const double a = p11 * s.g1, b = p12 * s.g1, c = p2 * s.g2;
            const double g11 = a / (b + c + s.noise_var);
            const double g2 = c / (b + s.noise_var);
            const double g12 = b / s.noise_var;
            const double e1 = in.eps.eps11 + in.eps.eps12 + in.eps.eps22;
            const double e2 = in.eps.eps11 + in.eps.eps22;
            const double t1 = (1.0 - e1) * n * (stream_rate(n, g11, in.q11) + stream_rate(n, g12, in.q12));
            const double t2 = (1.0 - e2) * n * stream_rate(n, g2, in.q22);
            return std::min(user_margin(t1, th1), user_margin(t2, th2));
        }
        case Scheme::Noma12:
        case Scheme::Noma21: {
            const double a = x[0] * s.g1, c = x[1] * s.g2;
            const bool u1_first = in.scheme == Scheme::Noma12;
            const double g1 = u1_first ? a / (c + s.noise_var) : a / s.noise_var;
            const double g2 = u1_first ? c / s.noise_var : c / (a + s.noise_var);
            const double chained = in.eps.eps11 + in.eps.eps22;
            const double e1 = u1_first ? chained : in.eps.eps11;
            const double e2 = u1_first ? in.eps.eps22 : chained;
            const double t1 = (1.0 - e1) * n * stream_rate(n, g1, in.q11);
            const double t2 = (1.0 - e2) * n * stream_rate(n, g2, in.q22);
            return std::min(user_margin(t1, th1), user_margin(t2, th2));
        }
        case Scheme::Fdma:
        case Scheme::Tdma: {
            const double p1 = x[0], p2 = x[1];
            double alpha = in.alpha_rule.fixed;
            if (in.alpha_rule.kind == AlphaRule::Kind::PowerRatio) {
                if (!(p1 + p2 > 0.0)) return -std::numeric_limits<double>::infinity();
                alpha = p1 / (p1 + p2);
            }
            const double n1 = alpha * n, n2 = (1.0 - alpha) * n;
            // Per-user blocklength box, as a margin on the same normalized scale.
            double m = std::min({(n1 - s.n_min) / s.n_min, (n2 - s.n_min) / s.n_min, (s.n_max - n1) / s.n_max,
                                 (s.n_max - n2) / s.n_max});
            if (!(n1 > 0.0) || !(n2 > 0.0)) return -std::numeric_limits<double>::infinity();
            const bool fdma = in.scheme == Scheme::Fdma;
            const double g1 = p1 * s.g1 / ((fdma ? alpha : 1.0) * s.noise_var);
            const double g2 = p2 * s.g2 / ((fdma ? 1.0 - alpha : 1.0) * s.noise_var);
            const double t1 = (1.0 - in.eps.eps11) * n1 * stream_rate(n1, g1, in.q11, alpha);
            const double t2 = (1.0 - in.eps.eps22) * n2 * stream_rate(n2, g2, in.q22, 1.0 - alpha);
            m = std::min({m, user_margin(t1, th1), user_margin(t2, th2)});
            return m;
        }
    }
    return -std::numeric_limits<double>::infinity();
}

inline int power_dims(Scheme s) { return s == Scheme::Rsma ? 3 : 2; }

struct Cell {
    double margin;
    std::array<double, 3> x;
};

// Scan a box grid with `steps` intervals per axis; keep the best `keep` cells.
inline std::vector<Cell> scan(const Inputs& in, double n, const std::array<double, 3>& lo,
                              const std::array<double, 3>& hi, int steps, int keep) {
    const int dims = power_dims(in.scheme);
    std::vector<Cell> best;
    auto offer = [&](const Cell& c) {
        if (static_cast<int>(best.size()) < keep) {
            best.push_back(c);
        } else if (c.margin > best.back().margin) {
            best.back() = c;
        } else {
            return;
        }
        std::sort(best.begin(), best.end(), [](const Cell& a, const Cell& b) { return a.margin > b.margin; });
    };
    std::array<double, 3> x{0.0, 0.0, 0.0};
    auto coord = [&](int axis, int k) {
        return lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(k) / static_cast<double>(steps);
    };
    for (int i = 0; i <= steps; ++i) {
        x[0] = coord(0, i);
        for (int j = 0; j <= steps; ++j) {
            x[1] = coord(1, j);
            if (dims == 2) {
                const double m = margin_at(in, n, x);
                if (m >= 0.0) return {{m, x}};
                if (static_cast<int>(best.size()) < keep || m > best.back().margin) offer({m, x});
                continue;
            }
            for (int k = 0; k <= steps; ++k) {
                x[2] = coord(2, k);
                const double m = margin_at(in, n, x);
                if (m >= 0.0) return {{m, x}};
                if (static_cast<int>(best.size()) < keep || m > best.back().margin) offer({m, x});
            }
        }
    }
    return best;
}

inline bool feasible(const Inputs& in, double n, const GridSpec& g) {
    if (!(in.targets.t1_th > 0.0) && !(in.targets.t2_th > 0.0) && !is_oma(in.scheme)) return true;
    const double pt = in.sys.p_max;
    const std::array<double, 3> lo{0.0, 0.0, 0.0};
    const std::array<double, 3> hi{pt, pt, pt};
    const std::vector<Cell> coarse = scan(in, n, lo, hi, g.power_steps, g.zoom_candidates);
    if (!coarse.empty() && coarse.front().margin >= 0.0) return true;
    const int dims = power_dims(in.scheme);
    for (const Cell& start : coarse) {
        if (!std::isfinite(start.margin)) continue;
        Cell cur = start;
        double half = pt / g.power_steps;  // half-width of the local box
        for (int level = 0; level < g.zoom_levels; ++level) {
            std::array<double, 3> l{0.0, 0.0, 0.0}, h{0.0, 0.0, 0.0};
            for (int d = 0; d < dims; ++d) {
                l[d] = std::max(0.0, cur.x[d] - 4.0 * half);
                h[d] = std::min(pt, cur.x[d] + 4.0 * half);
            }
            const std::vector<Cell> local = scan(in, n, l, h, g.zoom_steps, 1);
            if (!local.empty() && local.front().margin >= cur.margin) cur = local.front();
            if (cur.margin >= 0.0) return true;
            half *= 8.0 / g.zoom_steps;
        }
    }
    return false;
}

inline Inputs make_inputs(Scheme scheme, const SystemParams& sys, const StreamReliability& eps,
                          const ThroughputTargets& targets, const AlphaRule& rule) {
    sys.validate();
    eps.validate();
    targets.validate();
    return {scheme, sys, eps, targets, rule, inverse_q(eps.eps11), inverse_q(eps.eps12), inverse_q(eps.eps22)};
}

// FNV-1a over the raw bytes of the inputs.
class Fnv1a {
public:
    void add(double v) {
        unsigned char b[sizeof(double)];
        std::memcpy(b, &v, sizeof(double));
        for (unsigned char c : b) {
            h_ ^= c;
            h_ *= 1099511628211ull;
        }
    }
    void add(int v) { add(static_cast<double>(v)); }
    [[nodiscard]] std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_ = 1469598103934665603ull;
};

inline std::uint64_t cache_key(const Inputs& in, const GridSpec& g) {
    Fnv1a h;
    h.add(static_cast<int>(in.scheme));
    for (double v : {in.sys.g1, in.sys.g2, in.sys.noise_var, in.sys.p_max, in.sys.n_min, in.sys.n_max, in.eps.eps11,
                     in.eps.eps12, in.eps.eps22, in.targets.t1_th, in.targets.t2_th, in.alpha_rule.fixed, g.n_tol})
        h.add(v);
    h.add(static_cast<int>(in.alpha_rule.kind));
    for (int v : {g.power_steps, g.zoom_levels, g.zoom_candidates, g.zoom_steps}) h.add(v);
    return h.value();
}

struct Cache {
    std::mutex mu;
    std::map<std::uint64_t, std::optional<double>> values;
};

inline Cache& cache() {
    static Cache c;
    return c;
}

}  // namespace oracle_detail

/// True iff some point of the scheme's power grid meets both exact
/// throughput targets at blocklength n (total blocklength for OMA).
inline bool oracle_feasible(double n, Scheme scheme, const SystemParams& sys, const StreamReliability& eps,
                            const ThroughputTargets& targets, const GridSpec& grid = {},
                            const AlphaRule& rule = AlphaRule::power_ratio()) {
    grid.validate();
    const auto in = oracle_detail::make_inputs(scheme, sys, eps, targets, rule);
    return oracle_detail::feasible(in, n, grid);
}

/// Smallest integer blocklength (within grid.n_tol) on [n_min, n_max] that
/// the grid search finds feasible; nullopt if infeasible at n_max. Results
/// are cached per input hash.
inline std::optional<double> oracle_min_blocklength(Scheme scheme, const SystemParams& sys,
                                                    const StreamReliability& eps, const ThroughputTargets& targets,
                                                    const GridSpec& grid = {},
                                                    const AlphaRule& rule = AlphaRule::power_ratio()) {
    grid.validate();
    const auto in = oracle_detail::make_inputs(scheme, sys, eps, targets, rule);
    const std::uint64_t key = oracle_detail::cache_key(in, grid);
    {
        auto& c = oracle_detail::cache();
        const std::lock_guard<std::mutex> lock(c.mu);
        if (auto it = c.values.find(key); it != c.values.end()) return it->second;
    }
    // OMA totals start at 2 n_min: each user needs at least n_min.
    double lo = std::ceil(is_oma(scheme) ? 2.0 * sys.n_min : sys.n_min);
    double hi = std::floor(is_oma(scheme) ? 2.0 * sys.n_max : sys.n_max);
    std::optional<double> result;
    if (oracle_detail::feasible(in, lo, grid)) {
        result = lo;
    } else if (oracle_detail::feasible(in, hi, grid)) {
        while (hi - lo > grid.n_tol) {
            const double mid = std::floor(0.5 * (lo + hi));
            (oracle_detail::feasible(in, mid, grid) ? hi : lo) = mid;
        }
        result = hi;
    }
    auto& c = oracle_detail::cache();
    const std::lock_guard<std::mutex> lock(c.mu);
    c.values[key] = result;
    return result;
}

/// Scalar check for a single active user with SINR gamma: smallest n in
/// [n_min, n_max] with (1 - eps_msg) n max(R(n), 0) >= target, by bisection
/// to within `tol`; nullopt if unreachable at n_max.
inline std::optional<double> single_user_min_blocklength(double gamma, double eps_msg, double eps_stream,
                                                         double target, const SystemParams& sys,
                                                         double tol = 1e-9) {
    const double q = inverse_q(eps_stream);
    auto ok = [&](double n) { return (1.0 - eps_msg) * n * oracle_detail::stream_rate(n, gamma, q) >= target; };
    if (ok(sys.n_min)) return sys.n_min;
    if (!ok(sys.n_max)) return std::nullopt;
    double lo = sys.n_min, hi = sys.n_max;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace rsma
