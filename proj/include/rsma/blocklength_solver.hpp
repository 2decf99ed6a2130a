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

// Blocklength minimization under per-user effective-throughput targets.
//
// RSMA and NOMA share one successive-convex-approximation engine over the SIC
// chain s11 -> s2 -> s12 (NOMA-12 keeps only s11 and s2, NOMA-21 only s2 and
// s12). Each outer iteration linearizes the throughput and SINR constraints
// around the current powers, then solves the convexified subproblem by
// bisection on n, where for fixed n the constraint set in (P, delta, tau) is
// a convex feasibility problem decided by MarginBarrier. A trust region on
// delta guards the non-conservative SINR linearization; candidates are
// accepted only if they lower the exact (non-linearized) blocklength.
//
// OMA (FDMA/TDMA) reduces to a one-dimensional search over the resource
// fraction because both per-user throughputs grow when both powers are
// scaled up together.
//
// Every reported blocklength is recomputed from the exact throughput
// expressions at the reported powers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/fbl.hpp"
#include "rsma/linearization.hpp"
#include "rsma/margin_barrier.hpp"
#include "rsma/reliability.hpp"
#include "rsma/scheme.hpp"

namespace rsma {

/// Which error probability sets the dispersion penalty inside the
/// linearized throughput constraints.
enum class PenaltyConvention {
    MessageLevel,  // Q^-1 of the message error of the user (default)
    PerStream,     // Q^-1 of each stream's own error, as in the exact throughput
};

enum class SolveStatus { Converged, MaxIters, Infeasible };

inline constexpr std::string_view to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIters: return "max-iters";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

struct SolverConfig {
    double xi = 1e-3;              // stop when the blocklength moves by at most xi
    int max_outer_iters = 200;
    double n_init = 1e6;           // upper end of the first blocklength search
    double n_resolution = 1e-4;    // bisection resolution on n inside a subproblem
    double rho_init = 0.5;         // trust region |delta - delta_ref| <= rho delta_ref
    double rho_max = 64.0;
    double rho_min = 1e-9;
    double snap_fraction = 1e-3;   // near-boundary powers tried at the boundary before reporting
    PenaltyConvention penalty = PenaltyConvention::MessageLevel;
    AlphaRule alpha_rule = AlphaRule::power_ratio();
    bool force_p12_zero = false;   // RSMA restricted to p12 = 0 (NOMA-12 structure)
    bool exact_refinement = true;  // rerun the iteration with per-stream penalties from the result
    MarginBarrierOptions barrier{};

    void validate() const {
        if (!(xi > 0.0)) throw std::invalid_argument("SolverConfig: xi must be positive");
        if (max_outer_iters < 1) throw std::invalid_argument("SolverConfig: max_outer_iters must be >= 1");
        if (!(n_init > 0.0)) throw std::invalid_argument("SolverConfig: n_init must be positive");
        if (!(n_resolution > 0.0)) throw std::invalid_argument("SolverConfig: n_resolution must be positive");
        if (!(rho_init > 0.0) || !(rho_max >= rho_init))
            throw std::invalid_argument("SolverConfig: need 0 < rho_init <= rho_max");
    }
};

struct SolveReport {
    Scheme scheme = Scheme::Rsma;
    double n_star = std::numeric_limits<double>::infinity();  // real-valued minimum
    long n_star_int = 0;                                      // reported integer blocklength
    PowerAllocation powers;  // NOMA-12: P1 in p11; NOMA-21: P1 in p12; OMA: P1 in p11
    double alpha = std::numeric_limits<double>::quiet_NaN();  // OMA only
    long n1_int = 0;                                          // OMA per-user blocklengths
    long n2_int = 0;
    SlackState slacks;
    int iterations = 0;
    std::vector<double> trace;
    std::vector<std::string> events;
    SolveStatus status = SolveStatus::Infeasible;

    [[nodiscard]] double p1() const noexcept { return powers.p1(); }
    [[nodiscard]] double p2() const noexcept { return powers.p2; }
};

/// Original (non-linearized) RSMA constraints: power budgets, blocklength
/// box and T_i >= T_i^th with the exact effective throughput.
inline bool exact_constraints_satisfied(double n, const PowerAllocation& p, const SystemParams& sys,
                                        const StreamReliability& s, const ThroughputTargets& targets,
                                        double tol = 1e-6) {
    if (!p.valid_for(sys, 1e-9)) return false;
    if (n < sys.n_min - tol || n > sys.n_max + tol) return false;
    const ThroughputPair t = rsma_effective_throughput(n, p, sys, s);
    return t.t1 >= targets.t1_th - tol && t.t2 >= targets.t2_th - tol;
}

/// Per-user OMA throughput (1 - eps) n_i max(0, prelog C - sqrt(V / n_i) Q^-1 log2 e).
inline double oma_user_throughput(double n_user, double gamma, double prelog, ReliabilityTarget eps) {
    return (1.0 - eps.value()) * n_user * std::max(0.0, oma_user_rate(n_user, gamma, prelog, eps));
}

namespace detail {

// SIC-chain description shared by RSMA and NOMA.
struct ChainModel {
    Scheme scheme = Scheme::Rsma;
    bool has11 = true;
    bool has12 = true;
    double eps11 = 1e-6;  // per-stream error of the stream in position s11 / s12 / s2
    double eps12 = 1e-6;
    double eps22 = 1e-6;
    MessageErrors msg;
    double q11 = 0.0;  // Q^-1 used inside the linearized penalty
    double q12 = 0.0;
    double q22 = 0.0;
};

inline ChainModel make_chain(Scheme scheme, const StreamReliability& s, const SolverConfig& cfg) {
    ChainModel m;
    m.scheme = scheme;
    switch (scheme) {
        case Scheme::Rsma:
            m.has12 = !cfg.force_p12_zero;
            m.eps11 = s.eps11;
            m.eps12 = s.eps12;
            m.eps22 = s.eps22;
            m.msg = rsma_message_errors(s, false);
            break;
        case Scheme::Noma12:
            m.has12 = false;
            m.eps11 = s.eps11;
            m.eps22 = s.eps22;
            m.msg = noma_message_errors(s.eps11, s.eps22, DecodeOrder::U1First);
            break;
        case Scheme::Noma21:
            // U1 decoded last: its single stream sits in the s12 position.
            m.has11 = false;
            m.eps12 = s.eps11;
            m.eps22 = s.eps22;
            m.msg = noma_message_errors(s.eps11, s.eps22, DecodeOrder::U2First);
            break;
        default: throw std::invalid_argument("make_chain: OMA schemes have no SIC chain");
    }
    if (cfg.penalty == PenaltyConvention::MessageLevel) {
        m.q11 = m.q12 = inverse_q(m.msg.eps1);
        m.q22 = inverse_q(m.msg.eps2);
    } else {
        m.q11 = inverse_q(m.eps11);
        m.q12 = inverse_q(m.eps12);
        m.q22 = inverse_q(m.eps22);
    }
    return m;
}

// Smallest n >= 0 with (1 - e)(A n - B sqrt(n)) >= T for A, B >= 0.
inline double required_blocklength(double capacity_sum, double penalty_sum, double one_minus_eps, double target) {
    if (target <= 0.0) return 0.0;
    const double a = one_minus_eps * capacity_sum;
    const double b = one_minus_eps * penalty_sum;
    if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
    const double x = (b + std::sqrt(b * b + 4.0 * a * target)) / (2.0 * a);
    return x * x;
}

// Blocklength required by the model the linearization approximates:
// unclamped stream rates with the configured penalty convention.
inline double model_blocklength(const ChainModel& m, const PowerAllocation& p, const SystemParams& sys,
                                const ThroughputTargets& targets) {
    const RsmaSinrs g = rsma_sinrs(p, sys);
    double cap1 = 0.0, pen1 = 0.0;
    if (m.has11) {
        cap1 += shannon_capacity(g.gamma11);
        pen1 += std::sqrt(channel_dispersion(g.gamma11)) * m.q11 * kLog2e;
    }
    if (m.has12) {
        cap1 += shannon_capacity(g.gamma12);
        pen1 += std::sqrt(channel_dispersion(g.gamma12)) * m.q12 * kLog2e;
    }
    const double n1 = required_blocklength(cap1, pen1, 1.0 - m.msg.eps1, targets.t1_th);
    const double n2 = required_blocklength(shannon_capacity(g.gamma22),
                                           std::sqrt(channel_dispersion(g.gamma22)) * m.q22 * kLog2e,
                                           1.0 - m.msg.eps2, targets.t2_th);
    return std::max({sys.n_min, n1, n2});
}

// Exact effective throughput of the scheme the chain represents.
inline ThroughputPair chain_throughput(const ChainModel& m, double n, const PowerAllocation& p,
                                       const SystemParams& sys, const StreamReliability& s) {
    switch (m.scheme) {
        case Scheme::Rsma: return rsma_effective_throughput(n, p, sys, s);
        case Scheme::Noma12: return noma_effective_throughput(n, p.p1(), p.p2, sys, s, DecodeOrder::U1First);
        case Scheme::Noma21: return noma_effective_throughput(n, p.p1(), p.p2, sys, s, DecodeOrder::U2First);
        default: throw std::invalid_argument("chain_throughput: not a SIC scheme");
    }
}

// Smallest n in [n_min, n_max] meeting both exact targets (+inf if none).
// Throughput with clamped rates is non-decreasing in n, so bisection applies.
template <typename Feasible>
double smallest_feasible_blocklength(const SystemParams& sys, Feasible&& feasible) {
    if (feasible(sys.n_min)) return sys.n_min;
    if (!feasible(sys.n_max)) return std::numeric_limits<double>::infinity();
    double lo = sys.n_min, hi = sys.n_max;
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline double exact_chain_blocklength(const ChainModel& m, const PowerAllocation& p, const SystemParams& sys,
                                      const StreamReliability& s, const ThroughputTargets& targets) {
    return smallest_feasible_blocklength(sys, [&](double n) {
        const ThroughputPair t = chain_throughput(m, n, p, sys, s);
        return t.t1 >= targets.t1_th && t.t2 >= targets.t2_th;
    });
}

// Variable layout of the convexified subproblem. Powers are scaled by p_max,
// each delta by its reference value, and tau is in rate units (bits per
// channel use of the user's message).
struct SubproblemLayout {
    int p11 = -1, p12 = -1, p2 = -1;
    int d11 = -1, d12 = -1, d22 = -1;
    int t11 = -1, t12 = -1;
    int dim = 0;
};

inline SubproblemLayout make_layout(const ChainModel& m, const ThroughputTargets& targets) {
    SubproblemLayout l;
    auto take = [&l] { return l.dim++; };
    const bool need1 = targets.t1_th > 0.0;
    const bool need2 = targets.t2_th > 0.0;
    if (m.has11) l.p11 = take();
    if (m.has12) l.p12 = take();
    l.p2 = take();
    if (need1 && m.has11) l.d11 = take();
    if (need1 && m.has12) l.d12 = take();
    if (need2) l.d22 = take();
    if (need1 && m.has11) l.t11 = take();
    if (need1 && m.has12) l.t12 = take();
    return l;
}

inline SlackState reference_from_powers(const PowerAllocation& p, const SystemParams& sys, double n) {
    const RsmaSinrs g = rsma_sinrs(p, sys);
    SlackState ref;
    ref.powers = p;
    ref.delta11 = std::max(g.gamma11, kDeltaRefFloor);
    ref.delta12 = std::max(g.gamma12, kDeltaRefFloor);
    ref.delta22 = std::max(g.gamma22, kDeltaRefFloor);
    ref.n = n;
    return ref;
}

class Subproblem {
public:
    Subproblem(const ChainModel& m, const SlackState& ref, const SystemParams& sys, const ThroughputTargets& targets,
               double rho, const MarginBarrierOptions& opts)
        : m_(m), ref_(ref), sys_(sys), targets_(targets), rho_(rho), layout_(make_layout(m, targets)),
          barrier_(opts) {}

    [[nodiscard]] const SubproblemLayout& layout() const noexcept { return layout_; }

    [[nodiscard]] std::vector<LogAffineConstraint> constraints(double n) const {
        const SubproblemLayout& l = layout_;
        const double pt = sys_.p_max;
        std::vector<LogAffineConstraint> cons;
        auto affine = [&]() {
            LogAffineConstraint c;
            c.a = Eigen::VectorXd::Zero(l.dim);
            return c;
        };
        auto push_affine = [&](LogAffineConstraint c) {
            c.normalize();
            cons.push_back(std::move(c));
        };

        // Power box (13b), (13c) and non-negativity.
        for (int idx : {l.p11, l.p12, l.p2}) {
            if (idx < 0) continue;
            auto c = affine();
            c.a[idx] = -1.0;
            push_affine(std::move(c));
        }
        {
            auto c = affine();
            if (l.p11 >= 0) c.a[l.p11] = 1.0;
            if (l.p12 >= 0) c.a[l.p12] = 1.0;
            c.b = -1.0;
            push_affine(std::move(c));
        }
        {
            auto c = affine();
            c.a[l.p2] = 1.0;
            c.b = -1.0;
            push_affine(std::move(c));
        }

        // Slack bounds and the trust region around the reference.
        auto delta_box = [&](int idx) {
            if (idx < 0) return;
            auto lo = affine();
            lo.a[idx] = -1.0;
            push_affine(std::move(lo));
            auto hi = affine();
            hi.a[idx] = 1.0;
            hi.b = -(1.0 + rho_);
            push_affine(std::move(hi));
            if (rho_ < 1.0) {
                auto tr = affine();
                tr.a[idx] = -1.0;
                tr.b = 1.0 - rho_;
                push_affine(std::move(tr));
            }
        };
        delta_box(l.d11);
        delta_box(l.d12);
        delta_box(l.d22);

        // Linearized SINR constraints; the s12 bound is already affine.
        if (l.d11 >= 0) {
            const AffineSinrConstraint s = linearize_sinr(SinrConstraint::Gamma11AtLeastDelta11, ref_, sys_);
            auto c = affine();
            c.a[l.p11] = s.c11 * pt;
            if (l.p12 >= 0) c.a[l.p12] = s.c12 * pt;
            c.a[l.p2] = s.c2 * pt;
            c.a[l.d11] = s.cd * ref_.delta11;
            c.b = s.c0;
            push_affine(std::move(c));
        }
        if (l.d12 >= 0) {
            auto c = affine();
            c.a[l.d12] = ref_.delta12;
            c.a[l.p12] = -pt * sys_.g1 / sys_.noise_var;
            push_affine(std::move(c));
        }
        if (l.d22 >= 0) {
            const AffineSinrConstraint s = linearize_sinr(SinrConstraint::Gamma22AtLeastDelta22, ref_, sys_);
            auto c = affine();
            if (l.p12 >= 0) c.a[l.p12] = s.c12 * pt;
            c.a[l.p2] = s.c2 * pt;
            c.a[l.d22] = s.cd * ref_.delta22;
            c.b = s.c0;
            push_affine(std::move(c));
        }

        // Linearized throughput constraints, in rate units.
        const double f1 = (1.0 - m_.msg.eps1) * n;
        const double f2 = (1.0 - m_.msg.eps2) * n;
        auto rate_cons = [&](int d_idx, int t_idx, double dref, double q, double rhs) {
            const double e = q * kLog2e / std::sqrt(n);
            const double nu = dispersion_factor(dref);
            const double slope = dispersion_factor_slope(dref);
            // -log2(1 + d) + e (nu + (d - dref) slope) + tau (or rhs) <= 0, d = dref x
            LogAffineConstraint c = affine();
            c.a[d_idx] = e * slope * dref;
            c.b = e * (nu - dref * slope);
            c.log_scale = dref;
            if (t_idx >= 0)
                c.a[t_idx] = 1.0;
            else
                c.b += rhs;
            c.c = 1.0;
            c.log_index = d_idx;
            cons.push_back(std::move(c));
        };
        if (targets_.t1_th > 0.0) {
            if (l.d11 >= 0) rate_cons(l.d11, l.t11, ref_.delta11, m_.q11, 0.0);
            if (l.d12 >= 0) rate_cons(l.d12, l.t12, ref_.delta12, m_.q12, 0.0);
            LogAffineConstraint sum = affine();
            if (l.t11 >= 0) sum.a[l.t11] = -1.0;
            if (l.t12 >= 0) sum.a[l.t12] = -1.0;
            sum.b = targets_.t1_th / f1;
            cons.push_back(std::move(sum));
        }
        if (targets_.t2_th > 0.0) rate_cons(l.d22, -1, ref_.delta22, m_.q22, targets_.t2_th / f2);
        return cons;
    }

    [[nodiscard]] Eigen::VectorXd start_point(double n) const {
        const SubproblemLayout& l = layout_;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(l.dim);
        const double pt = sys_.p_max;
        if (l.p11 >= 0) x[l.p11] = ref_.powers.p11 / pt;
        if (l.p12 >= 0) x[l.p12] = ref_.powers.p12 / pt;
        x[l.p2] = ref_.powers.p2 / pt;
        const RsmaSinrs g = rsma_sinrs(ref_.powers, sys_);
        if (l.d11 >= 0) x[l.d11] = g.gamma11 / ref_.delta11;
        if (l.d12 >= 0) x[l.d12] = g.gamma12 / ref_.delta12;
        if (l.d22 >= 0) x[l.d22] = g.gamma22 / ref_.delta22;
        auto surrogate_rate = [&](double d, double dref, double q) {
            const double e = q * kLog2e / std::sqrt(n);
            return std::log2(1.0 + d) - e * (dispersion_factor(dref) + (d - dref) * dispersion_factor_slope(dref));
        };
        if (l.t11 >= 0) x[l.t11] = surrogate_rate(g.gamma11, ref_.delta11, m_.q11);
        if (l.t12 >= 0) x[l.t12] = surrogate_rate(g.gamma12, ref_.delta12, m_.q12);
        return x;
    }

    [[nodiscard]] MarginResult solve_at(double n, MarginGoal goal) const {
        return barrier_.solve(constraints(n), start_point(n), goal);
    }

    [[nodiscard]] bool feasible_at(double n) const { return solve_at(n, MarginGoal::Decide).margin >= 0.0; }

    [[nodiscard]] SlackState unpack(const Eigen::VectorXd& x, double n) const {
        const SubproblemLayout& l = layout_;
        const double pt = sys_.p_max;
        SlackState st;
        auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
        st.powers.p11 = l.p11 >= 0 ? clamp01(x[l.p11]) * pt : 0.0;
        st.powers.p12 = l.p12 >= 0 ? clamp01(x[l.p12]) * pt : 0.0;
        if (st.powers.p11 + st.powers.p12 > pt) {
            const double k = pt / (st.powers.p11 + st.powers.p12);
            st.powers.p11 *= k;
            st.powers.p12 *= k;
        }
        st.powers.p2 = clamp01(x[l.p2]) * pt;
        st.delta11 = l.d11 >= 0 ? std::max(0.0, x[l.d11]) * ref_.delta11 : 0.0;
        st.delta12 = l.d12 >= 0 ? std::max(0.0, x[l.d12]) * ref_.delta12 : 0.0;
        st.delta22 = l.d22 >= 0 ? std::max(0.0, x[l.d22]) * ref_.delta22 : 0.0;
        const double f1 = (1.0 - m_.msg.eps1) * n;
        st.tau11 = l.t11 >= 0 ? x[l.t11] * f1 : 0.0;
        st.tau12 = l.t12 >= 0 ? x[l.t12] * f1 : 0.0;
        st.n = n;
        return st;
    }

private:
    ChainModel m_;
    SlackState ref_;
    SystemParams sys_;
    ThroughputTargets targets_;
    double rho_;
    SubproblemLayout layout_;
    MarginBarrier barrier_;
};

// Minimum n of the convexified subproblem over [n_min, n_upper], or nullopt
// if it is infeasible even at n_upper.
inline std::optional<SlackState> solve_subproblem(const ChainModel& m, const SlackState& ref, const SystemParams& sys,
                                                  const ThroughputTargets& targets, double rho, double n_upper,
                                                  const SolverConfig& cfg) {
    const Subproblem sub(m, ref, sys, targets, rho, cfg.barrier);
    double lo = sys.n_min;
    double hi = std::max(n_upper, sys.n_min);
    if (sub.feasible_at(lo)) {
        hi = lo;
    } else {
        if (!sub.feasible_at(hi)) return std::nullopt;
        while (hi - lo > cfg.n_resolution) {
            const double mid = 0.5 * (lo + hi);
            (sub.feasible_at(mid) ? hi : lo) = mid;
        }
    }
    const MarginResult best = sub.solve_at(hi, MarginGoal::Maximize);
    return sub.unpack(best.x, hi);
}

inline PowerAllocation initial_powers(const ChainModel& m, double pt) {
    if (m.has11 && m.has12) return {0.5 * pt, 0.5 * pt, pt};
    if (m.has11) return {pt, 0.0, pt};
    return {0.0, pt, pt};
}

// Boundary variants of p worth checking exactly before reporting.
inline std::vector<PowerAllocation> boundary_variants(const ChainModel& m, const PowerAllocation& p, double pt,
                                                      double snap) {
    std::vector<PowerAllocation> u1{p};
    if (m.has11 && m.has12) {
        if (p.p12 <= snap * pt) u1.push_back({p.p11 + p.p12, 0.0, p.p2});
        if (p.p11 <= snap * pt) u1.push_back({0.0, p.p11 + p.p12, p.p2});
    }
    std::vector<PowerAllocation> out;
    for (const PowerAllocation& q : u1) {
        std::vector<PowerAllocation> level{q};
        const double p1 = q.p1();
        if (p1 > 0.0 && p1 < pt && p1 >= (1.0 - snap) * pt) level.push_back({q.p11 * pt / p1, q.p12 * pt / p1, q.p2});
        for (const PowerAllocation& r : level) {
            out.push_back(r);
            if (r.p2 < pt && r.p2 >= (1.0 - snap) * pt) out.push_back({r.p11, r.p12, pt});
        }
    }
    return out;
}

inline long reported_integer_blocklength(double n_star, const std::function<bool(double)>& feasible) {
    long n = static_cast<long>(std::ceil(n_star - 1e-7));
    if (!feasible(static_cast<double>(n))) ++n;
    return n;
}

inline SolveReport infeasible_report(Scheme scheme, std::string why) {
    SolveReport r;
    r.scheme = scheme;
    r.status = SolveStatus::Infeasible;
    r.events.push_back(std::move(why));
    return r;
}

inline ChainModel with_per_stream_penalty(ChainModel m) {
    m.q11 = inverse_q(m.eps11);
    m.q12 = inverse_q(m.eps12);
    m.q22 = inverse_q(m.eps22);
    return m;
}

struct ScaRun {
    PowerAllocation powers;
    SlackState state;
    double merit = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::vector<double> trace;
    std::vector<std::string> events;
    SolveStatus status = SolveStatus::MaxIters;
};

// Outer loop: linearize at the current powers, solve the subproblem, keep
// the candidate only if the exact model blocklength improves.
inline ScaRun run_sca(const ChainModel& m, const PowerAllocation& start, const SystemParams& sys,
                      const ThroughputTargets& targets, const SolverConfig& cfg) {
    ScaRun run;
    run.powers = start;
    run.merit = model_blocklength(m, start, sys, targets);
    run.state = reference_from_powers(start, sys, std::min(run.merit, cfg.n_init));
    run.trace.push_back(cfg.n_init);
    double rho = cfg.rho_init;
    auto note = [&run](int it, const char* what) {
        run.events.push_back("iteration " + std::to_string(it) + ": " + what);
    };
    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
        run.iterations = it;
        const double n_upper =
            std::isfinite(run.merit) ? std::max(sys.n_max, run.merit * (1.0 + 1e-6) + 1e-6) : cfg.n_init;
        const SlackState ref = reference_from_powers(run.powers, sys, std::min(run.merit, cfg.n_init));
        const std::optional<SlackState> cand = solve_subproblem(m, ref, sys, targets, rho, n_upper, cfg);
        if (!cand) {
            run.trace.push_back(run.merit);
            if (rho >= cfg.rho_max) {
                note(it, "subproblem infeasible at the largest trust region");
                run.status = SolveStatus::Infeasible;
                return run;
            }
            rho = std::min(2.0 * rho, cfg.rho_max);
            note(it, "subproblem infeasible, trust region enlarged");
            continue;
        }
        const double cand_merit = model_blocklength(m, cand->powers, sys, targets);
        const bool stationary = run.merit - cand->n <= cfg.xi;
        if (cand_merit < run.merit) {
            const double step = run.merit - cand_merit;
            if (cand_merit <= cand->n * (1.0 + 1e-6)) rho = std::min(2.0 * rho, cfg.rho_max);
            run.powers = cand->powers;
            run.merit = cand_merit;
            run.state = *cand;
            run.trace.push_back(run.merit);
            if (step <= cfg.xi || stationary) {
                run.status = SolveStatus::Converged;
                return run;
            }
        } else {
            run.trace.push_back(run.merit);
            if (stationary) {
                run.status = SolveStatus::Converged;
                return run;
            }
            rho *= 0.5;
            note(it, "step rejected by the exact check, trust region halved");
            if (rho < cfg.rho_min) {
                note(it, "trust region collapsed");
                run.status = SolveStatus::Converged;
                return run;
            }
        }
    }
    run.status = SolveStatus::MaxIters;
    return run;
}

inline SolveReport minimize_chain(Scheme scheme, const SystemParams& sys, const StreamReliability& s,
                                  const ThroughputTargets& targets, const SolverConfig& cfg) {
    sys.validate();
    s.validate();
    targets.validate();
    cfg.validate();
    const ChainModel m = make_chain(scheme, s, cfg);
    const double pt = sys.p_max;

    // Capacity bounds: no allocation can beat single-user or sum capacity at n_max.
    {
        const double c1 = shannon_capacity(pt * sys.g1 / sys.noise_var);
        const double c2 = shannon_capacity(pt * sys.g2 / sys.noise_var);
        const double csum = shannon_capacity(pt * (sys.g1 + sys.g2) / sys.noise_var);
        const double need1 = targets.t1_th / ((1.0 - m.msg.eps1) * sys.n_max);
        const double need2 = targets.t2_th / ((1.0 - m.msg.eps2) * sys.n_max);
        if (need1 > c1 || need2 > c2 || need1 + need2 > csum)
            return infeasible_report(scheme, "targets exceed the capacity bound at n_max");
    }

    // Candidate runs: the full chain from the equal split, and for
    // unrestricted RSMA also the two single-stream structures of U1, whose
    // optima the continuous iteration cannot reach across the region where
    // the weak stream's rate is negative.
    struct Start {
        ChainModel model;
        PowerAllocation powers;
        const char* label;
    };
    std::vector<Start> starts{{m, initial_powers(m, pt), "split start"}};
    if (scheme == Scheme::Rsma && m.has11 && m.has12) {
        ChainModel only11 = m;
        only11.has12 = false;
        ChainModel only12 = m;
        only12.has11 = false;
        starts.push_back({only11, initial_powers(only11, pt), "s12 disabled"});
        starts.push_back({only12, initial_powers(only12, pt), "s11 disabled"});
    }

    const bool trivial = !(targets.t1_th > 0.0) && !(targets.t2_th > 0.0);
    SolveReport rep;
    rep.scheme = scheme;
    rep.status = SolveStatus::Infeasible;
    double best_n = std::numeric_limits<double>::infinity();
    for (const Start& st : starts) {
        ScaRun run;
        if (trivial) {
            run.powers = st.powers;
            run.state = reference_from_powers(st.powers, sys, sys.n_min);
            run.trace = {cfg.n_init, sys.n_min};
            run.status = SolveStatus::Converged;
        } else {
            run = run_sca(st.model, st.powers, sys, targets, cfg);
            if (cfg.exact_refinement && cfg.penalty == PenaltyConvention::MessageLevel &&
                run.status != SolveStatus::Infeasible) {
                ScaRun fine = run_sca(with_per_stream_penalty(st.model), run.powers, sys, targets, cfg);
                if (fine.status != SolveStatus::Infeasible) {
                    run.events.push_back("iteration " + std::to_string(run.iterations) +
                                         ": switched to per-stream penalties");
                    for (std::string& e : fine.events) run.events.push_back("refinement " + e);
                    run.trace.insert(run.trace.end(), fine.trace.begin() + 1, fine.trace.end());
                    run.iterations += fine.iterations;
                    run.powers = fine.powers;
                    run.state = fine.state;
                    run.status = fine.status;
                }
            }
        }
        rep.iterations += run.iterations;
        // Exact blocklength at the final powers and nearby boundary points.
        for (const PowerAllocation& q : boundary_variants(st.model, run.powers, pt, cfg.snap_fraction)) {
            const double nq = exact_chain_blocklength(m, q, sys, s, targets);
            if (nq < best_n) {
                best_n = nq;
                rep.powers = q;
                rep.slacks = run.state;
                rep.trace = run.trace;
                rep.status = run.status == SolveStatus::Infeasible ? SolveStatus::Converged : run.status;
                rep.events = run.events;
                if (starts.size() > 1) rep.events.push_back(std::string("selected run: ") + st.label);
            }
        }
    }
    if (!std::isfinite(best_n))
        return infeasible_report(scheme, "no exactly feasible blocklength within [n_min, n_max]");
    rep.n_star = best_n;
    const PowerAllocation best_p = rep.powers;
    rep.n_star_int = reported_integer_blocklength(best_n, [&](double n) {
        const ThroughputPair t = chain_throughput(m, n, best_p, sys, s);
        return t.t1 >= targets.t1_th && t.t2 >= targets.t2_th;
    });
    return rep;
}

// --- OMA -------------------------------------------------------------------

struct OmaCandidate {
    double alpha = 0.5;
    double p1 = 0.0;
    double p2 = 0.0;
    double n_total = std::numeric_limits<double>::infinity();
};

inline OmaCandidate oma_candidate(double alpha, Scheme scheme, const SystemParams& sys, const StreamReliability& s,
                                  const ThroughputTargets& targets, const AlphaRule& rule) {
    OmaCandidate c;
    c.alpha = alpha;
    const double pt = sys.p_max;
    if (rule.kind == AlphaRule::Kind::Fixed) {
        c.p1 = c.p2 = pt;
    } else if (alpha >= 0.5) {
        c.p1 = pt;
        c.p2 = pt * (1.0 - alpha) / alpha;
    } else {
        c.p1 = pt * alpha / (1.0 - alpha);
        c.p2 = pt;
    }
    const OmaFraction a(alpha);
    const UserSinrs g = scheme == Scheme::Fdma ? fdma_sinrs(c.p1, c.p2, a, sys) : tdma_sinrs(c.p1, c.p2, sys);
    const double q1 = inverse_q(s.eps11) * kLog2e;
    const double q2 = inverse_q(s.eps22) * kLog2e;
    const double n1 = std::max(sys.n_min, required_blocklength(alpha * shannon_capacity(g.gamma1),
                                                               std::sqrt(channel_dispersion(g.gamma1)) * q1,
                                                               1.0 - s.eps11, targets.t1_th));
    const double n2 = std::max(sys.n_min, required_blocklength((1.0 - alpha) * shannon_capacity(g.gamma2),
                                                               std::sqrt(channel_dispersion(g.gamma2)) * q2,
                                                               1.0 - s.eps22, targets.t2_th));
    const double total = std::max(n1 / alpha, n2 / (1.0 - alpha));
    if (total * alpha <= sys.n_max * (1.0 + 1e-12) && total * (1.0 - alpha) <= sys.n_max * (1.0 + 1e-12))
        c.n_total = total;
    return c;
}

inline bool oma_integer_feasible(Scheme scheme, const OmaCandidate& c, long n1, long n2, const SystemParams& sys,
                                 const StreamReliability& s, const ThroughputTargets& targets) {
    const OmaFraction a(c.alpha);
    const UserSinrs g = scheme == Scheme::Fdma ? fdma_sinrs(c.p1, c.p2, a, sys) : tdma_sinrs(c.p1, c.p2, sys);
    return oma_user_throughput(static_cast<double>(n1), g.gamma1, c.alpha, ReliabilityTarget(s.eps11)) >=
               targets.t1_th &&
           oma_user_throughput(static_cast<double>(n2), g.gamma2, 1.0 - c.alpha, ReliabilityTarget(s.eps22)) >=
               targets.t2_th;
}

inline SolveReport minimize_oma(Scheme scheme, const SystemParams& sys, const StreamReliability& s,
                                const ThroughputTargets& targets, const SolverConfig& cfg) {
    sys.validate();
    s.validate();
    targets.validate();
    cfg.validate();
    SolveReport rep;
    rep.scheme = scheme;
    rep.trace.push_back(cfg.n_init);

    auto eval = [&](double alpha) { return oma_candidate(alpha, scheme, sys, s, targets, cfg.alpha_rule); };
    OmaCandidate best;
    if (cfg.alpha_rule.kind == AlphaRule::Kind::Fixed) {
        best = eval(cfg.alpha_rule.fixed);
        rep.iterations = 1;
    } else {
        // Coarse scan of the resource fraction, then golden-section refinement
        // inside the best bracket.
        constexpr int kScan = 400;
        int best_k = 1;
        for (int k = 1; k < kScan; ++k) {
            const OmaCandidate c = eval(static_cast<double>(k) / kScan);
            if (c.n_total < best.n_total) {
                best = c;
                best_k = k;
            }
        }
        rep.trace.push_back(best.n_total);
        double lo = static_cast<double>(best_k - 1) / kScan;
        double hi = static_cast<double>(best_k + 1) / kScan;
        lo = std::max(lo, 1e-9);
        hi = std::min(hi, 1.0 - 1e-9);
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        OmaCandidate c1 = eval(x1), c2 = eval(x2);
        int it = 0;
        for (; it < 200 && hi - lo > 1e-13; ++it) {
            if (c1.n_total <= c2.n_total) {
                hi = x2;
                x2 = x1;
                c2 = c1;
                x1 = hi - phi * (hi - lo);
                c1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                c1 = c2;
                x2 = lo + phi * (hi - lo);
                c2 = eval(x2);
            }
            const OmaCandidate& better = c1.n_total <= c2.n_total ? c1 : c2;
            if (better.n_total < best.n_total) best = better;
        }
        rep.iterations = it;
    }
    rep.trace.push_back(best.n_total);
    if (!std::isfinite(best.n_total)) return infeasible_report(scheme, "no resource split meets the targets within the blocklength box");

    rep.alpha = best.alpha;
    rep.powers = {best.p1, 0.0, best.p2};
    rep.n_star = best.n_total;
    rep.n1_int = static_cast<long>(std::ceil(best.alpha * best.n_total - 1e-7));
    rep.n2_int = static_cast<long>(std::ceil((1.0 - best.alpha) * best.n_total - 1e-7));
    if (!oma_integer_feasible(scheme, best, rep.n1_int, rep.n2_int, sys, s, targets)) {
        ++rep.n1_int;
        ++rep.n2_int;
    }
    rep.n_star_int = rep.n1_int + rep.n2_int;
    rep.slacks.powers = rep.powers;
    rep.slacks.n = rep.n_star;
    rep.status = SolveStatus::Converged;
    return rep;
}

}  // namespace detail

/// One convexified subproblem around `ref` with the default trust region.
/// Returns nullopt when the linearized constraint set is infeasible on
/// [n_min, max(n_max, ref.n)].
inline std::optional<SlackState> solve_p3(const SlackState& ref, const SystemParams& sys, const StreamReliability& s,
                                          const ThroughputTargets& targets, const SolverConfig& cfg,
                                          Scheme scheme = Scheme::Rsma) {
    const detail::ChainModel m = detail::make_chain(scheme, s, cfg);
    SlackState r = ref;
    r.delta11 = std::max(r.delta11, kDeltaRefFloor);
    r.delta12 = std::max(r.delta12, kDeltaRefFloor);
    r.delta22 = std::max(r.delta22, kDeltaRefFloor);
    return detail::solve_subproblem(m, r, sys, targets, cfg.rho_init, std::max(sys.n_max, ref.n), cfg);
}

inline SolveReport minimize_blocklength_rsma(const SystemParams& sys, const StreamReliability& s,
                                             const ThroughputTargets& targets, const SolverConfig& cfg = {}) {
    return detail::minimize_chain(Scheme::Rsma, sys, s, targets, cfg);
}

inline SolveReport minimize_blocklength_noma(const SystemParams& sys, const StreamReliability& s,
                                             const ThroughputTargets& targets, const SolverConfig& cfg = {},
                                             DecodeOrder order = DecodeOrder::U1First) {
    return detail::minimize_chain(order == DecodeOrder::U1First ? Scheme::Noma12 : Scheme::Noma21, sys, s, targets,
                                  cfg);
}

inline SolveReport minimize_blocklength_oma(const SystemParams& sys, const StreamReliability& s,
                                            const ThroughputTargets& targets, const SolverConfig& cfg, Scheme scheme) {
    if (!is_oma(scheme)) throw std::invalid_argument("minimize_blocklength_oma: scheme must be FDMA or TDMA");
    return detail::minimize_oma(scheme, sys, s, targets, cfg);
}

inline SolveReport minimize_blocklength(Scheme scheme, const SystemParams& sys, const StreamReliability& s,
                                        const ThroughputTargets& targets, const SolverConfig& cfg = {}) {
    if (is_oma(scheme)) return minimize_blocklength_oma(sys, s, targets, cfg, scheme);
    return detail::minimize_chain(scheme, sys, s, targets, cfg);
}

/// Re-checks a report against the exact constraints of its scheme at the
/// reported integer blocklength(s).
inline bool report_satisfies_constraints(const SolveReport& r, const SystemParams& sys, const StreamReliability& s,
                                         const ThroughputTargets& targets, double tol = 1e-6) {
    if (r.status == SolveStatus::Infeasible) return false;
    if (!r.powers.valid_for(sys, 1e-9)) return false;
    if (is_oma(r.scheme)) {
        const double lo = sys.n_min - tol, hi = sys.n_max + tol;
        if (r.n1_int < lo || r.n2_int < lo || r.n1_int > std::ceil(hi) || r.n2_int > std::ceil(hi)) return false;
        const OmaFraction a(r.alpha);
        const UserSinrs g = r.scheme == Scheme::Fdma ? fdma_sinrs(r.powers.p1(), r.powers.p2, a, sys)
                                                     : tdma_sinrs(r.powers.p1(), r.powers.p2, sys);
        return oma_user_throughput(static_cast<double>(r.n1_int), g.gamma1, r.alpha, ReliabilityTarget(s.eps11)) >=
                   targets.t1_th - tol &&
               oma_user_throughput(static_cast<double>(r.n2_int), g.gamma2, 1.0 - r.alpha,
                                   ReliabilityTarget(s.eps22)) >= targets.t2_th - tol;
    }
    const double n = static_cast<double>(r.n_star_int);
    if (n < sys.n_min - tol || n > std::ceil(sys.n_max) + tol) return false;
    if (r.scheme == Scheme::Rsma) return exact_constraints_satisfied(n, r.powers, sys, s, targets, tol);
    const ThroughputPair t = noma_effective_throughput(n, r.powers.p1(), r.powers.p2, sys, s, noma_order(r.scheme));
    return t.t1 >= targets.t1_th - tol && t.t2 >= targets.t2_th - tol;
}

}  // namespace rsma
