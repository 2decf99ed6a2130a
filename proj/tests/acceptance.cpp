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


// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "reference_math.hpp"
#include "rsma/rsma.hpp"

using namespace rsma;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Scenario scenario(const char* name) { return load_scenario(std::string(RSMA_SCENARIO_DIR) + "/" + name + ".txt"); }

SystemParams base_system(double db) {
    SystemParams s;
    s.p_max = db_to_linear(db);
    return s;
}

// 1. Sum of stream rates telescopes to the sum capacity minus the penalties.
Outcome appendix_identity() {
    const auto t0 = Clock::now();
    std::mt19937 rng(20241016);
    std::uniform_real_distribution<double> unit(0.0, 1.0), db(0.0, 9.0), n_dist(100.0, 3000.0);
    const ReliabilityTarget e(1e-6);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const SystemParams sys = base_system(db(rng));
        const double pt = sys.p_max;
        const double split = unit(rng);
        const double p1 = pt * unit(rng);
        const PowerAllocation p{split * p1, (1.0 - split) * p1, pt * unit(rng)};
        const double n = n_dist(rng);
        const RsmaSinrs g = rsma_sinrs(p, sys);
        const double lhs = fbl_rate(n, g.gamma11, e) + fbl_rate(n, g.gamma12, e) + fbl_rate(n, g.gamma22, e);
        const double rhs = shannon_capacity(aggregate_sinrs(p, sys).gamma_sum) - dispersion_penalty(n, g.gamma11, e) -
                           dispersion_penalty(n, g.gamma12, e) - dispersion_penalty(n, g.gamma22, e);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    const double t = seconds_since(t0);
    return {worst < 1e-9 && t < 1.0, fmt("max |diff| = %.3g", worst) + fmt(", %.3f s", t)};
}

// 2. Primitive accuracy.
Outcome fbl_primitives() {
    double round_trip = 0.0;
    for (double p : {1e-9, 1e-6, 1e-5, 1e-3, 0.5})
        round_trip = std::max(round_trip, std::abs(q_function(inverse_q(p)) - p) / p);
    double scaling = 0.0;
    for (double gamma : {0.1, 1.0, 3.16, 10.0})
        for (double n : {100.0, 500.0, 3000.0})
            for (double eps : {1e-9, 1e-6, 1e-3}) {
                const ReliabilityTarget e(eps);
                const double d1 = dispersion_penalty(n, gamma, e);
                const double d4 = dispersion_penalty(4.0 * n, gamma, e);
                scaling = std::max(scaling, std::abs(d4 - 0.5 * d1) / (0.5 * d1));
            }
    bool half_exact = true;
    for (double gamma : {0.0, 0.5, 2.0, 100.0})
        for (double n : {1.0, 100.0, 2000.0})
            half_exact = half_exact && fbl_rate(n, gamma, ReliabilityTarget(0.5)) == shannon_capacity(gamma);
    return {round_trip < 1e-9 && scaling < 1e-12 && half_exact,
            fmt("round trip rel %.3g", round_trip) + fmt(", D(4n) rel %.3g", scaling) +
                ", eps=0.5 rate " + (half_exact ? "exact" : "inexact")};
}

// 3. Surrogates are tangent at their reference.
Outcome tangency() {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> log_delta(std::log(0.05), std::log(10.0)), unit(0.0, 1.0),
        n_dist(100.0, 3000.0), log_eps(std::log(1e-9), std::log(1e-3));
    const SystemParams sys = base_system(5.0);
    double value_err = 0.0, slope_err = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double d = std::exp(log_delta(rng));
        const double n = n_dist(rng);
        const ThroughputSurrogate s = linearize_throughput(d, ReliabilityTarget(std::exp(log_eps(rng))), n);
        value_err = std::max(value_err, std::abs(s(d) - s.exact(d)));

        const double fd = reference::central_difference([](double x) { return dispersion_factor(x); }, d, 1e-6);
        slope_err = std::max(slope_err, std::abs(fd - dispersion_factor_slope(d)));

        SlackState ref;
        ref.powers = {sys.p_max * unit(rng), sys.p_max * unit(rng), sys.p_max * unit(rng)};
        ref.delta11 = std::exp(log_delta(rng));
        ref.delta22 = std::exp(log_delta(rng));
        const PowerAllocation& p = ref.powers;
        const double exact11 = p.p12 * sys.g1 + p.p2 * sys.g2 + sys.noise_var - p.p11 * sys.g1 / ref.delta11;
        const double exact22 = p.p12 * sys.g1 + sys.noise_var - p.p2 * sys.g2 / ref.delta22;
        const AffineSinrConstraint c11 = linearize_sinr(SinrConstraint::Gamma11AtLeastDelta11, ref, sys);
        const AffineSinrConstraint c22 = linearize_sinr(SinrConstraint::Gamma22AtLeastDelta22, ref, sys);
        value_err = std::max(value_err, std::abs(c11.lhs(p, ref.delta11) - exact11));
        value_err = std::max(value_err, std::abs(c22.lhs(p, ref.delta22) - exact22));
    }
    return {value_err < 1e-10 && slope_err < 1e-6,
            fmt("max value gap %.3g", value_err) + fmt(", max slope gap %.3g", slope_err)};
}

// 4. Solver against the brute-force oracle.
Outcome solver_vs_oracle() {
    const auto t0 = Clock::now();
    int cases = 0, failures = 0;
    std::string first_failure;
    for (const char* name : {"verify_a", "verify_b", "verify_c"}) {
        const Scenario sc = scenario(name);
        GridSpec grid;
        grid.power_steps = sc.oracle_power_steps;
        for (double db : sc.pt_db_range.linear()) {
            const SystemParams sys = sc.system_at(db);
            for (Scheme s : sc.schemes) {
                ++cases;
                const SolveReport r = minimize_blocklength(s, sys, sc.eps, sc.targets, sc.solver_config());
                const auto o = oracle_min_blocklength(s, sys, sc.eps, sc.targets, grid, sc.alpha_rule);
                const double n = static_cast<double>(r.n_star_int);
                const bool ok = o && r.status == SolveStatus::Converged && *o <= n && n <= 1.02 * *o + 2.0 &&
                                report_satisfies_constraints(r, sys, sc.eps, sc.targets);
                if (!ok) {
                    ++failures;
                    if (first_failure.empty())
                        first_failure = std::string(name) + "/" + std::string(to_string(s)) + fmt(" at %g dB", db) +
                                        fmt(": solver %g", n) + fmt(", oracle %g", o.value_or(-1.0));
                }
            }
        }
    }
    const double t = seconds_since(t0);
    std::string detail = std::to_string(cases - failures) + "/" + std::to_string(cases) + " cases" + fmt(", %.1f s", t);
    if (!first_failure.empty()) detail += "; first failure " + first_failure;
    return {failures == 0 && cases >= 25 && t < 60.0, detail};
}

// 5. Region containment and existence properties.
Outcome region_properties() {
    const Scenario sc = scenario("fig3_region");
    const SystemParams sys = sc.system_at(sc.pt_db);
    const double p1 = db_to_linear(sc.p1_db), p2 = db_to_linear(sc.p2_db);
    const int np = sc.num_points;

    const RegionBoundary r2000 = rsma_fbl_boundary(2000.0, p1, p2, sys, sc.eps, np);
    const bool a = region_contains(r2000, noma_fbl_point(2000.0, p1, p2, sys, sc.eps, DecodeOrder::U1First), 1e-6) &&
                   region_contains(r2000, noma_fbl_point(2000.0, p1, p2, sys, sc.eps, DecodeOrder::U2First), 1e-6);

    const RegionBoundary r500 = rsma_fbl_boundary(500.0, p1, p2, sys, sc.eps, np);
    int outside = 0;
    for (DecodeOrder o : {DecodeOrder::U1First, DecodeOrder::U2First})
        for (const SweptPoint& p : noma_fbl_sweep(500.0, p1, p2, sys, sc.eps, o, np))
            outside += region_contains(r500, p.rate, 1e-6) ? 0 : 1;
    const bool b = outside > 0;

    const double sum_cap = shannon_capacity(aggregate_sinrs({p1, 0.0, p2}, sys).gamma_sum);
    double edge = 0.0;
    for (const SweptPoint& p : rsma_fbl_sweep(kInfiniteBlocklength, p1, p2, sys, sc.eps, np))
        edge = std::max(edge, std::abs(p.rate.r1 + p.rate.r2 - sum_cap));
    const bool c = edge < 1e-9;
    return {a && b && c, std::string("corners inside at n=2000: ") + (a ? "yes" : "no") +
                             ", NOMA points outside at n=500: " + std::to_string(outside) +
                             fmt(", IBL sum-edge gap %.3g", edge)};
}

using Table = std::map<Scheme, std::vector<double>>;

Table solve_power_sweep(const Scenario& sc) {
    Table out;
    for (double db : sc.pt_db_range.linear())
        for (Scheme s : sc.schemes)
            out[s].push_back(minimize_blocklength(s, sc.system_at(db), sc.eps, sc.targets, sc.solver_config()).n_star);
    return out;
}

bool non_increasing(const std::vector<double>& v, double tol) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[i - 1] + tol)) return false;
    return true;
}

// 6. Blocklength versus power.
Outcome power_trends() {
    const Scenario a = scenario("fig4a_minlen_power");
    const Scenario b = scenario("fig4b_minlen_power");
    const double xi = a.xi;
    const Table ta = solve_power_sweep(a);
    const Table tb = solve_power_sweep(b);
    bool monotone = true;
    for (const Table* t : {&ta, &tb})
        for (const auto& [s, v] : *t) monotone = monotone && v.size() == 10 && non_increasing(v, xi);
    double worst_lead = -1e300;  // max of RSMA minus best baseline under T1 > T2
    for (std::size_t i = 0; i < ta.at(Scheme::Rsma).size(); ++i) {
        double best = 1e300;
        for (Scheme s : {Scheme::Noma12, Scheme::Noma21, Scheme::Fdma, Scheme::Tdma}) best = std::min(best, ta.at(s)[i]);
        worst_lead = std::max(worst_lead, ta.at(Scheme::Rsma)[i] - best);
    }
    double worst_gap = 0.0;  // |RSMA - NOMA| under T1 < T2
    for (std::size_t i = 0; i < tb.at(Scheme::Rsma).size(); ++i) {
        const double noma = std::min(tb.at(Scheme::Noma12)[i], tb.at(Scheme::Noma21)[i]);
        worst_gap = std::max(worst_gap, std::abs(tb.at(Scheme::Rsma)[i] - noma));
    }
    const bool ok = monotone && worst_lead <= xi && worst_gap <= xi;
    return {ok, std::string("monotone: ") + (monotone ? "yes" : "no") +
                    fmt(", max RSMA - best baseline (T1>T2) %.3g", worst_lead) +
                    fmt(", max |RSMA - NOMA| (T1<T2) %.3g", worst_gap)};
}

// 7. Blocklength versus error probability.
Outcome epsilon_trends() {
    const Scenario sc = scenario("fig5_minlen_eps");
    const std::vector<double> eps_values = sc.eps_range.logarithmic();
    bool monotone = eps_values.size() == 8 && sc.eps_pt_db.size() == 2;
    double worst_lead = -1e300;
    for (double db : sc.eps_pt_db) {
        Table t;
        for (double e : eps_values)
            for (Scheme s : sc.schemes)
                t[s].push_back(minimize_blocklength(s, sc.system_at(db), StreamReliability::uniform(e), sc.targets,
                                                    sc.solver_config())
                                   .n_star);
        for (const auto& [s, v] : t) monotone = monotone && non_increasing(v, sc.xi);
        for (std::size_t i = 0; i < eps_values.size(); ++i)
            for (Scheme s : {Scheme::Noma12, Scheme::Noma21, Scheme::Fdma, Scheme::Tdma})
                worst_lead = std::max(worst_lead, t.at(Scheme::Rsma)[i] - t.at(s)[i]);
    }
    return {monotone && worst_lead <= sc.xi, std::string("monotone: ") + (monotone ? "yes" : "no") +
                                                 fmt(", max RSMA - baseline %.3g", worst_lead)};
}

// 8. Sum rate versus blocklength.
Outcome sumrate_trends() {
    const Scenario sc = scenario("fig6_sumrate");
    const Dataset d = run_sumrate_vs_blocklength(sc);
    std::size_t col_scheme = 0, col_sum = 0;
    for (std::size_t i = 0; i < d.columns.size(); ++i) {
        if (d.columns[i] == "scheme") col_scheme = i;
        if (d.columns[i] == "sum_rate") col_sum = i;
    }
    std::map<std::string, std::vector<double>> curves;
    for (const auto& row : d.rows) curves[std::get<std::string>(row[col_scheme])].push_back(std::get<double>(row[col_sum]));
    bool increasing = true;
    for (const auto& [name, v] : curves) {
        if (name == "ibl") continue;
        for (std::size_t i = 1; i < v.size(); ++i) increasing = increasing && v[i] > v[i - 1];
    }
    const auto& pa = curves["rsma"];
    const auto& no_pa = curves["rsma_no_pa"];
    const auto& ibl = curves["ibl"];
    bool pa_ge = !pa.empty() && pa.size() == no_pa.size();
    int strict = 0;
    for (std::size_t i = 0; pa_ge && i < pa.size(); ++i) {
        pa_ge = pa_ge && pa[i] >= no_pa[i];
        strict += pa[i] > no_pa[i] ? 1 : 0;
    }
    bool below = !ibl.empty();
    for (const auto& [name, v] : curves) {
        if (name == "ibl") continue;
        for (std::size_t i = 0; i < v.size(); ++i) below = below && v[i] < ibl[i];
    }
    return {increasing && pa_ge && strict >= 1 && below,
            std::string("increasing: ") + (increasing ? "yes" : "no") + ", PA >= no-PA: " + (pa_ge ? "yes" : "no") +
                " (strict at " + std::to_string(strict) + " of " + std::to_string(pa.size()) + ")" +
                ", below IBL: " + (below ? "yes" : "no")};
}

// 9. RSMA with p12 = 0 against NOMA-12.
Outcome degeneration() {
    SolverConfig cfg;
    cfg.force_p12_zero = true;
    double solver_gap = 0.0;
    for (const char* name : {"verify_a", "verify_b", "verify_c"}) {
        const Scenario sc = scenario(name);
        const SystemParams sys = sc.system_at(5.0);
        const SolveReport r = minimize_blocklength_rsma(sys, sc.eps, sc.targets, cfg);
        const SolveReport n = minimize_blocklength_noma(sys, sc.eps, sc.targets);
        solver_gap = std::max(solver_gap, std::abs(r.n_star - n.n_star));
    }
    const bool a = solver_gap <= cfg.xi;

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0), n_dist(100.0, 3000.0);
    const SystemParams sys = base_system(5.0);
    const StreamReliability eps = StreamReliability::uniform(1e-6);
    double throughput_gap = 0.0, rate_gap = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double p1 = sys.p_max * unit(rng), p2 = sys.p_max * unit(rng), n = n_dist(rng);
        const ThroughputPair r = rsma_effective_throughput(n, {p1, 0.0, p2}, sys, eps);
        const ThroughputPair m = noma_effective_throughput(n, p1, p2, sys, eps);
        throughput_gap = std::max({throughput_gap, std::abs(r.t1 - m.t1), std::abs(r.t2 - m.t2)});
        const RatePoint rr = rsma_rate_point(n, {p1, 0.0, p2}, sys, eps);
        const RatePoint mr = noma_fbl_point(n, p1, p2, sys, eps, DecodeOrder::U1First);
        rate_gap = std::max({rate_gap, std::abs(rr.r1 - mr.r1), std::abs(rr.r2 - mr.r2)});
    }
    const bool b = throughput_gap <= 1e-9;
    return {a && b, fmt("solver gap %.3g", solver_gap) + (a ? " (ok)" : " (over xi)") +
                        fmt("; throughput gap %.3g bits", throughput_gap) + (b ? " (ok)" : " (over 1e-9)") +
                        fmt("; rate gap %.3g", rate_gap)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 appendix identity", appendix_identity},
        {"2 fbl primitives", fbl_primitives},
        {"3 linearization tangency", tangency},
        {"4 solver vs oracle", solver_vs_oracle},
        {"5 rate regions", region_properties},
        {"6 blocklength vs power", power_trends},
        {"7 blocklength vs error probability", epsilon_trends},
        {"8 sum rate vs blocklength", sumrate_trends},
        {"9 degeneration to NOMA", degeneration},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
