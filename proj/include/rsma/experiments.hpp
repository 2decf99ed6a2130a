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

// Experiment drivers. Each returns a Dataset whose rows are produced in a
// fixed sweep order regardless of the number of workers, so identical
// scenarios give byte-identical output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rsma/blocklength_solver.hpp"
#include "rsma/oracle.hpp"
#include "rsma/region.hpp"
#include "rsma/scenario.hpp"

namespace rsma {

using Cell = std::variant<std::string, double, long>;

struct Dataset {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string format_cell(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
    const double v = std::get<double>(c);
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Quotes a field that contains a separator, quote or line break.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

inline void write_csv(const Dataset& d, std::ostream& out) {
    for (std::size_t i = 0; i < d.columns.size(); ++i) out << (i ? "," : "") << csv_field(d.columns[i]);
    out << '\n';
    for (const auto& row : d.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(format_cell(row[i]));
        out << '\n';
    }
}

/// JSON array of row objects; non-finite numbers become strings.
inline nlohmann::ordered_json to_json(const Dataset& d) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : d.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (const auto* v = std::get_if<double>(&c); v && std::isfinite(*v)) {
                obj[d.columns[i]] = *v;
            } else if (const auto* l = std::get_if<long>(&c)) {
                obj[d.columns[i]] = *l;
            } else {
                obj[d.columns[i]] = format_cell(c);
            }
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline nlohmann::ordered_json to_json(const SolveReport& r) {
    auto num = [](double v) -> nlohmann::ordered_json {
        if (std::isfinite(v)) return v;
        return format_cell(v);
    };
    nlohmann::ordered_json j;
    j["scheme"] = std::string(to_string(r.scheme));
    j["n_star"] = num(r.n_star);
    j["n_star_int"] = r.n_star_int;
    j["powers"] = {{"p11", r.powers.p11}, {"p12", r.powers.p12}, {"p2", r.powers.p2}};
    if (is_oma(r.scheme)) j["oma"] = {{"alpha", num(r.alpha)}, {"n1", r.n1_int}, {"n2", r.n2_int}};
    j["slacks"] = {{"delta11", r.slacks.delta11}, {"delta12", r.slacks.delta12}, {"delta22", r.slacks.delta22},
                   {"tau11", r.slacks.tau11},     {"tau12", r.slacks.tau12},     {"n", num(r.slacks.n)}};
    j["iterations"] = r.iterations;
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (double v : r.trace) trace.push_back(num(v));
    j["trace"] = std::move(trace);
    j["status"] = std::string(to_string(r.status));
    j["events"] = r.events;
    return j;
}

/// Runs fn(0..count-1) on up to `workers` threads; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t count, int workers, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(count);
    const std::size_t threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace experiments_detail {

using Rows = std::vector<std::vector<Cell>>;

inline std::vector<double> power_sweep(const Scenario& sc) {
    return sc.pt_db_range.empty() ? std::vector<double>{sc.pt_db} : sc.pt_db_range.linear();
}

inline std::vector<Cell> solve_row(const std::string& hash, double pt_db, double eps, Scheme scheme,
                                   const ThroughputTargets& t, const SolveReport& r) {
    return {hash,
            pt_db,
            eps,
            std::string(to_string(scheme)),
            t.t1_th,
            t.t2_th,
            r.n_star,
            r.status == SolveStatus::Infeasible ? Cell{std::string("")} : Cell{r.n_star_int},
            is_oma(scheme) ? Cell{r.n1_int} : Cell{std::string("")},
            is_oma(scheme) ? Cell{r.n2_int} : Cell{std::string("")},
            is_oma(scheme) ? Cell{r.alpha} : Cell{std::string("")},
            r.powers.p11,
            r.powers.p12,
            r.powers.p2,
            static_cast<long>(r.iterations),
            std::string(to_string(r.status))};
}

inline std::vector<std::string> solve_columns() {
    return {"scenario_hash", "pt_db", "eps", "scheme", "t1_th", "t2_th", "n_star", "n_star_int",
            "n1_int", "n2_int", "alpha", "p11", "p12", "p2", "iterations", "status"};
}

// Largest clamped FBL sum rate over a uniform (p1, p2) grid.
inline RatePoint best_sum_on_grid(Scheme scheme, double n, const SystemParams& sys, const StreamReliability& eps,
                                  const AlphaRule& rule, int steps) {
    RatePoint best{0.0, 0.0};
    const double pt = sys.p_max;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            const double p1 = pt * i / steps, p2 = pt * j / steps;
            RatePoint r;
            if (is_oma(scheme)) {
                // The power-ratio rule needs both users active.
                if (rule.kind == AlphaRule::Kind::PowerRatio && (!(p1 > 0.0) || !(p2 > 0.0))) continue;
                r = oma_rate_point(n, p1, p2, rule.resolve(p1, p2), sys, eps, scheme);
            } else {
                r = noma_fbl_point(n, p1, p2, sys, eps, noma_order(scheme));
            }
            if (r.r1 + r.r2 > best.r1 + best.r2) best = r;
        }
    }
    return best;
}

}  // namespace experiments_detail

/// Rate-region curves at fixed per-user powers for every scheme and
/// blocklength, plus the infinite-blocklength MAC pentagon.
inline Dataset run_region_experiment(const Scenario& sc, int workers = 1) {
    using experiments_detail::Rows;
    Dataset d{sc.name + "_region", {"scenario_hash", "scheme", "n", "curve", "param", "r1", "r2", "marker"}, {}};
    if (sc.schemes.empty()) return d;
    const std::string hash = sc.hash();
    const SystemParams sys = sc.system_at(sc.pt_db);
    const double p1 = db_to_linear(sc.p1_db), p2 = db_to_linear(sc.p2_db);
    const int np = sc.num_points;

    struct Task {
        Scheme scheme;
        double n;
    };
    std::vector<Task> tasks;
    for (double n : sc.n_list)
        for (Scheme s : sc.schemes) tasks.push_back({s, n});

    auto blocks = parallel_map<Rows>(tasks.size(), workers, [&](std::size_t i) {
        const Task& t = tasks[i];
        const std::string name(to_string(t.scheme));
        Rows rows;
        auto emit = [&](const char* curve, double param, const RatePoint& r, const char* marker) {
            rows.push_back({hash, name, t.n, std::string(curve), param, r.r1, r.r2, std::string(marker)});
        };
        switch (t.scheme) {
            case Scheme::Rsma:
                for (const SweptPoint& p : rsma_fbl_sweep(t.n, p1, p2, sys, sc.eps, np))
                    emit("split", p.param, p.rate, "");
                break;
            case Scheme::Noma12:
            case Scheme::Noma21:
                for (const SweptPoint& p : noma_fbl_sweep(t.n, p1, p2, sys, sc.eps, noma_order(t.scheme), np))
                    emit("power", p.param, p.rate, p.param == 1.0 ? "corner" : "");
                break;
            case Scheme::Fdma:
            case Scheme::Tdma: {
                const OmaFraction rule_alpha = sc.alpha_rule.resolve(p1, p2);
                std::vector<SweptPoint> pts;
                if (sc.oma_sweep) pts = oma_fbl_points(t.n, p1, p2, sys, sc.eps, t.scheme, sc.alpha_rule, np - 1);
                pts.push_back({rule_alpha.value(), oma_rate_point(t.n, p1, p2, rule_alpha, sys, sc.eps, t.scheme)});
                std::stable_sort(pts.begin(), pts.end(),
                                 [](const SweptPoint& a, const SweptPoint& b) { return a.param < b.param; });
                for (const SweptPoint& p : pts)
                    emit("alpha", p.param, p.rate, p.param == rule_alpha.value() ? "rule" : "");
                break;
            }
        }
        return rows;
    });
    for (auto& b : blocks)
        for (auto& r : b) d.rows.push_back(std::move(r));

    if (sc.include_ibl) {
        const RegionBoundary pent = ibl_mac_pentagon(p1, p2, sys);
        const double r1_max = pent.points.back().r1;
        for (int k = 0; k < np; ++k) {
            const double r1 = r1_max * k / (np - 1);
            double r2 = 0.0;
            for (std::size_t i = 1; i < pent.points.size(); ++i) {
                const RatePoint& a = pent.points[i - 1];
                const RatePoint& b = pent.points[i];
                if (r1 <= b.r1 && b.r1 > a.r1) {
                    r2 = a.r2 + (r1 - a.r1) / (b.r1 - a.r1) * (b.r2 - a.r2);
                    break;
                }
            }
            d.rows.push_back({hash, std::string("ibl_mac"), kInfiniteBlocklength, std::string("pentagon"), r1, r1, r2,
                              std::string("")});
        }
    }
    return d;
}

/// Minimum blocklength of every scheme over the power sweep.
inline Dataset run_blocklength_vs_power(const Scenario& sc, int workers = 1) {
    Dataset d{sc.name + "_minlen_power", experiments_detail::solve_columns(), {}};
    const std::string hash = sc.hash();
    const SolverConfig cfg = sc.solver_config();
    struct Task {
        double pt_db;
        Scheme scheme;
    };
    std::vector<Task> tasks;
    for (double db : experiments_detail::power_sweep(sc))
        for (Scheme s : sc.schemes) tasks.push_back({db, s});
    d.rows = parallel_map<std::vector<Cell>>(tasks.size(), workers, [&](std::size_t i) {
        const Task& t = tasks[i];
        const SolveReport r = minimize_blocklength(t.scheme, sc.system_at(t.pt_db), sc.eps, sc.targets, cfg);
        return experiments_detail::solve_row(hash, t.pt_db, sc.eps.eps11, t.scheme, sc.targets, r);
    });
    return d;
}

/// Minimum blocklength of every scheme over the error-probability sweep,
/// one group per listed power.
inline Dataset run_blocklength_vs_epsilon(const Scenario& sc, int workers = 1) {
    Dataset d{sc.name + "_minlen_eps", experiments_detail::solve_columns(), {}};
    const std::string hash = sc.hash();
    const SolverConfig cfg = sc.solver_config();
    const std::vector<double> pts = sc.eps_pt_db.empty() ? std::vector<double>{sc.pt_db} : sc.eps_pt_db;
    const std::vector<double> eps_values =
        sc.eps_range.empty() ? std::vector<double>{sc.eps.eps11} : sc.eps_range.logarithmic();
    struct Task {
        double pt_db;
        double eps;
        Scheme scheme;
    };
    std::vector<Task> tasks;
    for (double db : pts)
        for (double e : eps_values)
            for (Scheme s : sc.schemes) tasks.push_back({db, e, s});
    d.rows = parallel_map<std::vector<Cell>>(tasks.size(), workers, [&](std::size_t i) {
        const Task& t = tasks[i];
        const SolveReport r =
            minimize_blocklength(t.scheme, sc.system_at(t.pt_db), StreamReliability::uniform(t.eps), sc.targets, cfg);
        return experiments_detail::solve_row(hash, t.pt_db, t.eps, t.scheme, sc.targets, r);
    });
    return d;
}

/// Largest FBL sum rate per scheme over the blocklength sweep, RSMA with the
/// equal split (no power allocation), and the infinite-blocklength line.
inline Dataset run_sumrate_vs_blocklength(const Scenario& sc, int workers = 1) {
    Dataset d{sc.name + "_sumrate", {"scenario_hash", "pt_db", "n", "scheme", "sum_rate", "r1", "r2", "param"}, {}};
    const std::string hash = sc.hash();
    const SystemParams sys = sc.system_at(sc.pt_db);
    const double pt = sys.p_max;
    const std::vector<double> ns = sc.n_range.empty() ? sc.n_list : sc.n_range.linear();
    const bool has_rsma = std::find(sc.schemes.begin(), sc.schemes.end(), Scheme::Rsma) != sc.schemes.end();
    if (sc.schemes.empty()) return d;

    using experiments_detail::Rows;
    auto blocks = parallel_map<Rows>(ns.size(), workers, [&](std::size_t i) {
        const double n = ns[i];
        Rows rows;
        auto emit = [&](const std::string& name, const RatePoint& r, double param) {
            rows.push_back({hash, sc.pt_db, n, name, r.r1 + r.r2, r.r1, r.r2, param});
        };
        for (Scheme s : sc.schemes) {
            if (s == Scheme::Rsma) {
                SweptPoint best{0.0, {0.0, 0.0}};
                bool first = true;
                for (const SweptPoint& p : rsma_fbl_sweep(n, pt, pt, sys, sc.eps, sc.num_points)) {
                    if (first || p.rate.r1 + p.rate.r2 > best.rate.r1 + best.rate.r2) best = p;
                    first = false;
                }
                emit("rsma", best.rate, best.param);
            } else {
                emit(std::string(to_string(s)),
                     experiments_detail::best_sum_on_grid(s, n, sys, sc.eps, sc.alpha_rule, sc.oracle_power_steps),
                     std::numeric_limits<double>::quiet_NaN());
            }
        }
        if (has_rsma) emit("rsma_no_pa", rsma_rate_point(n, {0.5 * pt, 0.5 * pt, pt}, sys, sc.eps), 0.5);
        const double c_sum = shannon_capacity(aggregate_sinrs({pt, 0.0, pt}, sys).gamma_sum);
        rows.push_back({hash, sc.pt_db, n, std::string("ibl"), c_sum, std::string(""), std::string(""),
                        std::numeric_limits<double>::quiet_NaN()});
        return rows;
    });
    for (auto& b : blocks)
        for (auto& r : b) d.rows.push_back(std::move(r));
    return d;
}

/// Solver against oracle for every scheme and power of the sweep.
inline Dataset run_verification(const Scenario& sc, int workers = 1) {
    Dataset d{sc.name + "_verify",
              {"scenario_hash", "pt_db", "scheme", "t1_th", "t2_th", "n_star", "n_star_int", "oracle_min",
               "lower_ok", "upper_ok", "exact_ok", "status"},
              {}};
    const std::string hash = sc.hash();
    const SolverConfig cfg = sc.solver_config();
    GridSpec grid;
    grid.power_steps = sc.oracle_power_steps;
    struct Task {
        double pt_db;
        Scheme scheme;
    };
    std::vector<Task> tasks;
    for (double db : experiments_detail::power_sweep(sc))
        for (Scheme s : sc.schemes) tasks.push_back({db, s});
    d.rows = parallel_map<std::vector<Cell>>(tasks.size(), workers, [&](std::size_t i) {
        const Task& t = tasks[i];
        const SystemParams sys = sc.system_at(t.pt_db);
        const SolveReport r = minimize_blocklength(t.scheme, sys, sc.eps, sc.targets, cfg);
        const std::optional<double> o = oracle_min_blocklength(t.scheme, sys, sc.eps, sc.targets, grid, sc.alpha_rule);
        const bool solved = r.status != SolveStatus::Infeasible;
        const double n = static_cast<double>(r.n_star_int);
        const bool lower = o ? (solved && *o <= n) : !solved;
        const bool upper = o ? (solved && n <= 1.02 * *o + 2.0) : !solved;
        const bool exact = solved ? report_satisfies_constraints(r, sys, sc.eps, sc.targets) : !o.has_value();
        return std::vector<Cell>{hash,
                                 t.pt_db,
                                 std::string(to_string(t.scheme)),
                                 sc.targets.t1_th,
                                 sc.targets.t2_th,
                                 r.n_star,
                                 solved ? Cell{r.n_star_int} : Cell{std::string("")},
                                 o ? Cell{*o} : Cell{std::string("infeasible")},
                                 static_cast<long>(lower),
                                 static_cast<long>(upper),
                                 static_cast<long>(exact),
                                 std::string(to_string(r.status))};
    });
    return d;
}

}  // namespace rsma
