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

// Scenario files: one `key = value` per line, `#` starts a comment. Powers
// are given in dB here and converted to linear units on parse; nothing
// below this layer sees dB.
//
//   name            identifier used in output file names
//   g1, g2, noise_var, n_min, n_max
//   pt_db           power budget of both users (dB)
//   p1_db, p2_db    per-user totals for region tracing (default pt_db)
//   eps             per-stream error of every stream; eps11/eps12/eps22 override
//   t1_th, t2_th    effective-throughput thresholds (bits)
//   schemes         comma list of rsma, noma12, noma21, fdma, tdma
//   alpha_rule      power_ratio | fixed     alpha  (fixed fraction)
//   penalty         message | stream
//   xi, max_outer_iters
//   n_list          region blocklengths, `inf` for infinite blocklength
//   num_points, oma_sweep, include_ibl
//   pt_db_range     start:stop:count, linear in dB
//   eps_range       start:stop:count, log-spaced
//   eps_pt_db       comma list of dB values for the error sweep
//   n_range         start:stop:count, linear
//   oracle_power_steps

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsma/blocklength_solver.hpp"
#include "rsma/channel.hpp"
#include "rsma/reliability.hpp"
#include "rsma/scheme.hpp"

namespace rsma {

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string source, int line, std::string key, const std::string& what)
        : std::runtime_error(format(source, line, key, what)), line_(line), key_(std::move(key)) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    static std::string format(const std::string& source, int line, const std::string& key, const std::string& what) {
        std::string s = source;
        if (line > 0) s += ":" + std::to_string(line);
        if (!key.empty()) s += ": " + key;
        return s + ": " + what;
    }
    int line_;
    std::string key_;
};

struct SweepRange {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    [[nodiscard]] bool empty() const noexcept { return count == 0; }

    [[nodiscard]] std::vector<double> linear() const {
        std::vector<double> v;
        for (int k = 0; k < count; ++k)
            v.push_back(count == 1 ? start : start + (stop - start) * k / static_cast<double>(count - 1));
        return v;
    }

    [[nodiscard]] std::vector<double> logarithmic() const {
        std::vector<double> v;
        const double a = std::log10(start), b = std::log10(stop);
        for (int k = 0; k < count; ++k)
            v.push_back(count == 1 ? start : std::pow(10.0, a + (b - a) * k / static_cast<double>(count - 1)));
        return v;
    }
};

struct Scenario {
    std::string name = "scenario";
    SystemParams sys{};
    double pt_db = 0.0;
    double p1_db = 0.0;
    double p2_db = 0.0;
    StreamReliability eps = StreamReliability::uniform(1e-6);
    ThroughputTargets targets{};
    std::vector<Scheme> schemes{kAllSchemes.begin(), kAllSchemes.end()};
    AlphaRule alpha_rule = AlphaRule::power_ratio();
    PenaltyConvention penalty = PenaltyConvention::MessageLevel;
    double xi = 1e-3;
    int max_outer_iters = 200;
    std::vector<double> n_list{500.0, 1000.0, 2000.0, kInfiniteBlocklength};
    int num_points = 201;
    int oma_sweep = 1;  // 1: OMA curves swept over alpha, 0: rule point only
    bool include_ibl = true;
    SweepRange pt_db_range{};
    SweepRange eps_range{};
    std::vector<double> eps_pt_db{};
    SweepRange n_range{};
    int oracle_power_steps = 64;

    [[nodiscard]] SolverConfig solver_config() const {
        SolverConfig c;
        c.xi = xi;
        c.max_outer_iters = max_outer_iters;
        c.penalty = penalty;
        c.alpha_rule = alpha_rule;
        return c;
    }

    /// System parameters with the power budget of `pt_db`.
    [[nodiscard]] SystemParams system_at(double db) const {
        SystemParams s = sys;
        s.p_max = db_to_linear(db);
        return s;
    }

    /// Canonical text of every field; identical scenarios give identical text.
    [[nodiscard]] std::string canonical() const {
        std::ostringstream o;
        auto num = [&o](const char* k, double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            o << k << '=' << buf << '\n';
        };
        auto range = [&num](const char* k, const SweepRange& r) {
            num((std::string(k) + ".start").c_str(), r.start);
            num((std::string(k) + ".stop").c_str(), r.stop);
            num((std::string(k) + ".count").c_str(), r.count);
        };
        o << "name=" << name << '\n';
        num("g1", sys.g1);
        num("g2", sys.g2);
        num("noise_var", sys.noise_var);
        num("n_min", sys.n_min);
        num("n_max", sys.n_max);
        num("pt_db", pt_db);
        num("p1_db", p1_db);
        num("p2_db", p2_db);
        num("eps11", eps.eps11);
        num("eps12", eps.eps12);
        num("eps22", eps.eps22);
        num("t1_th", targets.t1_th);
        num("t2_th", targets.t2_th);
        o << "schemes=";
        for (Scheme s : schemes) o << to_string(s) << ',';
        o << '\n';
        num("alpha_kind", alpha_rule.kind == AlphaRule::Kind::Fixed ? 1 : 0);
        num("alpha", alpha_rule.fixed);
        num("penalty", penalty == PenaltyConvention::PerStream ? 1 : 0);
        num("xi", xi);
        num("max_outer_iters", max_outer_iters);
        for (double n : n_list) num("n", n);
        num("num_points", num_points);
        num("oma_sweep", oma_sweep);
        num("include_ibl", include_ibl ? 1 : 0);
        range("pt_db_range", pt_db_range);
        range("eps_range", eps_range);
        for (double d : eps_pt_db) num("eps_pt_db", d);
        range("n_range", n_range);
        num("oracle_power_steps", oracle_power_steps);
        return o.str();
    }

    /// 16 hex digits of the FNV-1a hash of canonical().
    [[nodiscard]] std::string hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 1099511628211ull;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

namespace scenario_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

class Reader {
public:
    Reader(std::string source, int line, std::string key) : source_(std::move(source)), line_(line), key_(std::move(key)) {}

    [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(source_, line_, key_, what); }

    double number(const std::string& text) const {
        if (text == "inf" || text == "+inf" || text == "ibl") return std::numeric_limits<double>::infinity();
        double v = 0.0;
        const char* first = text.data();
        const char* last = first + text.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || text.empty()) fail("expected a number, got '" + text + "'");
        return v;
    }

    double finite(const std::string& text) const {
        const double v = number(text);
        if (!std::isfinite(v)) fail("expected a finite number, got '" + text + "'");
        return v;
    }

    int integer(const std::string& text) const {
        const double v = finite(text);
        if (v != std::floor(v) || std::abs(v) > 1e9) fail("expected an integer, got '" + text + "'");
        return static_cast<int>(v);
    }

    bool boolean(const std::string& text) const {
        if (text == "true" || text == "1" || text == "yes") return true;
        if (text == "false" || text == "0" || text == "no") return false;
        fail("expected true or false, got '" + text + "'");
    }

    std::vector<double> list(const std::string& text) const {
        std::vector<double> v;
        if (trim(text).empty()) return v;
        for (const std::string& item : split(text, ',')) v.push_back(number(item));
        return v;
    }

    SweepRange range(const std::string& text) const {
        const std::vector<std::string> parts = split(text, ':');
        if (parts.size() != 3) fail("expected start:stop:count, got '" + text + "'");
        SweepRange r{finite(parts[0]), finite(parts[1]), integer(parts[2])};
        if (r.count < 1) fail("sweep count must be at least 1");
        if (r.count > 1 && !(r.stop > r.start)) fail("sweep range must be ordered with start < stop");
        return r;
    }

private:
    std::string source_;
    int line_;
    std::string key_;
};

}  // namespace scenario_detail

/// Parses scenario text. `source` names the input in error messages.
inline Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>") {
    using scenario_detail::Reader;
    Scenario sc;
    std::map<std::string, std::pair<std::string, int>> kv;
    {
        std::istringstream in{std::string(text)};
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = scenario_detail::trim(std::string_view(raw).substr(0, hash));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ScenarioError(source, line_no, "", "expected 'key = value'");
            const std::string key = scenario_detail::trim(std::string_view(line).substr(0, eq));
            const std::string value = scenario_detail::trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) throw ScenarioError(source, line_no, "", "missing key");
            if (kv.count(key)) throw ScenarioError(source, line_no, key, "duplicate key");
            kv[key] = {value, line_no};
        }
    }
    auto reader = [&](const std::string& key) { return Reader(source, kv.at(key).second, key); };
    auto has = [&](const std::string& key) { return kv.count(key) > 0; };
    auto val = [&](const std::string& key) { return kv.at(key).first; };

    static const std::set<std::string> known{
        "name", "g1", "g2", "noise_var", "n_min", "n_max", "pt_db", "p1_db", "p2_db", "eps", "eps11", "eps12",
        "eps22", "t1_th", "t2_th", "schemes", "alpha_rule", "alpha", "penalty", "xi", "max_outer_iters", "n_list",
        "num_points", "oma_sweep", "include_ibl", "pt_db_range", "eps_range", "eps_pt_db", "n_range",
        "oracle_power_steps"};
    for (const auto& [key, entry] : kv)
        if (!known.count(key)) throw ScenarioError(source, entry.second, key, "unknown key");

    if (has("name")) {
        sc.name = val("name");
        for (char c : sc.name)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
                reader("name").fail("name may contain only letters, digits, '_' and '-'");
    }
    auto set_finite = [&](const char* key, double& field) {
        if (has(key)) field = reader(key).finite(val(key));
    };
    set_finite("g1", sc.sys.g1);
    set_finite("g2", sc.sys.g2);
    set_finite("noise_var", sc.sys.noise_var);
    set_finite("n_min", sc.sys.n_min);
    set_finite("n_max", sc.sys.n_max);
    set_finite("pt_db", sc.pt_db);
    sc.p1_db = sc.p2_db = sc.pt_db;
    set_finite("p1_db", sc.p1_db);
    set_finite("p2_db", sc.p2_db);
    sc.sys.p_max = db_to_linear(sc.pt_db);
    try {
        sc.sys.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(source, 0, "system", e.what());
    }
    if (std::max(sc.p1_db, sc.p2_db) > sc.pt_db + 1e-12)
        throw ScenarioError(source, has("p1_db") ? kv.at("p1_db").second : kv.at("p2_db").second, "p1_db/p2_db",
                            "per-user powers may not exceed pt_db");

    auto probability = [&](const char* key, double& field) {
        if (!has(key)) return;
        field = reader(key).finite(val(key));
        if (!(field > 0.0 && field < 1.0)) reader(key).fail("must lie in (0, 1)");
    };
    double eps_all = sc.eps.eps11;
    probability("eps", eps_all);
    sc.eps = StreamReliability::uniform(eps_all);
    probability("eps11", sc.eps.eps11);
    probability("eps12", sc.eps.eps12);
    probability("eps22", sc.eps.eps22);

    set_finite("t1_th", sc.targets.t1_th);
    set_finite("t2_th", sc.targets.t2_th);
    if (sc.targets.t1_th < 0.0) reader("t1_th").fail("must be non-negative");
    if (sc.targets.t2_th < 0.0) reader("t2_th").fail("must be non-negative");

    if (has("schemes")) {
        sc.schemes.clear();
        for (const std::string& item : scenario_detail::split(val("schemes"), ',')) {
            if (item.empty()) continue;
            try {
                const Scheme s = parse_scheme(item);
                if (std::find(sc.schemes.begin(), sc.schemes.end(), s) == sc.schemes.end()) sc.schemes.push_back(s);
            } catch (const std::invalid_argument&) {
                reader("schemes").fail("unknown scheme '" + item + "'");
            }
        }
    }
    if (has("alpha_rule")) {
        const std::string r = val("alpha_rule");
        if (r == "power_ratio") {
            sc.alpha_rule = AlphaRule::power_ratio();
        } else if (r == "fixed") {
            if (!has("alpha")) reader("alpha_rule").fail("fixed rule needs the 'alpha' key");
            const double a = reader("alpha").finite(val("alpha"));
            if (!(a > 0.0 && a < 1.0)) reader("alpha").fail("must lie in (0, 1)");
            sc.alpha_rule = AlphaRule::fixed_value(a);
        } else {
            reader("alpha_rule").fail("expected power_ratio or fixed");
        }
    }
    if (has("penalty")) {
        const std::string p = val("penalty");
        if (p == "message") sc.penalty = PenaltyConvention::MessageLevel;
        else if (p == "stream") sc.penalty = PenaltyConvention::PerStream;
        else reader("penalty").fail("expected message or stream");
    }
    if (has("xi")) {
        sc.xi = reader("xi").finite(val("xi"));
        if (!(sc.xi > 0.0)) reader("xi").fail("must be positive");
    }
    if (has("max_outer_iters")) {
        sc.max_outer_iters = reader("max_outer_iters").integer(val("max_outer_iters"));
        if (sc.max_outer_iters < 1) reader("max_outer_iters").fail("must be at least 1");
    }
    if (has("n_list")) {
        sc.n_list = reader("n_list").list(val("n_list"));
        for (double n : sc.n_list)
            if (!(n > 0.0)) reader("n_list").fail("blocklengths must be positive");
        for (std::size_t i = 1; i < sc.n_list.size(); ++i)
            if (!(sc.n_list[i] > sc.n_list[i - 1])) reader("n_list").fail("blocklengths must be strictly increasing");
    }
    if (has("num_points")) {
        sc.num_points = reader("num_points").integer(val("num_points"));
        if (sc.num_points < 2) reader("num_points").fail("must be at least 2");
    }
    if (has("oma_sweep")) sc.oma_sweep = reader("oma_sweep").boolean(val("oma_sweep")) ? 1 : 0;
    if (has("include_ibl")) sc.include_ibl = reader("include_ibl").boolean(val("include_ibl"));
    if (has("pt_db_range")) sc.pt_db_range = reader("pt_db_range").range(val("pt_db_range"));
    if (has("eps_range")) {
        sc.eps_range = reader("eps_range").range(val("eps_range"));
        if (!(sc.eps_range.start > 0.0) || !(sc.eps_range.stop < 1.0))
            reader("eps_range").fail("error probabilities must lie in (0, 1)");
    }
    if (has("eps_pt_db")) {
        sc.eps_pt_db = reader("eps_pt_db").list(val("eps_pt_db"));
        for (double d : sc.eps_pt_db)
            if (!std::isfinite(d)) reader("eps_pt_db").fail("powers must be finite");
    }
    if (has("n_range")) {
        sc.n_range = reader("n_range").range(val("n_range"));
        if (!(sc.n_range.start > 0.0)) reader("n_range").fail("blocklengths must be positive");
    }
    if (has("oracle_power_steps")) {
        sc.oracle_power_steps = reader("oracle_power_steps").integer(val("oracle_power_steps"));
        if (sc.oracle_power_steps < 2) reader("oracle_power_steps").fail("must be at least 2");
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path, 0, "", "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

}  // namespace rsma
