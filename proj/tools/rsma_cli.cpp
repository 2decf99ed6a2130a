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


// Command-line driver for the experiment sweeps.
//
//   rsma_cli <region|minlen-power|minlen-eps|sumrate|verify>
//            --scenario FILE [--out DIR] [--format csv|json] [--workers K]
//
// Exit codes: 0 success, 2 configuration error, 3 nothing feasible in the
// whole run (or a failed verification), 1 other errors.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "rsma/rsma.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

int column_index(const rsma::Dataset& d, const std::string& name) {
    for (std::size_t i = 0; i < d.columns.size(); ++i)
        if (d.columns[i] == name) return static_cast<int>(i);
    return -1;
}

bool all_infeasible(const rsma::Dataset& d) {
    const int col = column_index(d, "status");
    if (col < 0 || d.rows.empty()) return false;
    for (const auto& row : d.rows)
        if (rsma::format_cell(row[static_cast<std::size_t>(col)]) != "infeasible") return false;
    return true;
}

bool verification_failed(const rsma::Dataset& d) {
    for (const char* name : {"lower_ok", "upper_ok", "exact_ok"}) {
        const int col = column_index(d, name);
        if (col < 0) continue;
        for (const auto& row : d.rows)
            if (rsma::format_cell(row[static_cast<std::size_t>(col)]) != "1") return true;
    }
    return false;
}

void write_dataset(const rsma::Dataset& d, const std::string& out_dir, const std::string& format) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / (d.name + (format == "json" ? ".json" : ".csv"));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (format == "json")
        out << rsma::to_json(d).dump(2) << '\n';
    else
        rsma::write_csv(d, out);
    std::cout << path.string() << ": " << d.rows.size() << " rows\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-blocklength uplink RSMA experiments"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "results";
    std::string format = "csv";
    int workers = 1;

    struct Command {
        const char* name;
        const char* help;
        rsma::Dataset (*run)(const rsma::Scenario&, int);
    };
    const Command commands[] = {
        {"region", "rate-region curves per scheme and blocklength", rsma::run_region_experiment},
        {"minlen-power", "minimum blocklength versus power budget", rsma::run_blocklength_vs_power},
        {"minlen-eps", "minimum blocklength versus error probability", rsma::run_blocklength_vs_epsilon},
        {"sumrate", "largest sum rate versus blocklength", rsma::run_sumrate_vs_blocklength},
        {"verify", "solver against the brute-force oracle", rsma::run_verification},
    };
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const Command* chosen = nullptr;
    for (const Command& c : commands)
        if (app.got_subcommand(c.name)) chosen = &c;

    rsma::Scenario scenario;
    try {
        scenario = rsma::load_scenario(scenario_path);
    } catch (const rsma::ScenarioError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const rsma::Dataset d = chosen->run(scenario, workers);
        write_dataset(d, out_dir, format);
        if (std::string(chosen->name) == "verify" && verification_failed(d)) {
            std::cerr << "verification failed: see " << d.name << '\n';
            return kExitInfeasible;
        }
        if (all_infeasible(d)) {
            std::cerr << "no sweep point is feasible\n";
            return kExitInfeasible;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
