#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "ssi/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Self-sovereign EHR protocol stack: scenario runner and benchmarks"};
    app.require_subcommand(1);

    // ssi scenario run <file> [--seed N] [--snapshot out.json]
    auto* scenario = app.add_subcommand("scenario", "Run scripted multi-actor episodes");
    auto* scenario_run = scenario->add_subcommand("run", "Execute a scenario file");
    std::string scenario_file;
    std::optional<uint64_t> seed_override;
    std::string snapshot_path;
    scenario_run->add_option("file", scenario_file, "Scenario JSON file")->required();
    scenario_run->add_option("--seed", seed_override, "Override the script's RNG seed");
    scenario_run->add_option("--snapshot", snapshot_path, "Write the final ledger snapshot here");

    // ssi bench [--ops list] [--iters N] [--tps N] [--csv out.csv]
    auto* bench = app.add_subcommand("bench", "Measure per-operation latency and ledger TPS");
    std::vector<std::string> ops = ssi::harness::default_bench_ops();
    uint64_t iterations = 10000;
    uint64_t tps_target = 0;
    std::string csv_path;
    bench->add_option("--ops", ops, "Operations to measure")->delimiter(',');
    bench->add_option("--iters", iterations, "Iterations per operation");
    bench->add_option("--tps", tps_target, "Target issue rate for write_did (0 = unpaced)");
    bench->add_option("--csv", csv_path, "Write the report as CSV to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (scenario_run->parsed()) {
        auto result = ssi::harness::run_scenario(scenario_file, seed_override, snapshot_path);
        std::cout << result.transcript;
        return result.exit_code;
    }

    if (bench->parsed()) {
        auto reports = ssi::harness::run_bench(ops, iterations, tps_target);
        std::string csv = ssi::harness::bench_csv(reports);
        if (csv_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(csv_path);
            if (!out) {
                std::cerr << "cannot write " << csv_path << "\n";
                return 2;
            }
            out << csv;
            std::cout << csv;
        }
        return 0;
    }
    return 2;
}
