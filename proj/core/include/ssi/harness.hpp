#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssi/flows.hpp"
#include "ssi/world.hpp"

namespace ssi::harness {

/// Pure-data scenario: fixed seed, declared actors, ordered flow steps and
/// expected-outcome assertions. Identical (script, seed) pairs replay to
/// identical transcripts.
struct ScenarioScript {
    uint64_t seed = 0;
    std::vector<std::pair<std::string, ledger::Role>> actors;
    Json steps = Json::array();
    Json assertions = Json::array();

    static ScenarioScript parse(const Json& j);
    static ScenarioScript load_file(const std::string& path);
};

struct ScenarioResult {
    int exit_code = 0;  // 0 pass, 1 assertion failure, 2 parse/usage error
    std::string transcript;
    std::vector<flows::FlowOutcome> outcomes;
    World world;
};

ScenarioResult run_script(const ScenarioScript& script);

/// Runs a scenario file end to end; optionally writes the final ledger
/// snapshot. Parse failures yield exit code 2 with the message in the
/// transcript.
ScenarioResult run_scenario(const std::string& path,
                            std::optional<uint64_t> seed_override = std::nullopt,
                            const std::string& snapshot_path = "");

/// Structural sweep of the mediator's stored bytes: no wallet claim value may
/// appear outside the deliberately disclosed claims of hosted presentations.
bool mediator_confidentiality_ok(const World& world, std::string* violation = nullptr);

/// No pairwise DID controlled by any wallet may appear anywhere in the ledger.
bool ledger_free_of_pairwise(const World& world, std::string* violation = nullptr);

/// Every channel's state must equal a fresh replay of its transaction log.
bool ledger_replay_ok(const World& world, std::string* violation = nullptr);

struct BenchReport {
    std::string op_name;
    uint64_t iterations = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double tps = 0.0;
    bool ledger_op = false;
    bool failed = false;  // reported as NaN row
};

inline constexpr std::string_view kBenchCsvHeader = "op,iters,mean_ms,p50_ms,p95_ms,tps";

std::vector<std::string> default_bench_ops();

/// Wall-clock measurement of the core operations; `tps_target` > 0 paces the
/// write_did submissions at that issue rate.
std::vector<BenchReport> run_bench(const std::vector<std::string>& ops, uint64_t iterations,
                                   uint64_t tps_target);

std::string bench_csv(const std::vector<BenchReport>& reports);

}  // namespace ssi::harness
