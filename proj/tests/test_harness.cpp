#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ssi/harness.hpp"
#include "support/test_util.hpp"

using namespace ssi;

namespace {

std::string scenario(const char* name) {
    return std::string(SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("bundled alice_bob scenario passes with an all-true verification") {
    auto result = harness::run_scenario(scenario("alice_bob.scn"));
    INFO(result.transcript);
    CHECK(result.exit_code == 0);
    CHECK(result.transcript.find("report all-true") != std::string::npos);
    CHECK(result.transcript.find("result: PASS") != std::string::npos);
}

TEST_CASE("bundled emergency scenario leaves exactly one security record") {
    auto result = harness::run_scenario(scenario("emergency.scn"));
    INFO(result.transcript);
    CHECK(result.exit_code == 0);
    CHECK(result.transcript.find("outcome KeyReleased") != std::string::npos);
}

TEST_CASE("bundled access revocation scenario exercises the notice path") {
    auto result = harness::run_scenario(scenario("access_revocation.scn"));
    INFO(result.transcript);
    CHECK(result.exit_code == 0);
}

TEST_CASE("transcripts are byte-identical under a fixed seed") {
    auto first = harness::run_scenario(scenario("alice_bob.scn"));
    auto second = harness::run_scenario(scenario("alice_bob.scn"));
    CHECK(first.transcript == second.transcript);

    auto reseeded = harness::run_scenario(scenario("alice_bob.scn"), uint64_t{43});
    CHECK(reseeded.exit_code == 0);
    CHECK(reseeded.transcript != first.transcript);  // different dids under a new seed
}

TEST_CASE("scenario parse errors exit with code 2") {
    auto missing = harness::run_scenario("/nonexistent/path.scn");
    CHECK(missing.exit_code == 2);

    Json bad{{"seed", 1},
             {"actors", Json::array({Json{{"name", "a"}, {"role", "Patient"}}})},
             {"steps", Json::array({Json{{"op", "teleport"}}})}};
    CHECK_THROWS_AS(harness::ScenarioScript::parse(bad), Error);

    Json bad_role{{"actors", Json::array({Json{{"name", "a"}, {"role", "Wizard"}}})}};
    CHECK_THROWS_AS(harness::ScenarioScript::parse(bad_role), Error);
}

TEST_CASE("failed assertions exit with code 1 and name the first failure") {
    Json script{
        {"seed", 5},
        {"actors", Json::array({Json{{"name", "a"}, {"role", "Patient"}}})},
        {"steps", Json::array({Json{{"op", "onboard"}, {"actor", "a"}},
                               Json{{"op", "onboard"}, {"actor", "a"}}})},
        {"assertions", Json::array({Json{{"step", 1}, {"expect", "success"}}})},
    };
    auto result = harness::run_script(harness::ScenarioScript::parse(script));
    CHECK(result.exit_code == 1);
    CHECK(result.transcript.find("first failure: assertion 0") != std::string::npos);
}

TEST_CASE("csv schema is pinned, zero iterations yields header only") {
    CHECK(harness::kBenchCsvHeader == std::string("op,iters,mean_ms,p50_ms,p95_ms,tps"));
    auto empty = harness::run_bench({"create_did"}, 0, 0);
    CHECK(empty.empty());
    CHECK(harness::bench_csv(empty) == "op,iters,mean_ms,p50_ms,p95_ms,tps\n");
}

TEST_CASE("write_did paced at a target rate commits at roughly that rate") {
    auto reports = harness::run_bench({"write_did"}, 250, 200);
    REQUIRE(reports.size() == 1);
    CHECK_FALSE(reports[0].failed);
    CHECK(reports[0].tps >= 150.0);
    CHECK(reports[0].tps <= 260.0);
}

TEST_CASE("small bench run produces finite statistics") {
    auto reports = harness::run_bench(harness::default_bench_ops(), 25, 0);
    REQUIRE(reports.size() == 7);
    for (const auto& report : reports) {
        INFO(report.op_name);
        CHECK_FALSE(report.failed);
        CHECK(report.iterations == 25);
        CHECK(report.mean_ms >= 0.0);
        CHECK(report.p95_ms >= report.p50_ms);
        if (report.ledger_op) {
            CHECK(report.tps > 0.0);
        }
    }
    auto csv = harness::bench_csv(reports);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);  // header + one row per op

    auto unknown = harness::run_bench({"warp_drive"}, 5, 0);
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0].failed);
    CHECK(harness::bench_csv(unknown).find("nan") != std::string::npos);
}
