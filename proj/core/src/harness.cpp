#include "ssi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "ssi/errors.hpp"

namespace ssi::harness {

namespace {

const std::set<std::string>& known_step_ops() {
    static const std::set<std::string> ops = {
        "onboard",        "connect",         "prescription",   "lab_result",
        "share_local",    "share_cloud",     "revoke_vp_access", "fetch_hosted",
        "pickup",         "revoke_credential", "verify_credential", "recovery_setup",
        "share_contacts", "destroy_wallet",  "recover_wallet", "emergency",
        "set_reachable",  "advance_clock",
    };
    return ops;
}

std::vector<std::string> string_list(const Json& j) {
    std::vector<std::string> out;
    for (const auto& item : j) {
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> claim_list(const Json& j) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, value] : j.items()) {
        out.emplace_back(name, value.get<std::string>());
    }
    return out;
}

revocation::Cid cid_from_step(const std::vector<flows::FlowOutcome>& outcomes, const Json& step,
                              const char* field) {
    size_t idx = step.at(field).get<size_t>();
    if (idx >= outcomes.size() || !outcomes[idx].cid) {
        raise(Errc::ParseError, "step reference has no credential id");
    }
    return *outcomes[idx].cid;
}

std::string vp_from_step(const std::vector<flows::FlowOutcome>& outcomes, const Json& step) {
    size_t idx = step.at("vp_from_step").get<size_t>();
    if (idx >= outcomes.size() || !outcomes[idx].vp_id) {
        raise(Errc::ParseError, "step reference has no hosted presentation id");
    }
    return *outcomes[idx].vp_id;
}

flows::FlowOutcome synthetic_outcome(const std::string& name, const std::string& actor,
                                     const std::string& result) {
    flows::FlowOutcome out;
    out.flow_name = name;
    out.success = true;
    out.steps.push_back({actor, name, result});
    return out;
}

flows::FlowOutcome run_step(World& world, const ScenarioScript& script, const Json& step,
                            const std::vector<flows::FlowOutcome>& outcomes) {
    const std::string op = step.at("op").get<std::string>();
    if (op == "onboard") {
        const std::string actor = step.at("actor").get<std::string>();
        auto it = std::find_if(script.actors.begin(), script.actors.end(),
                               [&actor](const auto& a) { return a.first == actor; });
        if (it == script.actors.end()) {
            raise(Errc::ParseError, "onboard step names an undeclared actor: " + actor);
        }
        return flows::flow_onboard(world, actor, it->second);
    }
    if (op == "connect") {
        flows::ConnectOptions options;
        options.authenticate_inviter = step.value("authenticate_inviter", false);
        return flows::flow_connect(world, step.at("inviter"), step.at("responder"), options);
    }
    if (op == "prescription") {
        return flows::flow_prescription(world, step.at("doctor"), step.at("patient"),
                                        claim_list(step.at("claims")));
    }
    if (op == "lab_result") {
        return flows::flow_lab_result(world, step.at("lab"), step.at("patient"),
                                      cid_from_step(outcomes, step, "prescription_from_step"),
                                      claim_list(step.at("claims")));
    }
    if (op == "share_local") {
        std::optional<uint64_t> ttl;
        if (step.contains("ttl")) {
            ttl = step.at("ttl").get<uint64_t>();
        }
        return flows::flow_share_local(world, step.at("patient"), step.at("practitioner"),
                                       string_list(step.at("disclose")), ttl);
    }
    if (op == "share_cloud") {
        return flows::flow_share_cloud(world, step.at("patient"), step.at("practitioner"),
                                       string_list(step.at("disclose")),
                                       step.at("ttl").get<uint64_t>());
    }
    if (op == "revoke_vp_access") {
        return flows::flow_revoke_vp_access(world, step.at("patient"), step.at("practitioner"),
                                            vp_from_step(outcomes, step));
    }
    if (op == "fetch_hosted") {
        return flows::flow_fetch_hosted(world, step.at("practitioner"), step.at("patient"),
                                        vp_from_step(outcomes, step));
    }
    if (op == "pickup") {
        return flows::flow_pickup_all(world, step.at("actor"));
    }
    if (op == "revoke_credential") {
        return flows::flow_revoke_credential(world, step.at("issuer"),
                                             cid_from_step(outcomes, step, "cid_from_step"));
    }
    if (op == "verify_credential") {
        return flows::flow_verify_credential(world, step.at("verifier"),
                                             cid_from_step(outcomes, step, "cid_from_step"));
    }
    if (op == "recovery_setup") {
        return flows::flow_recovery_setup(world, step.at("patient"),
                                          string_list(step.at("contacts")));
    }
    if (op == "share_contacts") {
        return flows::flow_share_contacts(world, step.at("patient"),
                                          string_list(step.at("contacts")));
    }
    if (op == "destroy_wallet") {
        const std::string actor = step.at("actor").get<std::string>();
        world.wallets[actor] = agents::Wallet(actor);
        return synthetic_outcome("destroy_wallet", actor, "wallet wiped");
    }
    if (op == "recover_wallet") {
        return flows::flow_recover_wallet(world, step.at("patient"), step.at("contact"));
    }
    if (op == "emergency") {
        return flows::flow_emergency_access(world, step.at("doctor"), step.at("patient_ref"));
    }
    if (op == "set_reachable") {
        const std::string actor = step.at("actor").get<std::string>();
        world.wallet(actor).reachable = step.at("value").get<bool>();
        return synthetic_outcome("set_reachable", actor,
                                 step.at("value").get<bool>() ? "reachable" : "unreachable");
    }
    if (op == "advance_clock") {
        uint64_t ticks = step.at("ticks").get<uint64_t>();
        world.clock.advance(ticks);
        return synthetic_outcome("advance_clock", "clock", std::to_string(ticks) + " ticks");
    }
    raise(Errc::UnknownFlow, "unknown step op: " + op);
}

bool check_assertion(const Json& assertion, const World& world,
                     const std::vector<flows::FlowOutcome>& outcomes, std::string& detail) {
    const std::string expect = assertion.at("expect").get<std::string>();
    if (expect == "security_records") {
        size_t count = 0;
        for (const auto& tx : world.ledger.channel(ledger::kChannelSecurity).tx_log) {
            if (tx.op_name == "emergency_record") {
                ++count;
            }
        }
        size_t expected = assertion.at("count").get<size_t>();
        detail = "security records " + std::to_string(count) + ", expected " +
                 std::to_string(expected);
        return count == expected;
    }

    size_t idx = assertion.at("step").get<size_t>();
    if (idx >= outcomes.size()) {
        detail = "assertion references step " + std::to_string(idx) + " beyond transcript";
        return false;
    }
    const flows::FlowOutcome& outcome = outcomes[idx];
    detail = "step " + std::to_string(idx) + " (" + outcome.flow_name + ")";

    if (expect == "success") {
        detail += outcome.success ? " succeeded" : " failed with " + outcome.error;
        return outcome.success;
    }
    if (expect == "failure") {
        detail += outcome.success ? " unexpectedly succeeded" : " failed as expected";
        return !outcome.success;
    }
    if (expect == "all_true_report") {
        bool ok = outcome.report.has_value() && outcome.report->valid();
        detail += ok ? " report all-true" : " report not all-true";
        return ok;
    }
    if (expect == "error") {
        const std::string want = assertion.at("value").get<std::string>();
        detail += " error '" + outcome.error + "', expected '" + want + "'";
        return outcome.error == want;
    }
    if (expect == "outcome") {
        const std::string want = assertion.at("value").get<std::string>();
        std::string got = outcome.emergency_outcome
                              ? std::string(ledger::outcome_name(*outcome.emergency_outcome))
                              : "none";
        detail += " outcome " + got + ", expected " + want;
        return got == want;
    }
    if (expect == "notice") {
        const std::string want = assertion.at("value").get<std::string>();
        bool found = false;
        for (const auto& s : outcome.steps) {
            if (s.result.find(want) != std::string::npos) {
                found = true;
            }
        }
        detail += found ? " notice present" : " notice '" + want + "' absent";
        return found;
    }
    detail = "unknown assertion kind " + expect;
    return false;
}

double percentile(std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        return 0.0;
    }
    size_t idx = static_cast<size_t>(p * static_cast<double>(sorted.size() - 1));
    return sorted[idx];
}

BenchReport summarize(const std::string& op, std::vector<double>& samples_ms, double elapsed_s,
                      bool ledger_op) {
    BenchReport report;
    report.op_name = op;
    report.iterations = samples_ms.size();
    report.ledger_op = ledger_op;
    if (samples_ms.empty()) {
        return report;
    }
    double sum = 0.0;
    for (double s : samples_ms) {
        sum += s;
    }
    report.mean_ms = sum / static_cast<double>(samples_ms.size());
    std::sort(samples_ms.begin(), samples_ms.end());
    report.p50_ms = percentile(samples_ms, 0.50);
    report.p95_ms = percentile(samples_ms, 0.95);
    if (elapsed_s > 0.0) {
        report.tps = static_cast<double>(samples_ms.size()) / elapsed_s;
    }
    return report;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Benchmark world: one doctor and one patient, connected.
World bench_world() {
    World world = World::create();
    flows::flow_onboard(world, "bench_doctor", ledger::Role::Practitioner);
    flows::flow_onboard(world, "bench_patient", ledger::Role::Patient);
    flows::flow_connect(world, "bench_patient", "bench_doctor");
    return world;
}

BenchReport bench_create_did(uint64_t iterations) {
    std::vector<double> samples;
    samples.reserve(iterations);
    for (uint64_t i = 0; i < iterations; ++i) {
        auto t0 = Clock::now();
        auto kp = crypto::generate_keypair();
        auto created = identity::create_did(identity::DidKind::Pairwise, kp, "mediator:main", i);
        samples.push_back(ms_since(t0));
        (void)created;
    }
    return summarize("create_did", samples, 0.0, false);
}

BenchReport bench_create_vc(uint64_t iterations) {
    World world = bench_world();
    auto& doctor = world.wallet("bench_doctor");
    flows::flow_prescription(world, "bench_doctor", "bench_patient", {{"warmup", "x"}});
    auto& registry = world.registries.at(*doctor.registry_id);
    const identity::Did subject = doctor.connection("bench_patient").their_doc.did;

    std::vector<double> samples;
    samples.reserve(iterations);
    for (uint64_t i = 0; i < iterations; ++i) {
        auto t0 = Clock::now();
        auto vc = credentials::issue_vc(doctor.anywise_did(), doctor.keys_of("self"), registry,
                                        subject, {{"rx", "order " + std::to_string(i)}},
                                        world.ledger, world.clock.now());
        samples.push_back(ms_since(t0));
        (void)vc;
    }
    return summarize("create_vc", samples, 0.0, false);
}

BenchReport bench_verify_vc(uint64_t iterations) {
    World world = bench_world();
    auto outcome = flows::flow_prescription(world, "bench_doctor", "bench_patient",
                                            {{"rx", "complete blood count"}});
    auto& patient = world.wallet("bench_patient");
    const auto& vc = patient.credential(*outcome.cid);
    const auto& registry = world.registries.at(vc.registry_id);
    auto proof = revocation::prove_non_revocation(registry, vc.cid);

    std::vector<double> samples;
    samples.reserve(iterations);
    for (uint64_t i = 0; i < iterations; ++i) {
        auto t0 = Clock::now();
        auto report = credentials::verify_vc(vc, world.ledger, world.clock.now(), &proof);
        samples.push_back(ms_since(t0));
        if (!report.valid()) {
            raise(Errc::VerificationRefused, "bench credential failed verification");
        }
    }
    return summarize("verify_vc", samples, 0.0, false);
}

BenchReport bench_didcomm_roundtrip(uint64_t iterations) {
    World world = bench_world();
    auto& patient = world.wallet("bench_patient");
    auto& doctor = world.wallet("bench_doctor");
    const std::string doctor_pairwise = doctor.did_of("bench_patient").id_string;

    std::vector<double> samples;
    samples.reserve(iterations);
    for (uint64_t i = 0; i < iterations; ++i) {
        Json message{{"type", "ping"}, {"n", i}};
        auto t0 = Clock::now();
        world.mediator.deliver(patient.pack_envelope("bench_doctor", message));
        auto envelopes = world.mediator.pickup(doctor_pairwise, 1);
        Json received = doctor.unpack_envelope(envelopes.front(), world.mediator.doc());
        samples.push_back(ms_since(t0));
        (void)received;
    }
    return summarize("didcomm_roundtrip", samples, 0.0, false);
}

BenchReport bench_connect(uint64_t iterations) {
    World world = World::create();
    flows::flow_onboard(world, "bench_a", ledger::Role::Patient);
    flows::flow_onboard(world, "bench_b", ledger::Role::Practitioner);
    auto& a = world.wallet("bench_a");
    auto& b = world.wallet("bench_b");

    std::vector<double> samples;
    samples.reserve(iterations);
    for (uint64_t i = 0; i < iterations; ++i) {
        const std::string alias_a = "peer_b_" + std::to_string(i);
        const std::string alias_b = "peer_a_" + std::to_string(i);
        const uint64_t now = world.clock.now();

        auto t0 = Clock::now();
        Bytes qr = a.make_invitation(alias_a, world.mediator, now).to_bytes();
        auto invitation = identity::OobInvitation::parse(qr);
        auto [bdid, bdoc] =
            b.create_did(identity::DidKind::Pairwise, alias_b, world.mediator.endpoint(), now);
        world.mediator.request_mediation(bdoc, now);
        agents::Connection conn;
        conn.their_doc = invitation.inviter_doc;
        b.connections[alias_b] = conn;
        Bytes challenge = concat(invitation.nonce, as_span(bdid.id_string));
        Json request{
            {"type", "connection-request"},
            {"doc", bdoc.to_json()},
            {"nonce_b58", b58(invitation.nonce)},
            {"anywise",
             Json{{"did", b.anywise_did().to_json()},
                  {"sig", b58(crypto::sign(b.keys_of("self").private_key, as_span(challenge)))}}},
        };
        world.mediator.deliver(b.pack_first_contact(alias_b, request));
        auto envelopes = world.mediator.pickup(invitation.inviter_pairwise_did.id_string, 1);
        flows::accept_connection_request(world, a, envelopes.front());
        samples.push_back(ms_since(t0));
    }
    return summarize("connect", samples, 0.0, false);
}

BenchReport bench_read_did(uint64_t iterations) {
    World world = World::create();
    flows::flow_onboard(world, "bench_reader", ledger::Role::Patient);
    const size_t population = 512;
    std::vector<std::string> ids;
    ids.reserve(population);
    for (size_t i = 0; i < population; ++i) {
        auto kp = crypto::generate_keypair();
        auto [did, doc] =
            identity::create_did(identity::DidKind::Anywise, kp, world.mediator.endpoint(), i);
        world.ledger.register_member(did.id_string, ledger::Party::Patient);
        world.ledger.put_did(did.id_string, did, doc, i);
        ids.push_back(did.id_string);
    }

    std::vector<double> samples;
    samples.reserve(iterations);
    auto start = Clock::now();
    for (uint64_t i = 0; i < iterations; ++i) {
        auto t0 = Clock::now();
        auto doc = world.ledger.get_did(ids[i % population]);
        samples.push_back(ms_since(t0));
        (void)doc;
    }
    double elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    return summarize("read_did", samples, elapsed_s, true);
}

BenchReport bench_write_did(uint64_t iterations, uint64_t tps_target) {
    World world = World::create();
    struct Prepared {
        identity::Did did;
        identity::DidDocument doc;
    };
    std::vector<Prepared> prepared;
    prepared.reserve(iterations);
    for (uint64_t i = 0; i < iterations; ++i) {
        auto kp = crypto::generate_keypair();
        auto [did, doc] =
            identity::create_did(identity::DidKind::Anywise, kp, world.mediator.endpoint(), i);
        world.ledger.register_member(did.id_string, ledger::Party::Patient);
        prepared.push_back({did, doc});
    }

    std::vector<double> samples;
    samples.reserve(iterations);
    auto start = Clock::now();
    for (uint64_t i = 0; i < iterations; ++i) {
        if (tps_target > 0) {
            auto due = start + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(
                                       static_cast<double>(i) /
                                       static_cast<double>(tps_target)));
            std::this_thread::sleep_until(due);
        }
        auto t0 = Clock::now();
        world.ledger.put_did(prepared[i].did.id_string, prepared[i].did, prepared[i].doc, i);
        samples.push_back(ms_since(t0));
    }
    double elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    return summarize("write_did", samples, elapsed_s, true);
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

ScenarioScript ScenarioScript::parse(const Json& j) {
    if (!j.is_object()) {
        raise(Errc::ParseError, "scenario root must be an object");
    }
    ScenarioScript script;
    script.seed = j.value("seed", uint64_t{0});
    if (!j.contains("actors") || !j.at("actors").is_array()) {
        raise(Errc::ParseError, "scenario needs an actors array");
    }
    for (const auto& actor : j.at("actors")) {
        auto role = ledger::role_from_name(actor.at("role").get<std::string>());
        if (!role) {
            raise(Errc::ParseError,
                  "unknown role " + actor.at("role").get<std::string>());
        }
        script.actors.emplace_back(actor.at("name").get<std::string>(), *role);
    }
    script.steps = j.value("steps", Json::array());
    script.assertions = j.value("assertions", Json::array());
    for (const auto& step : script.steps) {
        if (!step.is_object() || !step.contains("op")) {
            raise(Errc::ParseError, "every step needs an op");
        }
        if (!known_step_ops().contains(step.at("op").get<std::string>())) {
            raise(Errc::ParseError, "unknown step op: " + step.at("op").get<std::string>());
        }
    }
    return script;
}

ScenarioScript ScenarioScript::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(Errc::ParseError, "cannot open scenario file " + path);
    }
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        raise(Errc::ParseError, "scenario file is not valid JSON: " + path);
    }
    return parse(j);
}

ScenarioResult run_script(const ScenarioScript& script) {
    crypto::seed_rng(script.seed);
    ScenarioResult result;
    result.world = World::create();
    std::ostringstream transcript;
    transcript << "seed " << script.seed << "\n";

    bool failed = false;
    std::string first_failure;

    size_t index = 0;
    for (const auto& step : script.steps) {
        flows::FlowOutcome outcome;
        try {
            outcome = run_step(result.world, script, step, result.outcomes);
        } catch (const Error& e) {
            outcome.flow_name = step.at("op").get<std::string>();
            outcome.success = false;
            outcome.error = std::string(errc_name(e.code()));
            outcome.steps.push_back({"harness", "abort", e.what()});
        }
        transcript << "step " << index << " " << outcome.flow_name << ": "
                   << (outcome.success ? "ok" : "error " + outcome.error);
        if (outcome.cid) {
            transcript << " cid " << b58(*outcome.cid);
        }
        if (outcome.vp_id) {
            transcript << " vp " << *outcome.vp_id;
        }
        if (outcome.emergency_outcome) {
            transcript << " outcome " << ledger::outcome_name(*outcome.emergency_outcome);
        }
        if (outcome.report) {
            transcript << " report "
                       << (outcome.report->valid() ? "all-true" : "not-all-true");
        }
        transcript << "\n";
        result.outcomes.push_back(std::move(outcome));
        ++index;
    }

    size_t assert_index = 0;
    for (const auto& assertion : script.assertions) {
        std::string detail;
        bool ok = check_assertion(assertion, result.world, result.outcomes, detail);
        transcript << "assert " << assert_index << ": " << (ok ? "pass" : "FAIL") << " ("
                   << detail << ")\n";
        if (!ok && !failed) {
            failed = true;
            first_failure = "assertion " + std::to_string(assert_index) + ": " + detail;
        }
        ++assert_index;
    }

    // Post-run structural checks, always on.
    std::string violation;
    bool replay_ok = ledger_replay_ok(result.world, &violation);
    transcript << "post ledger_replay: " << (replay_ok ? "pass" : "FAIL " + violation) << "\n";
    bool confidential = mediator_confidentiality_ok(result.world, &violation);
    transcript << "post mediator_confidentiality: "
               << (confidential ? "pass" : "FAIL " + violation) << "\n";
    bool no_pairwise = ledger_free_of_pairwise(result.world, &violation);
    transcript << "post ledger_no_pairwise: " << (no_pairwise ? "pass" : "FAIL " + violation)
               << "\n";
    failed = failed || !replay_ok || !confidential || !no_pairwise;

    transcript << "result: " << (failed ? "FAIL" : "PASS") << "\n";
    if (failed && !first_failure.empty()) {
        transcript << "first failure: " << first_failure << "\n";
    }
    result.exit_code = failed ? 1 : 0;
    result.transcript = transcript.str();
    return result;
}

ScenarioResult run_scenario(const std::string& path, std::optional<uint64_t> seed_override,
                            const std::string& snapshot_path) {
    ScenarioScript script;
    try {
        script = ScenarioScript::load_file(path);
    } catch (const Error& e) {
        ScenarioResult result;
        result.exit_code = 2;
        result.transcript = std::string("parse error: ") + e.what() + "\n";
        return result;
    }
    if (seed_override) {
        script.seed = *seed_override;
    }
    ScenarioResult result = run_script(script);
    if (!snapshot_path.empty()) {
        std::ofstream out(snapshot_path);
        out << canonical_text(result.world.ledger.export_snapshot()) << "\n";
    }
    return result;
}

bool mediator_confidentiality_ok(const World& world, std::string* violation) {
    std::set<std::string> claim_values;
    for (const auto& [name, wallet] : world.wallets) {
        for (const auto& [cid, vc] : wallet.creds) {
            for (const auto& claim : vc.claims) {
                claim_values.insert(claim.value);
            }
        }
    }
    Json state = world.mediator.export_state();
    std::set<std::string> disclosed;
    for (const auto& [vp_id, hosted] : state.at("hosted").items()) {
        for (const auto& dc : hosted.at("vp").at("disclosed")) {
            for (const auto& claim : dc.at("claims")) {
                disclosed.insert(claim.at("value").get<std::string>());
            }
        }
    }
    const std::string blob = canonical_text(state);
    for (const auto& value : claim_values) {
        if (disclosed.contains(value)) {
            continue;
        }
        if (blob.find(value) != std::string::npos) {
            if (violation != nullptr) {
                *violation = "claim value visible to mediator: " + value;
            }
            return false;
        }
    }
    return true;
}

bool ledger_free_of_pairwise(const World& world, std::string* violation) {
    const std::string blob = canonical_text(world.ledger.export_snapshot());
    for (const auto& [name, wallet] : world.wallets) {
        for (const auto& [alias, entry] : wallet.dids) {
            if (entry.first.kind != identity::DidKind::Pairwise) {
                continue;
            }
            if (blob.find(entry.first.id_string) != std::string::npos) {
                if (violation != nullptr) {
                    *violation = "pairwise did on ledger: " + entry.first.id_string;
                }
                return false;
            }
        }
    }
    return true;
}

bool ledger_replay_ok(const World& world, std::string* violation) {
    for (const auto channel_id :
         {ledger::kChannelDids, ledger::kChannelBackups, ledger::kChannelRegistries,
          ledger::kChannelSecurity}) {
        const auto& channel = world.ledger.channel(channel_id);
        if (world.ledger.replay_state(channel_id) != channel.state) {
            if (violation != nullptr) {
                *violation = "replay mismatch on channel " + std::string(channel_id);
            }
            return false;
        }
    }
    return true;
}

std::vector<std::string> default_bench_ops() {
    return {"create_did", "create_vc",  "verify_vc", "didcomm_roundtrip",
            "connect",    "read_did",   "write_did"};
}

std::vector<BenchReport> run_bench(const std::vector<std::string>& ops, uint64_t iterations,
                                   uint64_t tps_target) {
    std::vector<BenchReport> reports;
    if (iterations == 0) {
        return reports;  // header-only CSV
    }
    for (const auto& op : ops) {
        try {
            if (op == "create_did") {
                reports.push_back(bench_create_did(iterations));
            } else if (op == "create_vc") {
                reports.push_back(bench_create_vc(iterations));
            } else if (op == "verify_vc") {
                reports.push_back(bench_verify_vc(iterations));
            } else if (op == "didcomm_roundtrip") {
                reports.push_back(bench_didcomm_roundtrip(iterations));
            } else if (op == "connect") {
                reports.push_back(bench_connect(iterations));
            } else if (op == "read_did") {
                reports.push_back(bench_read_did(iterations));
            } else if (op == "write_did") {
                reports.push_back(bench_write_did(iterations, tps_target));
            } else {
                raise(Errc::UnknownFlow, "unknown bench op: " + op);
            }
        } catch (const std::exception&) {
            BenchReport failed;
            failed.op_name = op;
            failed.iterations = iterations;
            failed.mean_ms = failed.p50_ms = failed.p95_ms = failed.tps =
                std::numeric_limits<double>::quiet_NaN();
            failed.failed = true;
            reports.push_back(failed);
        }
    }
    return reports;
}

std::string bench_csv(const std::vector<BenchReport>& reports) {
    std::ostringstream out;
    out << kBenchCsvHeader << "\n";
    for (const auto& report : reports) {
        out << report.op_name << "," << report.iterations << "," << format_double(report.mean_ms)
            << "," << format_double(report.p50_ms) << "," << format_double(report.p95_ms) << ",";
        if (report.ledger_op || report.failed) {
            out << format_double(report.tps);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace ssi::harness
