#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssi/world.hpp"

namespace ssi::flows {

struct StepRecord {
    std::string actor;
    std::string action;
    std::string result;

    Json to_json() const { return Json{{"actor", actor}, {"action", action}, {"result", result}}; }
};

struct TrustedContactSet {
    std::string patient_did;
    std::vector<identity::Did> contacts;  // pinged in registration order
    bool registered_with_msp = false;
};

/// The contact set the MSP holds for a patient (empty and unregistered when
/// the patient never opted in).
TrustedContactSet trusted_contacts(const World& world, const std::string& patient_did);

struct FlowOutcome {
    std::string flow_name;
    std::vector<StepRecord> steps;
    bool success = false;
    std::string error;  // error code name when the flow aborted

    std::optional<credentials::VerificationReport> report;
    std::optional<revocation::Cid> cid;
    std::optional<std::string> vp_id;
    std::optional<ledger::EmergencyRecord::Outcome> emergency_outcome;

    Json to_json() const;
};

struct ConnectOptions {
    /// When set, the responder demands and verifies the inviter's anywise
    /// identity; when clear, the inviter's anywise DID is never transmitted.
    bool authenticate_inviter = false;
};

struct AcceptedConnection {
    std::string alias;
    std::optional<ByteArray<16>> reverse_nonce;
};

/// Inviter-side processing of a queued connection request. Verifies the
/// responder's anywise challenge against the ledger; nothing is stored on
/// failure.
AcceptedConnection accept_connection_request(World& world, agents::Wallet& inviter,
                                             const agents::Envelope& env);

FlowOutcome flow_onboard(World& world, const std::string& actor, ledger::Role role);

FlowOutcome flow_connect(World& world, const std::string& inviter, const std::string& responder,
                         ConnectOptions options = {});

FlowOutcome flow_share_local(World& world, const std::string& patient,
                             const std::string& practitioner,
                             const std::vector<std::string>& claim_names,
                             std::optional<uint64_t> ttl = std::nullopt);

FlowOutcome flow_share_cloud(World& world, const std::string& patient,
                             const std::string& practitioner,
                             const std::vector<std::string>& claim_names, uint64_t ttl);

FlowOutcome flow_revoke_vp_access(World& world, const std::string& patient,
                                  const std::string& practitioner, const std::string& vp_id);

/// Practitioner re-fetches a hosted presentation; failures land in `error`.
FlowOutcome flow_fetch_hosted(World& world, const std::string& practitioner,
                              const std::string& patient, const std::string& vp_id);

FlowOutcome flow_prescription(World& world, const std::string& doctor, const std::string& patient,
                              const std::vector<std::pair<std::string, std::string>>& rx_claims);

FlowOutcome flow_lab_result(World& world, const std::string& lab, const std::string& patient,
                            const revocation::Cid& prescription_cid,
                            const std::vector<std::pair<std::string, std::string>>& result_claims);

FlowOutcome flow_revoke_credential(World& world, const std::string& issuer,
                                   const revocation::Cid& cid);

/// Holder-side check of a stored credential against the ledger, with a fresh
/// non-revocation proof.
FlowOutcome flow_verify_credential(World& world, const std::string& verifier,
                                   const revocation::Cid& cid);

FlowOutcome flow_recovery_setup(World& world, const std::string& patient,
                                const std::vector<std::string>& contacts);

/// Contact-list-only opt-in (no backup): emergency branch (b) material.
FlowOutcome flow_share_contacts(World& world, const std::string& patient,
                                const std::vector<std::string>& contacts);

FlowOutcome flow_recover_wallet(World& world, const std::string& patient,
                                const std::string& contact);

FlowOutcome flow_emergency_access(World& world, const std::string& doctor,
                                  const std::string& patient_identity_ref);

/// Drains every mediated queue the actor's wallet owns and unpacks the
/// messages; the step result lists the message types seen.
FlowOutcome flow_pickup_all(World& world, const std::string& actor);

}  // namespace ssi::flows
