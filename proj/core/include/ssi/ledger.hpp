#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssi/crypto.hpp"
#include "ssi/identity.hpp"
#include "ssi/revocation.hpp"

namespace ssi::ledger {

enum class Role : uint8_t { Patient, Practitioner, Laboratory, Admin };

/// ACL domain: the four certificate roles plus the MSP system identity.
enum class Party : uint8_t { Patient, Practitioner, Laboratory, Admin, Msp };

enum class Access : uint8_t { Read, Write };

std::string_view role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);
Party party_of(Role r);

/// Channel permission table. Registry and DID reads are world-readable, so
/// every party reads `dids` and `registries`; writes stay role-scoped.
bool party_may(Party p, std::string_view channel_id, Access access);

std::vector<std::string> channels_for_role(Role r);

inline constexpr std::string_view kChannelDids = "dids";
inline constexpr std::string_view kChannelBackups = "backups";
inline constexpr std::string_view kChannelRegistries = "registries";
inline constexpr std::string_view kChannelSecurity = "security";

/// Structural stand-in for the X.509 role certificate: the CA root key signs
/// the subject binding instead of an ASN.1 body.
struct Certificate {
    identity::Did subject_did;
    crypto::Key32 subject_public_key{};
    Role role = Role::Patient;
    uint64_t issued_at = 0;
    uint64_t expires_at = 0;
    crypto::Signature ca_signature{};

    Bytes signing_bytes() const;
    Json to_json() const;
    static Certificate from_json(const Json& j);
};

struct CertificateSigningRequest {
    identity::Did subject_did;
    identity::DidDocument document;
    crypto::Key32 public_key{};
    Role role_claim = Role::Patient;
    crypto::Signature applicant_signature{};

    Bytes signing_bytes() const;
};

CertificateSigningRequest make_csr(const identity::Did& did, const identity::DidDocument& doc,
                                   const crypto::KeyPair& keys, Role role_claim);

struct Transaction {
    crypto::Digest tx_id;
    std::string submitter_did;
    std::string channel_id;
    std::string op_name;
    std::string payload;  // canonical JSON text
    uint64_t block_height = 0;
    uint64_t timestamp = 0;

    Json to_json() const;
};

struct Channel {
    std::string channel_id;
    std::map<std::string, std::string> state;
    std::vector<Transaction> tx_log;
};

struct EmergencyRecord {
    enum class Outcome : uint8_t { KeyReleased, ContactListReleased, Denied };

    std::string patient_did;
    std::string requester_did;
    std::string msp_id;
    std::string contact_ack;  // empty unless a contact answered
    uint64_t triggered_at = 0;
    Outcome outcome = Outcome::Denied;

    Json to_json() const;
    static EmergencyRecord from_json(const Json& j);
};

std::string_view outcome_name(EmergencyRecord::Outcome o);

/// Single-node deterministic ledger: append-only per-channel logs, one block
/// per transaction, state fully replayable from the logs.
class Ledger {
  public:
    Ledger();

    void register_member(const std::string& did_id, Party party);
    std::optional<Party> member_party(const std::string& did_id) const;

    Transaction submit_tx(const std::string& submitter_did, const std::string& channel_id,
                          const std::string& op_name, const Json& payload, uint64_t now);
    std::string query(const std::string& caller_did, const std::string& channel_id,
                      const std::string& key) const;

    Transaction put_did(const std::string& submitter_did, const identity::Did& did,
                        const identity::DidDocument& doc, uint64_t now);
    identity::DidDocument get_did(const identity::Did& did) const;
    identity::DidDocument get_did(const std::string& id_string) const;
    bool has_did(const std::string& id_string) const;

    Transaction anchor_backup_hash(const std::string& submitter_did, const crypto::Digest& digest,
                                   uint64_t sequence_no, uint64_t now);
    crypto::Digest backup_hash(const std::string& caller_did, const std::string& patient_did,
                               uint64_t sequence_no) const;

    Transaction anchor_registry_state(const std::string& submitter_did,
                                      const revocation::RegistryState& state, uint64_t now);
    std::optional<revocation::RegistryState> latest_registry_state(
        const revocation::RegistryId& registry_id) const;
    std::optional<revocation::RegistryState> registry_state_at(
        const revocation::RegistryId& registry_id, uint64_t epoch) const;

    Transaction record_emergency_access(const std::string& submitter_did,
                                        const EmergencyRecord& record, uint64_t now);
    std::vector<EmergencyRecord> emergency_records(const std::string& caller_did) const;

    const Channel& channel(std::string_view channel_id) const;
    uint64_t height() const { return height_; }

    /// Recomputes a channel's state from its transaction log.
    std::map<std::string, std::string> replay_state(std::string_view channel_id) const;

    Json export_snapshot() const;
    static Ledger import_snapshot(const Json& snapshot);

  private:
    Channel& channel_mut(std::string_view channel_id);
    void check_access(const std::string& did_id, std::string_view channel_id, Access access) const;

    std::map<std::string, Channel> channels_;
    std::map<std::string, Party> members_;
    uint64_t height_ = 0;
};

/// Trust root: verifies CSR self-signatures and DID bindings, issues role
/// certificates, and keeps the DID <-> real-identity match used in
/// emergencies.
class CertificateAuthority {
  public:
    CertificateAuthority() : keys_(crypto::generate_keypair()) {}

    Certificate issue_certificate(const CertificateSigningRequest& csr,
                                  const std::string& identity_ref, uint64_t now,
                                  uint64_t validity_ticks = kDefaultValidityTicks);

    const crypto::Key32& root_public_key() const { return keys_.public_key; }
    std::optional<std::string> did_for_identity(const std::string& identity_ref) const;
    std::optional<std::string> identity_for_did(const std::string& did_id) const;

    static constexpr uint64_t kDefaultValidityTicks = 1'000'000'000;

  private:
    crypto::KeyPair keys_;
    std::map<std::string, std::string> ref_to_did_;
    std::map<std::string, std::string> did_to_ref_;
};

/// MSP release token for an emergency backup fetch; the mediator honours a
/// doctor's fetch only against a valid voucher.
struct EmergencyVoucher {
    std::string patient_did;
    std::string doctor_did;
    uint64_t sequence_no = 0;
    crypto::Signature msp_signature{};

    Bytes signing_bytes() const;
};

struct BackupLocation {
    std::string patient_did;
    uint64_t sequence_no = 0;
};

/// Membership service: certificate-to-role translation plus the custody vault
/// used by the recovery and emergency loops (its own share, never both).
class MembershipService {
  public:
    struct Authorization {
        Role role = Role::Patient;
        std::vector<std::string> channels;
    };

    struct PatientVault {
        std::optional<crypto::Key32> share_msp;
        std::vector<identity::Did> contacts;  // pinged in this order
        bool list_shareable = false;
        std::optional<BackupLocation> backup;
    };

    explicit MembershipService(std::string endpoint = "system:msp");

    Authorization authorize(const Certificate& cert, const crypto::Key32& ca_public_key,
                            uint64_t now, Ledger& ledger) const;

    const std::string& did_id() const { return did_.id_string; }
    const identity::Did& did() const { return did_; }
    const crypto::Key32& public_key() const { return keys_.public_key; }

    // recovery / emergency vault
    void register_recovery(const std::string& patient_did, const crypto::Key32& share_msp,
                           std::vector<identity::Did> contacts, BackupLocation backup);
    void share_contact_list(const std::string& patient_did, std::vector<identity::Did> contacts);
    const PatientVault* vault(const std::string& patient_did) const;

    /// Fresh nonce challenge for a recovering patient; possession of the new
    /// wallet key plus a CA identity match releases the MSP share.
    ByteArray<16> begin_recovery(const std::string& identity_ref);
    struct RecoveryRelease {
        crypto::Key32 share_msp{};
        std::vector<identity::Did> contacts;
        BackupLocation backup;
    };
    RecoveryRelease complete_recovery(const std::string& identity_ref,
                                      const crypto::Key32& new_public_key,
                                      const crypto::Signature& nonce_signature,
                                      const CertificateAuthority& ca);

    EmergencyVoucher issue_emergency_voucher(const std::string& patient_did,
                                             const std::string& doctor_did, uint64_t sequence_no);
    static bool verify_emergency_voucher(const EmergencyVoucher& voucher,
                                         const crypto::Key32& msp_public_key);

  private:
    crypto::KeyPair keys_;
    identity::Did did_;
    identity::DidDocument doc_;
    std::map<std::string, PatientVault> vaults_;
    std::map<std::string, ByteArray<16>> recovery_nonces_;  // identity_ref -> nonce
};

}  // namespace ssi::ledger
