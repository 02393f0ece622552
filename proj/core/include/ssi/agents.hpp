#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssi/credentials.hpp"
#include "ssi/crypto.hpp"
#include "ssi/identity.hpp"
#include "ssi/ledger.hpp"
#include "ssi/wire.hpp"

namespace ssi::agents {

/// First-contact envelopes carry the body key wrapped to the recipient,
/// since no shared connection key exists yet.
struct KeyWrap {
    crypto::Key32 ephemeral_public{};
    crypto::AeadCiphertext wrapped_key;

    bool operator==(const KeyWrap&) const = default;
};

struct Envelope {
    std::string from_did;
    std::string to_did;
    uint64_t seq = 0;
    std::optional<KeyWrap> wrap;
    crypto::AeadCiphertext body;
    crypto::Signature sender_signature{};

    Bytes signing_bytes() const;
    Bytes aad() const;
    Json to_json() const;
    static Envelope from_json(const Json& j);

    bool operator==(const Envelope&) const = default;
};

struct MediationGrant {
    std::string recipient_did;
    std::string queue_id;
    uint64_t granted_at = 0;
    identity::DidDocument recipient_doc;
};

struct PickupQueue {
    std::string queue_id;
    std::deque<Envelope> pending;
};

struct AccessGrant {
    ByteArray<16> vp_id{};
    std::string grantee_did;
    uint64_t expires_at = 0;
    bool revoked = false;
};

struct AuditEntry {
    std::string kind;    // "fetch_vp" | "emergency_backup_release" | ...
    std::string actor;
    std::string object;
    uint64_t at = 0;

    Json to_json() const;
};

/// The shared cloud agent: store-and-forward queues, hosted presentations
/// with TTL grants, encrypted wallet backups, and the access audit log.
/// It stores ciphertext and deliberately disclosed presentations only.
class Mediator {
  public:
    explicit Mediator(std::string endpoint = "mediator:main");

    const identity::Did& did() const { return did_; }
    const identity::DidDocument& doc() const { return doc_; }
    const std::string& endpoint() const { return endpoint_; }

    MediationGrant request_mediation(const identity::DidDocument& recipient_doc, uint64_t now);
    bool has_grant(const std::string& recipient_did) const;

    void deliver(const Envelope& env);
    std::vector<Envelope> pickup(const std::string& recipient_did, size_t max_n);
    size_t queue_depth(const std::string& recipient_did) const;

    std::string host_vp(const credentials::VerifiablePresentation& vp,
                        const std::string& owner_did);
    void grant_access(const std::string& owner_did, const std::string& vp_id,
                      const std::string& grantee_did, uint64_t ttl, uint64_t now);
    void revoke_access(const std::string& owner_did, const std::string& vp_id,
                       const std::string& grantee_did);
    void remove_vp(const std::string& owner_did, const std::string& vp_id);
    credentials::VerifiablePresentation fetch_vp(const std::string& vp_id,
                                                 const std::string& grantee_did, uint64_t now);
    bool has_hosted_vp(const std::string& vp_id) const;

    void store_backup(const std::string& patient_did, uint64_t sequence_no, std::string ciphertext);
    std::string fetch_backup(const std::string& patient_did, uint64_t sequence_no,
                             const std::string& requester_did, uint64_t now,
                             const ledger::EmergencyVoucher* voucher = nullptr,
                             const crypto::Key32* msp_public_key = nullptr);
    /// Mutable handle for tamper tests and fault injection.
    std::string& backup_entry(const std::string& patient_did, uint64_t sequence_no);

    const std::vector<AuditEntry>& audit_log() const { return audit_; }

    Json export_state() const;

  private:
    Envelope pack_notice(const identity::DidDocument& recipient_doc, const Json& message);

    crypto::KeyPair keys_;
    identity::Did did_;
    identity::DidDocument doc_;
    std::string endpoint_;

    struct HostedVp {
        credentials::VerifiablePresentation vp;
        std::string owner_did;
    };

    std::map<std::string, MediationGrant> grants_;  // recipient did -> grant
    std::map<std::string, PickupQueue> queues_;     // queue id -> queue
    std::map<std::string, HostedVp> hosted_;        // vp id (b58) -> hosted vp
    std::map<std::string, std::map<std::string, AccessGrant>> access_;  // vp id -> grantee -> grant
    std::map<std::string, std::map<uint64_t, std::string>> backups_;
    std::map<std::string, uint64_t> notice_seq_;
    std::vector<AuditEntry> audit_;
};

/// Per-relationship state. `alias` (the map key in the wallet) names both the
/// connection and the local pairwise DID minted for it.
struct Connection {
    identity::DidDocument their_doc;
    bool authenticated_peer = false;
    std::optional<identity::Did> their_anywise;
    uint64_t send_seq = 0;  // last sent
    uint64_t recv_seq = 0;  // last accepted

    Json to_json() const;
    static Connection from_json(const Json& j);
};

/// Edge agent: keys, DIDs, connections and credentials, single-owner.
/// At rest the whole store serializes to one passphrase-encrypted blob.
class Wallet {
  public:
    static constexpr std::string_view kSelfAlias = "self";
    static constexpr std::string_view kFileMagic = "SSIW1";

    Wallet() = default;
    explicit Wallet(std::string owner_name) : owner(std::move(owner_name)) {}

    std::string owner;
    std::map<std::string, crypto::KeyPair> keys;  // did id -> keypair
    std::map<std::string, std::pair<identity::Did, identity::DidDocument>> dids;  // alias -> did
    std::map<std::string, Connection> connections;  // alias -> connection
    std::map<std::string, credentials::VerifiableCredential> creds;  // cid b58 -> vc

    std::optional<ledger::Certificate> certificate;
    std::optional<ledger::Role> role;
    std::vector<std::string> channels;

    std::optional<revocation::RegistryId> registry_id;  // issuer-side registry reference

    bool backup_opted_in = false;
    std::optional<crypto::KeyPair> backup_keys;
    uint64_t backup_seq = 0;

    std::map<std::string, crypto::Key32> held_recovery_shares;  // patient did -> share
    bool reachable = true;  // emergency ping availability (scenario-controlled)

    // --- identity ---
    std::pair<identity::Did, identity::DidDocument> create_did(identity::DidKind kind,
                                                               const std::string& alias,
                                                               const std::string& endpoint,
                                                               uint64_t now);
    const identity::Did& did_of(const std::string& alias) const;
    const identity::DidDocument& doc_of(const std::string& alias) const;
    const crypto::KeyPair& keys_of(const std::string& alias) const;
    const identity::Did& anywise_did() const { return did_of(std::string(kSelfAlias)); }

    /// WalletLocal resolution with the integrity re-hash check.
    identity::DidDocument resolve_local(const identity::Did& did) const;

    identity::OobInvitation make_invitation(const std::string& alias, Mediator& mediator,
                                            uint64_t now);
    std::optional<std::string> pending_invitation_alias(const ByteArray<16>& nonce) const;
    void consume_pending_invitation(const ByteArray<16>& nonce);

    // --- messaging ---
    Envelope pack_envelope(const std::string& connection_alias, const Json& message);
    Envelope pack_first_contact(const std::string& connection_alias, const Json& message);
    Json unpack_envelope(const Envelope& env, const identity::DidDocument& mediator_doc);
    /// First-contact unpack; the sender's document travels inside the body.
    std::pair<Json, identity::DidDocument> unpack_first_contact(const Envelope& env);

    std::string alias_for_peer(const std::string& their_did_id) const;
    Connection& connection(const std::string& alias);
    const Connection& connection(const std::string& alias) const;

    // --- credentials ---
    void store_credential(const credentials::VerifiableCredential& vc);
    const credentials::VerifiableCredential& credential(const revocation::Cid& cid) const;
    credentials::VerifiablePresentation create_presentation(
        const std::string& connection_alias, const std::vector<revocation::Cid>& cids,
        const std::vector<std::string>& disclosed_claim_names, std::optional<uint64_t> expires_at,
        const credentials::RegistryDirectory& registries);
    /// Documents this wallet can resolve locally (own + peers), for verify_vp.
    std::map<std::string, identity::DidDocument> known_docs() const;

    // --- backup ---
    Json backup_payload() const;
    void restore_from_backup(const Json& payload);

    // --- at-rest store ---
    Bytes save(std::string_view passphrase) const;
    static Wallet load(std::span<const uint8_t> file, std::string_view passphrase);

    Json to_state_json() const;
    static Wallet from_state_json(const Json& j);

  private:
    struct PendingInvitation {
        std::string alias;
        ByteArray<16> nonce{};
    };
    std::vector<PendingInvitation> pending_invitations_;
    uint64_t mediator_notice_seq_ = 0;  // last accepted mediator notice
};

/// Hybrid-encrypts the wallet's anywise material and credentials to the
/// backup key, anchors the ciphertext digest on the ledger, then uploads.
/// Anchoring failure aborts before anything reaches the mediator.
std::pair<uint64_t, crypto::Digest> backup_wallet(Wallet& wallet, Mediator& mediator,
                                                  ledger::Ledger& ledger, uint64_t now);

/// Verifies the downloaded ciphertext against the anchored digest (read via
/// the MSP, the backups channel's reader), then decrypts and restores.
void restore_wallet_from_backup(Wallet& wallet, const std::string& patient_did,
                                uint64_t sequence_no, const crypto::Key32& backup_seed,
                                Mediator& mediator, const ledger::Ledger& ledger,
                                const std::string& reader_did, uint64_t now);

/// Decrypts a stored backup ciphertext with the backup private seed.
Json open_backup(const std::string& ciphertext, const crypto::Key32& backup_seed);

}  // namespace ssi::agents
