#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssi {

enum class Errc {
    // crypto
    EntropyUnavailable,
    MalformedKey,
    AuthenticationFailure,
    LengthMismatch,
    // identity
    MissingEndpoint,
    NotFound,
    IntegrityMismatch,
    MalformedPayload,
    DuplicateAlias,
    // credentials
    UnregisteredIssuer,
    RegistryUnavailable,
    UnknownClaim,
    EmptyDisclosure,
    // revocation
    DuplicateCid,
    UnknownCid,
    // ledger
    SignatureMismatch,
    DidKeyMismatch,
    InvalidCertificate,
    ExpiredCertificate,
    UnauthorizedChannel,
    UnknownKey,
    DuplicateDid,
    PairwiseDidRejected,
    NonMonotoneSequence,
    EpochGap,
    WrongIssuer,
    Unauthorized,
    // agents
    UnknownConnection,
    Replay,
    DuplicateGrant,
    NoGrant,
    NotOwner,
    AccessDenied,
    Expired,
    Revoked,
    AnchorFailed,
    // flows
    ChallengeFailure,
    AliasCollision,
    NoContacts,
    DigestMismatch,
    MissingShare,
    VerificationRefused,
    // harness
    ParseError,
    UnknownFlow,
};

std::string_view errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw Error(code, what);
}

inline std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::EntropyUnavailable: return "entropy-unavailable";
        case Errc::MalformedKey: return "malformed-key";
        case Errc::AuthenticationFailure: return "authentication-failure";
        case Errc::LengthMismatch: return "length-mismatch";
        case Errc::MissingEndpoint: return "missing-endpoint";
        case Errc::NotFound: return "not-found";
        case Errc::IntegrityMismatch: return "integrity-mismatch";
        case Errc::MalformedPayload: return "malformed-payload";
        case Errc::DuplicateAlias: return "duplicate-alias";
        case Errc::UnregisteredIssuer: return "unregistered-issuer";
        case Errc::RegistryUnavailable: return "registry-unavailable";
        case Errc::UnknownClaim: return "unknown-claim";
        case Errc::EmptyDisclosure: return "empty-disclosure";
        case Errc::DuplicateCid: return "duplicate-cid";
        case Errc::UnknownCid: return "unknown-cid";
        case Errc::SignatureMismatch: return "signature-mismatch";
        case Errc::DidKeyMismatch: return "did-key-mismatch";
        case Errc::InvalidCertificate: return "invalid-certificate";
        case Errc::ExpiredCertificate: return "expired-certificate";
        case Errc::UnauthorizedChannel: return "unauthorized-channel";
        case Errc::UnknownKey: return "unknown-key";
        case Errc::DuplicateDid: return "duplicate-did";
        case Errc::PairwiseDidRejected: return "pairwise-did-rejected";
        case Errc::NonMonotoneSequence: return "non-monotone-sequence";
        case Errc::EpochGap: return "epoch-gap";
        case Errc::WrongIssuer: return "wrong-issuer";
        case Errc::Unauthorized: return "unauthorized";
        case Errc::UnknownConnection: return "unknown-connection";
        case Errc::Replay: return "replay";
        case Errc::DuplicateGrant: return "duplicate-grant";
        case Errc::NoGrant: return "no-grant";
        case Errc::NotOwner: return "not-owner";
        case Errc::AccessDenied: return "access-denied";
        case Errc::Expired: return "expired";
        case Errc::Revoked: return "revoked";
        case Errc::AnchorFailed: return "anchor-failed";
        case Errc::ChallengeFailure: return "challenge-failure";
        case Errc::AliasCollision: return "alias-collision";
        case Errc::NoContacts: return "no-contacts";
        case Errc::DigestMismatch: return "digest-mismatch";
        case Errc::MissingShare: return "missing-share";
        case Errc::VerificationRefused: return "verification-refused";
        case Errc::ParseError: return "parse-error";
        case Errc::UnknownFlow: return "unknown-flow";
    }
    return "unknown-error";
}

}  // namespace ssi
