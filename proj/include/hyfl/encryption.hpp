#pragma once

#include <cstddef>
#include <cstdint>

namespace hyfl {

// Published Paillier timings, in seconds.
inline constexpr double kEncryptSeconds = 0.018882;
inline constexpr double kDecryptSeconds = 0.018865;
inline constexpr double kAddSeconds = 0.000054;

struct OpCounts {
  std::uint64_t enc = 0;
  std::uint64_t dec = 0;
  std::uint64_t add = 0;

  OpCounts& operator+=(const OpCounts& o) {
    enc += o.enc;
    dec += o.dec;
    add += o.add;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

// enc * 18.882 ms + dec * 18.865 ms + add * 0.054 ms, in seconds.
inline double encryption_seconds(const OpCounts& c) {
  return static_cast<double>(c.enc) * kEncryptSeconds + static_cast<double>(c.dec) * kDecryptSeconds +
         static_cast<double>(c.add) * kAddSeconds;
}

// What a client uploads to the server.
enum class Channel { alpha_delta, inner_product };

// Mock additively-homomorphic ciphertext. The payload is the plaintext; only the ledger
// can create sealed values or read them back, so server code that handles Ciphertext
// cannot touch plaintext without a charged decrypt.
class Ciphertext {
 public:
  Ciphertext() = default;  // unsealed zero (protocol initialization)

  bool sealed() const noexcept { return sealed_; }

  // Simulator-side read for objective tracking. Not part of the protocol and never charged.
  double reveal_for_metrics() const noexcept { return payload_; }

 private:
  friend class EncryptionLedger;
  Ciphertext(double v, bool sealed) : payload_(v), sealed_(sealed) {}

  double payload_ = 0.0;
  bool sealed_ = false;
};

// Counts of everything crossing the client/server boundary, checked by the privacy audit.
struct PrivacyAudit {
  std::uint64_t alpha_uploads = 0;
  std::uint64_t alpha_uploads_sealed = 0;
  std::uint64_t ip_uploads = 0;
  std::uint64_t ip_uploads_sealed = 0;
  std::uint64_t alpha_scope_violations = 0;  // alpha entry delivered for i outside I_k
  std::uint64_t w_scope_violations = 0;      // w entry delivered for m outside M_k

  std::uint64_t violations() const noexcept {
    return (alpha_uploads - alpha_uploads_sealed) + (ip_uploads - ip_uploads_sealed) + alpha_scope_violations +
           w_scope_violations;
  }
  PrivacyAudit& operator+=(const PrivacyAudit& o);
};

class EncryptionLedger {
 public:
  Ciphertext encrypt(double plaintext) {
    ++iteration_.enc;
    return {plaintext, true};
  }
  double decrypt(const Ciphertext& c) {
    ++iteration_.dec;
    return c.payload_;
  }
  Ciphertext add(const Ciphertext& a, const Ciphertext& b) {
    ++iteration_.add;
    return {a.payload_ + b.payload_, a.sealed_ || b.sealed_};
  }

  // Client -> server transfer; records whether the value went through encrypt().
  void upload(Channel channel, const Ciphertext& c);

  void scope_violation_alpha() { ++audit_.alpha_scope_violations; }
  void scope_violation_w() { ++audit_.w_scope_violations; }

  // Closes the current outer iteration and returns its counts.
  OpCounts end_iteration() {
    OpCounts c = iteration_;
    total_ += c;
    iteration_ = {};
    return c;
  }

  const OpCounts& iteration() const noexcept { return iteration_; }
  const OpCounts& total() const noexcept { return total_; }
  const PrivacyAudit& audit() const noexcept { return audit_; }

 private:
  OpCounts iteration_, total_;
  PrivacyAudit audit_;
};

}  // namespace hyfl
