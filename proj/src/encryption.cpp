#include "hyfl/encryption.hpp"

namespace hyfl {

PrivacyAudit& PrivacyAudit::operator+=(const PrivacyAudit& o) {
  alpha_uploads += o.alpha_uploads;
  alpha_uploads_sealed += o.alpha_uploads_sealed;
  ip_uploads += o.ip_uploads;
  ip_uploads_sealed += o.ip_uploads_sealed;
  alpha_scope_violations += o.alpha_scope_violations;
  w_scope_violations += o.w_scope_violations;
  return *this;
}

void EncryptionLedger::upload(Channel channel, const Ciphertext& c) {
  if (channel == Channel::alpha_delta) {
    ++audit_.alpha_uploads;
    if (c.sealed()) ++audit_.alpha_uploads_sealed;
  } else {
    ++audit_.ip_uploads;
    if (c.sealed()) ++audit_.ip_uploads_sealed;
  }
}

}  // namespace hyfl
