#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyfl/dataset.hpp"
#include "hyfl/encryption.hpp"
#include "hyfl/metrics.hpp"
#include "hyfl/objective.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/run.hpp"
#include "hyfl/schedule.hpp"
#include "json.hpp"

namespace hyfl {

enum class GammaRule { constant, inverse_t };
enum class ClientWeight { sample_share, one };  // c_k = N_k / N or 1
enum class StepRule { closed_form, line_search };
// Which samples SecureInnerProduct covers: the ones drawn for the local step, or all of I_k.
enum class InnerProductScope { needed, all };

struct HyfdcaParams {
  std::size_t inner_iterations = 1;  // H
  GammaRule gamma = GammaRule::constant;
  ClientWeight client_weight = ClientWeight::sample_share;
  StepRule step = StepRule::closed_form;
  ClosedFormVariant variant = ClosedFormVariant::derived;
  bool exact_norm = false;  // closed form divides by ||x_i||^2 instead of the bound 1
  LineSearchCurvature curvature = LineSearchCurvature::protocol;
  bool second_inner_product = false;
  InnerProductScope ip_scope = InnerProductScope::needed;

  double gamma_at(std::size_t t) const noexcept {
    return gamma == GammaRule::inverse_t ? 1.0 / static_cast<double>(t) : 1.0;
  }
  void validate() const;

  friend bool operator==(const HyfdcaParams&, const HyfdcaParams&) = default;
};

std::string to_string(GammaRule g);
std::string to_string(ClientWeight c);
std::string to_string(StepRule s);
std::string to_string(InnerProductScope s);
GammaRule parse_gamma_rule(const std::string& s);
ClientWeight parse_client_weight(const std::string& s);
StepRule parse_step_rule(const std::string& s);
InnerProductScope parse_inner_product_scope(const std::string& s);

// Server and client variables. Client vectors are indexed by local positions in the
// client's ClientBlock, so a client can only ever hold entries of I_k and M_k.
struct FederatedState {
  explicit FederatedState(const FederatedLayout& layout);

  // Server side.
  std::vector<Ciphertext> alpha0;           // N
  std::vector<std::uint64_t> alpha_version;  // bumped whenever alpha0[i] absorbs a delta
  std::vector<double> w0;                    // M
  std::vector<std::vector<double>> w_hat;    // [k][local feature], unscaled sums
  std::vector<std::vector<Ciphertext>> ip_cache;  // [k][local sample]

  // Client side.
  std::vector<std::vector<double>> client_alpha;
  std::vector<std::vector<std::uint64_t>> client_alpha_version;
  std::vector<std::vector<double>> client_w;
  std::vector<std::vector<double>> client_ip;  // decrypted x_i'w
  std::vector<std::size_t> last_seen;          // 0 = never active

  std::vector<double> revealed_alpha() const;
};

// Server sends alpha0 entries for I_k to client k; one decrypt per entry the client has not
// seen yet. Returns the number of entries delivered.
std::size_t sync_alpha(FederatedState& state, const FederatedLayout& layout, EncryptionLedger& ledger,
                       std::size_t k);

// Algorithm step that rebuilds w_hat for `clients` from their local alpha, recomputes w0 from
// every client's cached w_hat and sends w0 restricted to M_k to each client in `clients`.
// Returns per-client work (nonzeros touched).
std::vector<std::size_t> primal_aggregation(FederatedState& state, const FederatedLayout& layout,
                                            EncryptionLedger& ledger, const Regularization& reg,
                                            std::span<const std::size_t> clients);

// requests[k] lists the local sample positions client k needs this round (empty for
// inactive clients). Every active holder of a requested sample encrypts its partial inner
// product; inactive holders are served from ip_cache. Returns per-client work.
std::vector<std::size_t> secure_inner_product(FederatedState& state, const FederatedLayout& layout,
                                              EncryptionLedger& ledger, std::span<const std::size_t> active,
                                              const std::vector<std::vector<std::size_t>>& requests);

class HyfdcaSolver {
 public:
  HyfdcaSolver(const SparseDataset& data, const Partition& partition, HyfdcaParams params, Schedule schedule,
               RunOptions options);

  // Executes outer iteration iteration() + 1.
  IterationRecord step();

  std::size_t iteration() const noexcept { return t_; }
  const FederatedState& state() const noexcept { return state_; }
  const FederatedLayout& layout() const noexcept { return layout_; }
  const EncryptionLedger& ledger() const noexcept { return ledger_; }
  const Regularization& regularization() const noexcept { return reg_; }
  double elapsed_s() const noexcept { return elapsed_s_; }

  std::vector<double> alpha() const { return state_.revealed_alpha(); }
  std::span<const double> w0() const noexcept { return state_.w0; }

  // Warnings about parameter choices outside the convergence-theory hypotheses.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::vector<double> local_deltas(std::size_t k, std::span<const std::size_t> draw, double gamma) const;

  const SparseDataset& data_;
  FederatedLayout layout_;
  HyfdcaParams params_;
  Schedule schedule_;
  RunOptions options_;
  Regularization reg_;
  FederatedState state_;
  EncryptionLedger ledger_;
  std::vector<double> norm_sq_;
  std::vector<std::size_t> holders_;  // |B_i|
  std::vector<bool> prev_active_;
  std::size_t t_ = 0;
  double elapsed_s_ = 0.0;
  IterationRecord last_;
  std::vector<std::string> warnings_;
};

RunHistory run_hyfdca(const SparseDataset& data, const Partition& partition, const HyfdcaParams& params,
                      const Schedule& schedule, const RunOptions& options);

nlohmann::json to_json(const HyfdcaParams& p);
HyfdcaParams hyfdca_params_from_json(const nlohmann::json& j);

}  // namespace hyfl
