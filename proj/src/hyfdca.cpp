#include "hyfl/hyfdca.hpp"

#include <algorithm>
#include <cmath>

#include "hyfl/error.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

namespace {

constexpr std::uint64_t kDrawStream = 0x6472617700000001ULL;

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> options, const char* what) {
  for (const auto& [name, value] : options)
    if (s == name) return value;
  throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

// H = 0 is accepted as a degenerate no-op round.
void HyfdcaParams::validate() const {
  if (curvature != LineSearchCurvature::protocol && curvature != LineSearchCurvature::per_sample)
    throw ConfigError("unknown line-search curvature");
}

std::string to_string(GammaRule g) { return g == GammaRule::constant ? "constant" : "inverse_t"; }
std::string to_string(ClientWeight c) { return c == ClientWeight::sample_share ? "sample_share" : "one"; }
std::string to_string(StepRule s) { return s == StepRule::closed_form ? "closed_form" : "line_search"; }
std::string to_string(InnerProductScope s) { return s == InnerProductScope::needed ? "needed" : "all"; }

GammaRule parse_gamma_rule(const std::string& s) {
  return parse_enum<GammaRule>(s, {{"constant", GammaRule::constant}, {"inverse_t", GammaRule::inverse_t}},
                               "gamma rule");
}
ClientWeight parse_client_weight(const std::string& s) {
  return parse_enum<ClientWeight>(s, {{"sample_share", ClientWeight::sample_share}, {"one", ClientWeight::one}},
                                  "client weight");
}
StepRule parse_step_rule(const std::string& s) {
  return parse_enum<StepRule>(s, {{"closed_form", StepRule::closed_form}, {"line_search", StepRule::line_search}},
                              "step rule");
}
InnerProductScope parse_inner_product_scope(const std::string& s) {
  return parse_enum<InnerProductScope>(s, {{"needed", InnerProductScope::needed}, {"all", InnerProductScope::all}},
                                       "inner product scope");
}

FederatedState::FederatedState(const FederatedLayout& layout)
    : alpha0(layout.n_samples()),
      alpha_version(layout.n_samples(), 0),
      w0(layout.n_features(), 0.0),
      last_seen(layout.n_clients(), 0) {
  const std::size_t K = layout.n_clients();
  w_hat.resize(K);
  ip_cache.resize(K);
  client_alpha.resize(K);
  client_alpha_version.resize(K);
  client_w.resize(K);
  client_ip.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& b = layout.block(k);
    w_hat[k].assign(b.n_features(), 0.0);
    ip_cache[k].assign(b.n_samples(), Ciphertext{});
    client_alpha[k].assign(b.n_samples(), 0.0);
    client_alpha_version[k].assign(b.n_samples(), 0);
    client_w[k].assign(b.n_features(), 0.0);
    client_ip[k].assign(b.n_samples(), 0.0);
  }
}

std::vector<double> FederatedState::revealed_alpha() const {
  std::vector<double> a(alpha0.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = alpha0[i].reveal_for_metrics();
  return a;
}

std::size_t sync_alpha(FederatedState& state, const FederatedLayout& layout, EncryptionLedger& ledger,
                       std::size_t k) {
  const auto& block = layout.block(k);
  std::size_t delivered = 0;
  for (std::size_t li = 0; li < block.n_samples(); ++li) {
    const std::size_t i = block.samples[li];
    if (state.client_alpha_version[k][li] == state.alpha_version[i]) continue;
    if (!layout.local_sample(k, i)) ledger.scope_violation_alpha();
    state.client_alpha[k][li] = ledger.decrypt(state.alpha0[i]);
    state.client_alpha_version[k][li] = state.alpha_version[i];
    ++delivered;
  }
  return delivered;
}

std::vector<std::size_t> primal_aggregation(FederatedState& state, const FederatedLayout& layout,
                                            EncryptionLedger& ledger, const Regularization& reg,
                                            std::span<const std::size_t> clients) {
  std::vector<std::size_t> work(layout.n_clients(), 0);
  for (std::size_t k : clients) {
    const auto& block = layout.block(k);
    auto& wh = state.w_hat[k];
    std::fill(wh.begin(), wh.end(), 0.0);
    for (std::size_t li = 0; li < block.n_samples(); ++li) {
      const double a = state.client_alpha[k][li];
      if (a == 0.0) continue;
      for (const auto& f : block.row(li)) wh[f.index] += a * f.value;
    }
    work[k] += block.nonzeros();
  }

  const double scale = 1.0 / reg.lambda_n();
  for (std::size_t m = 0; m < layout.n_features(); ++m) {
    double s = 0.0;
    for (const auto& h : layout.feature_holders(m)) s += state.w_hat[h.client][h.local];
    state.w0[m] = scale * s;
  }

  for (std::size_t k : clients) {
    const auto& block = layout.block(k);
    for (std::size_t lm = 0; lm < block.n_features(); ++lm) {
      const std::size_t m = block.features[lm];
      if (!layout.local_feature(k, m)) ledger.scope_violation_w();
      state.client_w[k][lm] = state.w0[m];
    }
    work[k] += block.n_features();
  }
  return work;
}

std::vector<std::size_t> secure_inner_product(FederatedState& state, const FederatedLayout& layout,
                                              EncryptionLedger& ledger, std::span<const std::size_t> active,
                                              const std::vector<std::vector<std::size_t>>& requests) {
  const std::size_t K = layout.n_clients();
  std::vector<std::size_t> work(K, 0);
  std::vector<bool> is_active(K, false);
  for (std::size_t k : active) is_active[k] = true;

  std::vector<std::vector<bool>> wants(K);
  std::vector<std::size_t> needed;
  {
    std::vector<bool> mark(layout.n_samples(), false);
    for (std::size_t k : active) {
      if (k >= requests.size()) continue;
      wants[k].assign(layout.block(k).n_samples(), false);
      for (std::size_t li : requests[k]) {
        wants[k][li] = true;
        const std::size_t i = layout.block(k).samples[li];
        if (!mark[i]) {
          mark[i] = true;
          needed.push_back(i);
        }
      }
    }
    std::sort(needed.begin(), needed.end());
  }

  for (std::size_t i : needed) {
    auto holders = layout.sample_holders(i);
    for (const auto& h : holders) {
      if (!is_active[h.client]) continue;
      const auto& block = layout.block(h.client);
      const double partial = block.dot(h.local, state.client_w[h.client]);
      state.ip_cache[h.client][h.local] = ledger.encrypt(partial);
      ledger.upload(Channel::inner_product, state.ip_cache[h.client][h.local]);
      work[h.client] += block.row(h.local).size() + 1;
    }
    Ciphertext total = state.ip_cache[holders.front().client][holders.front().local];
    for (std::size_t j = 1; j < holders.size(); ++j)
      total = ledger.add(total, state.ip_cache[holders[j].client][holders[j].local]);
    for (const auto& h : holders) {
      if (!is_active[h.client] || wants[h.client].empty() || !wants[h.client][h.local]) continue;
      if (!layout.local_sample(h.client, i)) ledger.scope_violation_alpha();
      state.client_ip[h.client][h.local] = ledger.decrypt(total);
    }
  }
  return work;
}

HyfdcaSolver::HyfdcaSolver(const SparseDataset& data, const Partition& partition, HyfdcaParams params,
                           Schedule schedule, RunOptions options)
    : data_(data),
      layout_(data, partition),
      params_(params),
      schedule_(schedule),
      options_(options),
      reg_{options.lambda, data.n_samples()},
      state_(layout_),
      prev_active_(layout_.n_clients(), false) {
  params_.validate();
  reg_.validate();
  options_.timing.rtc_per_iteration = TimingModel::kHyfdcaRoundTrips;
  partition.check_coverage(data);
  norm_sq_.reserve(data.n_samples());
  for (const auto& x : data.samples) norm_sq_.push_back(squared_norm(x));
  holders_.reserve(data.n_samples());
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    holders_.push_back(layout_.sample_holders(i).size());
    if (holders_.back() == 0) throw ContractViolation("sample " + std::to_string(i) + " is held by no client");
  }

  const std::size_t N = data.n_samples();
  const double H = static_cast<double>(params_.inner_iterations);
  const double P = schedule_.expected_active(layout_.n_clients()) / static_cast<double>(layout_.n_clients());
  if (params_.inner_iterations > N) warnings_.push_back("H exceeds N");
  if (schedule_.kind() != Schedule::Kind::full && P * H > static_cast<double>(N))
    warnings_.push_back("P * H exceeds N");
  for (std::size_t k = 0; k < layout_.n_clients(); ++k)
    if (params_.inner_iterations > layout_.block(k).n_samples()) {
      warnings_.push_back("H exceeds the sample count of some clients; draws are truncated");
      break;
    }
  for (const auto& x : data.samples)
    if (squared_norm(x) > 1.0 + 1e-12) {
      warnings_.push_back("samples are not normalized to ||x|| <= 1");
      break;
    }

  last_.primal = primal_objective(state_.w0, data_, reg_);
  last_.dual = 0.0;
  last_.gap = last_.primal;
  last_.accuracy = accuracy(state_.w0, options_.validation ? *options_.validation : data_);
}

std::vector<double> HyfdcaSolver::local_deltas(std::size_t k, std::span<const std::size_t> draw,
                                               double gamma) const {
  const auto& block = layout_.block(k);
  const double c_k = params_.client_weight == ClientWeight::sample_share
                         ? static_cast<double>(block.n_samples()) / static_cast<double>(data_.n_samples())
                         : 1.0;
  std::vector<double> deltas;
  deltas.reserve(draw.size());
  for (std::size_t li : draw) {
    const std::size_t i = block.samples[li];
    const int y = block.labels[li];
    const double a = state_.client_alpha[k][li];
    const double ip = state_.client_ip[k][li];
    double d;
    if (params_.step == StepRule::closed_form) {
      const double nsq = params_.exact_norm ? norm_sq_[i] : 1.0;
      d = c_k * closed_form_dual_step(y, a, ip, reg_, nsq, params_.variant);
    } else {
      d = line_search_dual_step(y, a, hinge_dual_target(y, ip), ip, c_k, gamma, reg_, params_.curvature)
              .delta_alpha;
    }
    deltas.push_back(d);
  }
  return deltas;
}

IterationRecord HyfdcaSolver::step() {
  const std::size_t t = ++t_;
  const std::size_t K = layout_.n_clients();
  const auto active = schedule_.active(t, K);
  std::vector<bool> now_active(K, false);
  for (std::size_t k : active) now_active[k] = true;

  IterationRecord rec;
  rec.t = t;
  rec.active_clients = active.size();
  if (active.empty()) {
    rec = last_;
    rec.t = t;
    rec.skipped = true;
    rec.active_clients = 0;
    rec.compute_s = rec.encryption_s = rec.latency_s = 0.0;
    rec.ops = ledger_.end_iteration();
    rec.cumulative_s = elapsed_s_;
    prev_active_ = std::move(now_active);
    last_ = rec;
    return rec;
  }

  std::vector<std::size_t> work(K, 0);
  auto accumulate = [&work](const std::vector<std::size_t>& w) {
    for (std::size_t k = 0; k < w.size(); ++k) work[k] += w[k];
  };

  // Returning clients refresh alpha and their w_hat contribution.
  std::vector<std::size_t> returning;
  for (std::size_t k : active)
    if (!prev_active_[k]) returning.push_back(k);
  for (std::size_t k : returning) work[k] += sync_alpha(state_, layout_, ledger_, k);
  accumulate(primal_aggregation(state_, layout_, ledger_, reg_, returning));

  // Local sample draws, independent of execution order.
  std::vector<std::vector<std::size_t>> draws(K);
  for (std::size_t k : active) {
    Rng rng(derive_seed(options_.seed, {kDrawStream, k, t}));
    draws[k] = rng.sample_without_replacement(layout_.block(k).n_samples(), params_.inner_iterations);
  }
  if (params_.ip_scope == InnerProductScope::needed) {
    accumulate(secure_inner_product(state_, layout_, ledger_, active, draws));
  } else {
    std::vector<std::vector<std::size_t>> all(K);
    for (std::size_t k : active) {
      all[k].resize(layout_.block(k).n_samples());
      for (std::size_t li = 0; li < all[k].size(); ++li) all[k][li] = li;
    }
    accumulate(secure_inner_product(state_, layout_, ledger_, active, all));
  }

  // Local dual steps; uploads are merged in client-index order.
  const double gamma = params_.gamma_at(t);
  for (std::size_t k : active) {
    const auto deltas = local_deltas(k, draws[k], gamma);
    work[k] += deltas.size();
    const auto& block = layout_.block(k);
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      const std::size_t i = block.samples[draws[k][j]];
      const double scaled = gamma / static_cast<double>(holders_[i]) * deltas[j];
      const Ciphertext c = ledger_.encrypt(scaled);
      ledger_.upload(Channel::alpha_delta, c);
      state_.alpha0[i] = ledger_.add(state_.alpha0[i], c);
      ++state_.alpha_version[i];
    }
  }

  for (std::size_t k : active) {
    work[k] += sync_alpha(state_, layout_, ledger_, k);
    state_.last_seen[k] = t;
  }
  accumulate(primal_aggregation(state_, layout_, ledger_, reg_, active));

  if (params_.second_inner_product) {
    std::vector<std::vector<std::size_t>> all(K);
    for (std::size_t k : active) {
      all[k].resize(layout_.block(k).n_samples());
      for (std::size_t li = 0; li < all[k].size(); ++li) all[k][li] = li;
    }
    accumulate(secure_inner_product(state_, layout_, ledger_, active, all));
  }

  std::size_t slowest = 0;
  for (std::size_t k : active) slowest = std::max(slowest, work[k]);
  rec.ops = ledger_.end_iteration();
  const auto charge =
      options_.timing.charge(static_cast<double>(slowest) * options_.timing.seconds_per_op, rec.ops);
  rec.compute_s = charge.compute_s;
  rec.encryption_s = charge.encryption_s;
  rec.latency_s = charge.latency_s;
  elapsed_s_ += charge.total_s;
  rec.cumulative_s = elapsed_s_;

  rec.primal = primal_objective(state_.w0, data_, reg_);
  rec.dual = dual_objective(state_.revealed_alpha(), data_, reg_);
  rec.gap = rec.primal - rec.dual;
  rec.accuracy = accuracy(state_.w0, options_.validation ? *options_.validation : data_);

  prev_active_ = std::move(now_active);
  last_ = rec;
  return rec;
}

nlohmann::json to_json(const HyfdcaParams& p) {
  return {{"inner_iterations", p.inner_iterations},
          {"gamma", to_string(p.gamma)},
          {"client_weight", to_string(p.client_weight)},
          {"step", to_string(p.step)},
          {"variant", p.variant == ClosedFormVariant::derived ? "derived" : "paper_literal"},
          {"exact_norm", p.exact_norm},
          {"curvature", p.curvature == LineSearchCurvature::protocol ? "protocol" : "per_sample"},
          {"second_inner_product", p.second_inner_product},
          {"ip_scope", to_string(p.ip_scope)}};
}

HyfdcaParams hyfdca_params_from_json(const nlohmann::json& j) {
  HyfdcaParams p;
  try {
    if (j.contains("inner_iterations")) p.inner_iterations = j.at("inner_iterations").get<std::size_t>();
    if (j.contains("gamma")) p.gamma = parse_gamma_rule(j.at("gamma").get<std::string>());
    if (j.contains("client_weight")) p.client_weight = parse_client_weight(j.at("client_weight").get<std::string>());
    if (j.contains("step")) p.step = parse_step_rule(j.at("step").get<std::string>());
    if (j.contains("variant"))
      p.variant = parse_enum<ClosedFormVariant>(
          j.at("variant").get<std::string>(),
          {{"derived", ClosedFormVariant::derived}, {"paper_literal", ClosedFormVariant::paper_literal}},
          "closed-form variant");
    if (j.contains("exact_norm")) p.exact_norm = j.at("exact_norm").get<bool>();
    if (j.contains("curvature"))
      p.curvature = parse_enum<LineSearchCurvature>(
          j.at("curvature").get<std::string>(),
          {{"protocol", LineSearchCurvature::protocol}, {"per_sample", LineSearchCurvature::per_sample}},
          "line-search curvature");
    if (j.contains("second_inner_product")) p.second_inner_product = j.at("second_inner_product").get<bool>();
    if (j.contains("ip_scope")) p.ip_scope = parse_inner_product_scope(j.at("ip_scope").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hyfdca params: ") + e.what());
  }
  p.validate();
  return p;
}

RunHistory run_hyfdca(const SparseDataset& data, const Partition& partition, const HyfdcaParams& params,
                      const Schedule& schedule, const RunOptions& options) {
  HyfdcaSolver solver(data, partition, params, schedule, options);
  RunHistory h;
  h.algorithm = "hyfdca";
  h.seed = options.seed;
  while (!options.stop.done(solver.iteration(), solver.elapsed_s())) h.rows.push_back(solver.step());

  h.final_w.assign(solver.w0().begin(), solver.w0().end());
  const auto& audit = solver.ledger().audit();
  h.metadata["params"] = to_json(params);
  h.metadata["schedule"] = schedule.describe();
  h.metadata["lambda"] = options.lambda;
  h.metadata["n_clients"] = partition.n_clients();
  h.metadata["partition"] = to_string(partition.scheme());
  h.metadata["rtc_per_iteration"] = options.timing.rtc_per_iteration;
  h.metadata["latency_per_rtc_s"] = options.timing.latency_per_rtc_s;
  h.metadata["warnings"] = solver.warnings();
  h.metadata["privacy_audit"] = {{"alpha_uploads", audit.alpha_uploads},
                                 {"alpha_uploads_sealed", audit.alpha_uploads_sealed},
                                 {"ip_uploads", audit.ip_uploads},
                                 {"ip_uploads_sealed", audit.ip_uploads_sealed},
                                 {"alpha_scope_violations", audit.alpha_scope_violations},
                                 {"w_scope_violations", audit.w_scope_violations},
                                 {"violations", audit.violations()}};
  return h;
}

}  // namespace hyfl
