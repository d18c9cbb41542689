#include "hyfl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyfl/error.hpp"

namespace hyfl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Regularization::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive and finite");
  if (n < 1) throw ConfigError("regularization needs N >= 1");
}

double hinge_loss(int y, double z) { return std::max(0.0, 1.0 - y * z); }

bool dual_feasible(int y, double a) noexcept {
  const double b = y * a;
  return b >= -kDualFeasibilityTolerance && b <= 1.0 + kDualFeasibilityTolerance;
}

double hinge_conjugate_neg(int y, double a) { return dual_feasible(y, a) ? -y * a : kInf; }

double hinge_subgradient(int y, double z) { return y * z > 1.0 ? 0.0 : -static_cast<double>(y); }

double primal_objective(std::span<const double> w, const SparseDataset& data, const Regularization& reg) {
  if (w.size() != data.n_features)
    throw DimensionError("w has " + std::to_string(w.size()) + " entries, dataset has " +
                         std::to_string(data.n_features) + " features");
  double loss = 0.0;
  for (std::size_t i = 0; i < data.n_samples(); ++i) loss += hinge_loss(data.labels[i], dot(data.samples[i], w));
  const double n = static_cast<double>(std::max<std::size_t>(data.n_samples(), 1));
  return 0.5 * reg.lambda * squared_norm(w) + loss / n;
}

std::vector<double> dual_to_primal(std::span<const double> alpha, const SparseDataset& data, const Regularization& reg) {
  if (alpha.size() != data.n_samples()) throw DimensionError("alpha length does not match sample count");
  std::vector<double> w(data.n_features, 0.0);
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] != 0.0) axpy(alpha[i], data.samples[i], w);
  const double scale = 1.0 / reg.lambda_n();
  for (auto& v : w) v *= scale;
  return w;
}

double dual_objective(std::span<const double> alpha, const SparseDataset& data, const Regularization& reg) {
  if (alpha.size() != data.n_samples()) throw DimensionError("alpha length does not match sample count");
  double conj = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double c = hinge_conjugate_neg(data.labels[i], alpha[i]);
    if (c == kInf) return -kInf;
    conj += c;
  }
  const auto w = dual_to_primal(alpha, data, reg);
  return -0.5 * reg.lambda * squared_norm(w) - conj / static_cast<double>(reg.n);
}

double closed_form_dual_step(int y, double alpha_old, double ip, const Regularization& reg, double x_norm_sq,
                             ClosedFormVariant variant) {
  if (!dual_feasible(y, alpha_old))
    throw ContractViolation("closed_form_dual_step: y*alpha = " + std::to_string(y * alpha_old) + " outside [0, 1]");
  const double b = y * alpha_old;
  const double residual = variant == ClosedFormVariant::derived ? 1.0 - y * ip : 1.0 - ip;
  double target;
  if (x_norm_sq > 0.0) {
    target = std::clamp(b + reg.lambda_n() * residual / x_norm_sq, 0.0, 1.0);
  } else {
    // Zero sample: the objective is linear in the step, so it runs to a bound.
    target = residual > 0.0 ? 1.0 : (residual < 0.0 ? 0.0 : std::clamp(b, 0.0, 1.0));
  }
  return y * target - alpha_old;
}

double line_search_gain(int y, double alpha_local, double u, double w_dot_x, double c_k, double gamma_t,
                        const Regularization& reg, LineSearchCurvature curvature, double s) {
  const double dir = u - alpha_local;
  const double step = s * c_k * dir;
  const double moved = alpha_local + gamma_t * step;
  const double conj_new = hinge_conjugate_neg(y, moved);
  if (conj_new == kInf) return -kInf;
  const double kappa = curvature == LineSearchCurvature::protocol ? gamma_t * gamma_t / (2.0 * reg.lambda)
                                                                   : gamma_t * gamma_t / (2.0 * reg.lambda_n());
  return -conj_new + hinge_conjugate_neg(y, alpha_local) - gamma_t * step * w_dot_x - kappa * step * step;
}

LineSearchStep line_search_dual_step(int y, double alpha_local, double u, double w_dot_x, double c_k, double gamma_t,
                                     const Regularization& reg, LineSearchCurvature curvature) {
  auto f = [&](double s) { return line_search_gain(y, alpha_local, u, w_dot_x, c_k, gamma_t, reg, curvature, s); };
  if (u == alpha_local) return {};

  constexpr double inv_phi = 0.6180339887498948482045868343656;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > kGoldenSectionTolerance) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  LineSearchStep best{0.0, 0.0, 0.0};
  for (double s : {0.5 * (lo + hi), 1.0}) {
    const double g = f(s);
    if (g > best.gain) best = {s, 0.0, g};
  }
  best.delta_alpha = best.s * c_k * (u - alpha_local);
  return best;
}

}  // namespace hyfl
