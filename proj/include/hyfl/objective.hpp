#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hyfl/dataset.hpp"

namespace hyfl {

// lambda > 0 and n >= 1 for every solver; the objective evaluators also accept lambda == 0.
struct Regularization {
  double lambda = 0.0;
  std::size_t n = 1;

  double lambda_n() const noexcept { return lambda * static_cast<double>(n); }
  void validate() const;
};

// |y a| may exceed [0, 1] by this much after floating-point merges and still count as feasible.
inline constexpr double kDualFeasibilityTolerance = 1e-12;

double hinge_loss(int y, double z);

// l*(-a) for the hinge loss: -y*a when y*a is in [0, 1], +infinity otherwise.
double hinge_conjugate_neg(int y, double a);

// An element of the subdifferential of z -> max(0, 1 - y z). Ties at y z == 1 pick -y.
double hinge_subgradient(int y, double z);

// The dual point a coordinate step moves toward: -(subgradient). Feasible by construction.
inline double hinge_dual_target(int y, double z) { return -hinge_subgradient(y, z); }

bool dual_feasible(int y, double a) noexcept;

// (lambda/2)||w||^2 + mean hinge loss.
double primal_objective(std::span<const double> w, const SparseDataset& data, const Regularization& reg);

// -(lambda/2)||w(alpha)||^2 - mean l*(-alpha_i); -infinity for infeasible alpha.
double dual_objective(std::span<const double> alpha, const SparseDataset& data, const Regularization& reg);

// w = (1 / (lambda N)) sum_i alpha_i x_i
std::vector<double> dual_to_primal(std::span<const double> alpha, const SparseDataset& data, const Regularization& reg);

enum class ClosedFormVariant {
  derived,        // lambda N (1 - y x'w): the exact maximizer
  paper_literal,  // lambda N (1 - x'w): printed form, equal to `derived` only for y = +1
};

// Exact maximizer over d of
//   -l*(-(alpha + d)) - d x'w - x_norm_sq d^2 / (2 lambda N),
// i.e. the practical local step. x_norm_sq = 1 uses the ||x|| <= 1 bound.
// Throws ContractViolation if alpha_old is infeasible.
double closed_form_dual_step(int y, double alpha_old, double ip, const Regularization& reg, double x_norm_sq = 1.0,
                             ClosedFormVariant variant = ClosedFormVariant::derived);

enum class LineSearchCurvature {
  protocol,    // gamma^2 / (2 lambda): safe for simultaneous updates of every coordinate
  per_sample,  // gamma^2 / (2 lambda N): coincides with the closed form at c = gamma = 1
};

struct LineSearchStep {
  double s = 0.0;
  double delta_alpha = 0.0;
  double gain = 0.0;  // objective(s) - objective(0), >= 0
};

// Objective of the line-searched local step, relative to s = 0:
//   -l*(-(a + s c g (u - a))) + l*(-a) - s c g (w'x)(u - a) - kappa (s c (u - a))^2
double line_search_gain(int y, double alpha_local, double u, double w_dot_x, double c_k, double gamma_t,
                        const Regularization& reg, LineSearchCurvature curvature, double s);

// Golden-section search over s in [0, 1] to |ds| <= 1e-8, with both endpoints checked.
// u is the dual target (see hinge_dual_target). Delta alpha = s c_k (u - alpha_local).
LineSearchStep line_search_dual_step(int y, double alpha_local, double u, double w_dot_x, double c_k, double gamma_t,
                                     const Regularization& reg,
                                     LineSearchCurvature curvature = LineSearchCurvature::protocol);

inline constexpr double kGoldenSectionTolerance = 1e-8;

}  // namespace hyfl
