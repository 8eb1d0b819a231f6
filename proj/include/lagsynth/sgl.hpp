#pragma once

#include <cstddef>
#include <vector>

#include "lagsynth/types.hpp"

// Sparse Group Lasso estimation of the distributed-lag linear model.
//
// Objective, for design X (n x p), target y, groups g with sizes p_g:
//   (1/(2n)) ||y - b0 - X b||^2
//     + lambda (1-alpha) sum_g sqrt(p_g) ||b_g||_2
//     + lambda alpha ||b||_1
// The intercept b0 is unpenalized and handled by centering y and the
// columns. Solved with a monotone FISTA variant (accelerated proximal
// gradient with backtracking; the iterate never increases the objective).

namespace lagsynth::sgl {

struct HyperParams {
  double lambda = 0.0;  // overall penalty strength, >= 0
  double alpha = 1.0;   // l1 share in [0, 1]; 1 = lasso, 0 = group lasso
};

struct FitOptions {
  std::size_t max_iter = 5000;
  double kkt_tol = 1e-6;
  double rel_obj_tol = 1e-10;  // 0 disables the objective-change stop
  // Largest eigenvalue of Xc'Xc (centered columns); 0 means estimate it
  // internally by power iteration. Callers fitting the same design many
  // times should precompute it once via design_lipschitz.
  double xtx_norm = 0.0;
  bool record_trace = false;
  // Starting coefficients; empty means zeros.
  std::vector<double> init;
};

struct FitDiagnostics {
  std::size_t iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // filled when record_trace is set
};

struct SglModel {
  double intercept = 0.0;
  std::vector<double> coeffs;
  HyperParams hyper;
  FitDiagnostics diag;
};

// Exact proximal operator of step * penalty at v: coordinatewise soft
// threshold at step*lambda*alpha, then per-group shrinkage by
// max(0, 1 - step*lambda*(1-alpha)*sqrt(p_g)/||u_g||). Zeroed groups are
// hard zeros.
std::vector<double> sgl_prox(const std::vector<double>& v, double step,
                             const HyperParams& hyper,
                             const std::vector<std::size_t>& group_index);

SglModel fit_sgl(const LaggedDesign& design, const std::vector<double>& y,
                 const HyperParams& hyper, const FitOptions& opts = {});

// Smallest lambda for which b = 0 is optimal at the given alpha (binary
// search on the per-group zero-subgradient criterion for 0 < alpha < 1).
double lambda_max(const LaggedDesign& design, const std::vector<double>& y,
                  double alpha);

// b0 + X b.
std::vector<double> predict(const SglModel& model, const LaggedDesign& design);

// Max violation of the first-order optimality conditions at the model's
// coefficients; 0 iff (b0, b) minimizes the objective.
double kkt_residual(const SglModel& model, const LaggedDesign& design,
                    const std::vector<double>& y, const HyperParams& hyper);

// Objective value at the model's coefficients.
double objective(const SglModel& model, const LaggedDesign& design,
                 const std::vector<double>& y, const HyperParams& hyper);

// Largest eigenvalue of Xc'Xc for the design's centered columns; feeds
// FitOptions::xtx_norm.
double design_lipschitz(const LaggedDesign& design);

}  // namespace lagsynth::sgl
