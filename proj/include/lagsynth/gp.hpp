#pragma once

#include <cstddef>
#include <vector>

#include "lagsynth/common.hpp"

// Gaussian-process regression with a Matern 5/2 ARD kernel, used as the
// response-surface model for hyperparameter search. Inputs are expected in
// the unit box; outputs are standardized internally.

namespace lagsynth::gp {

struct GpModel {
  Matrix x;  // n x d training inputs
  double y_mean = 0.0;
  double y_sd = 1.0;
  // Kernel hyperparameters chosen by marginal-likelihood optimization.
  std::vector<double> log_length;  // one per input dimension
  double log_signal_var = 0.0;
  double jitter = 1e-6;
  Matrix chol;                // lower Cholesky factor of K + jitter I
  std::vector<double> alpha;  // (K + jitter I)^{-1} y_standardized

  std::size_t size() const { return x.rows; }
  std::size_t dim() const { return x.cols; }
};

// Matern 5/2 covariance with per-dimension length scales (no signal
// variance factor): (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r).
double matern52(const double* a, const double* b, std::size_t d,
                const std::vector<double>& log_length);

// Negative log marginal likelihood of the standardized targets under the
// kernel; used by the fit and exposed for direct testing. Returns a large
// finite value when the covariance is numerically indefinite.
double nlml(const Matrix& x, const std::vector<double>& y_std,
            const std::vector<double>& log_length, double log_signal_var,
            double jitter);

// Fits hyperparameters by Nelder-Mead over the log parameters from a fixed
// set of restarts; deterministic. The jitter is escalated (up to a cap)
// only if the factorization fails at the chosen optimum.
GpModel fit_gp(const Matrix& x, const std::vector<double>& y,
               double jitter = 1e-6);

struct Posterior {
  double mean = 0.0;
  double sd = 0.0;
};

// Posterior at a single point (original output units).
Posterior predict(const GpModel& model, const double* point);

}  // namespace lagsynth::gp
