#pragma once

#include <cstdint>
#include <vector>

#include "lagsynth/common.hpp"

// Small dense linear algebra used by the solver, the Gaussian process, and
// the regression-based tests: Cholesky, Householder QR least squares, and a
// power iteration for the design operator norm.

namespace lagsynth::linalg {

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Throws if a non-positive pivot is encountered.
Matrix cholesky(const Matrix& a);

// Solves A x = b given the Cholesky factor L of A (forward then back
// substitution).
std::vector<double> cholesky_solve(const Matrix& l,
                                   const std::vector<double>& b);

// log(det(A)) from its Cholesky factor.
double cholesky_logdet(const Matrix& l);

struct LeastSquares {
  std::vector<double> coef;
  double residual_ss = 0.0;
  // Unscaled coefficient covariance (X^T X)^{-1}; multiply by the residual
  // variance estimate to get standard errors.
  Matrix xtx_inv;
};

// Least squares via Householder QR. Requires rows >= cols and full column
// rank (throws on rank deficiency).
LeastSquares qr_least_squares(const Matrix& x, const std::vector<double>& y);

// Largest eigenvalue of X^T X (squared spectral norm of X), estimated by
// power iteration with a seeded start vector.
double operator_norm_sq(const Matrix& x, std::uint64_t seed,
                        std::size_t max_iter = 200, double tol = 1e-9);

double mean(const double* x, std::size_t n);
double variance(const double* x, std::size_t n);  // population (1/n)

}  // namespace lagsynth::linalg
