#include "lagsynth/linalg.hpp"

#include <cmath>
#include <random>

#include "lagsynth/kernels.hpp"
#include "lagsynth/rng.hpp"

namespace lagsynth::linalg {

Matrix cholesky(const Matrix& a) {
  require(a.rows == a.cols, "linalg::cholesky", "matrix not square");
  const std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - kernels::dot(l.row(j), l.row(j), j);
    require(d > 0.0, "linalg::cholesky", "matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - kernels::dot(l.row(i), l.row(j), j)) / l(j, j);
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const Matrix& l,
                                   const std::vector<double>& b) {
  const std::size_t n = l.rows;
  require(b.size() == n, "linalg::cholesky_solve", "size mismatch");
  std::vector<double> x(b);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (x[i] - kernels::dot(l.row(i), x.data(), i)) / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

double cholesky_logdet(const Matrix& l) {
  double acc = 0.0;
  for (std::size_t i = 0; i < l.rows; ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

LeastSquares qr_least_squares(const Matrix& x, const std::vector<double>& y) {
  const std::size_t m = x.rows;
  const std::size_t n = x.cols;
  require(m >= n && n > 0, "linalg::qr_least_squares",
          "need rows >= cols >= 1");
  require(y.size() == m, "linalg::qr_least_squares", "size mismatch");

  Matrix r(x);
  std::vector<double> qty(y);

  // Householder reflections applied column by column; R overwrites the upper
  // triangle, reflectors are discarded after updating qty.
  std::vector<double> v(m);
  for (std::size_t k = 0; k < n; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) norm2 += r(i, k) * r(i, k);
    double norm = std::sqrt(norm2);
    require(norm > 1e-12 * static_cast<double>(m), "linalg::qr_least_squares",
            "rank-deficient design");
    double alpha = r(k, k) >= 0.0 ? -norm : norm;
    double vnorm2 = norm2 - 2.0 * alpha * r(k, k) + alpha * alpha;
    v[k] = r(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i] = r(i, k);

    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * r(i, j);
      double f = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < m; ++i) r(i, j) -= f * v[i];
    }
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += v[i] * qty[i];
    double f = 2.0 * s / vnorm2;
    for (std::size_t i = k; i < m; ++i) qty[i] -= f * v[i];
  }

  LeastSquares out;
  out.coef.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = qty[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= r(ii, j) * out.coef[j];
    out.coef[ii] = s / r(ii, ii);
  }
  for (std::size_t i = n; i < m; ++i) out.residual_ss += qty[i] * qty[i];

  // (X^T X)^{-1} = R^{-1} R^{-T}: solve R^T Z = I column-wise, then R W = Z.
  out.xtx_inv = Matrix(n, n);
  Matrix rinv_t(n, n);  // column j holds R^{-T} e_j
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == j) ? 1.0 : 0.0;
      for (std::size_t k2 = 0; k2 < i; ++k2) s -= r(k2, i) * rinv_t(k2, j);
      rinv_t(i, j) = s / r(i, i);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = rinv_t(ii, j);
      for (std::size_t k2 = ii + 1; k2 < n; ++k2)
        s -= r(ii, k2) * out.xtx_inv(k2, j);
      out.xtx_inv(ii, j) = s / r(ii, ii);
    }
  }
  return out;
}

double operator_norm_sq(const Matrix& x, std::uint64_t seed,
                        std::size_t max_iter, double tol) {
  const std::size_t n = x.cols;
  require(n > 0 && x.rows > 0, "linalg::operator_norm_sq", "empty matrix");
  auto gen = rng::engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(n);
  for (double& e : v) e = gauss(gen);
  std::vector<double> xv(x.rows), xtxv(n);

  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    double nrm = std::sqrt(kernels::sumsq(v.data(), n));
    if (nrm == 0.0) return 0.0;
    kernels::scal(1.0 / nrm, v.data(), n);
    kernels::gemv(x.data.data(), x.rows, x.cols, v.data(), xv.data());
    kernels::gemv_t(x.data.data(), x.rows, x.cols, xv.data(), xtxv.data());
    double next = kernels::dot(v.data(), xtxv.data(), n);
    v = xtxv;
    if (it > 0 && std::fabs(next - lambda) <= tol * std::fabs(next)) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

double mean(const double* x, std::size_t n) {
  require(n > 0, "linalg::mean", "empty input");
  return kernels::sum(x, n) / static_cast<double>(n);
}

double variance(const double* x, std::size_t n) {
  double m = mean(x, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - m;
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

}  // namespace lagsynth::linalg
