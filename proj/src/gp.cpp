#include "lagsynth/gp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "lagsynth/linalg.hpp"

namespace lagsynth::gp {

namespace {

constexpr double kLogLenLo = -4.6051701859880914;  // ln 0.01
constexpr double kLogLenHi = 2.302585092994046;    // ln 10
constexpr double kLogVarLo = -6.907755278982137;   // ln 1e-3
constexpr double kLogVarHi = 6.907755278982137;    // ln 1e3

// ---------------------------------------------------------------------------
// Nelder-Mead (deterministic, no RNG)
// ---------------------------------------------------------------------------

std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double step, std::size_t max_iter, double tol) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> simplex(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += step;
  std::vector<double> value(d + 1);
  for (std::size_t i = 0; i <= d; ++i) value[i] = f(simplex[i]);

  std::vector<std::size_t> order(d + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                     std::size_t b) {
      return value[a] < value[b];
    });
  };

  std::vector<double> centroid(d), cand(d);
  for (std::size_t it = 0; it < max_iter; ++it) {
    sort_simplex();
    const std::size_t best = order[0], worst = order[d];
    if (std::fabs(value[worst] - value[best]) <=
        tol * (1.0 + std::fabs(value[best]))) {
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= double(d);

    auto blend = [&](double coef) {
      for (std::size_t j = 0; j < d; ++j) {
        cand[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      }
      return f(cand);
    };

    const double reflected = blend(-1.0);
    if (reflected < value[order[0]]) {
      const std::vector<double> refl = cand;
      const double expanded = blend(-2.0);
      if (expanded < reflected) {
        simplex[worst] = cand;
        value[worst] = expanded;
      } else {
        simplex[worst] = refl;
        value[worst] = reflected;
      }
      continue;
    }
    if (reflected < value[order[d - 1]]) {
      simplex[worst] = cand;
      value[worst] = reflected;
      continue;
    }
    const double contracted = blend(reflected < value[worst] ? -0.5 : 0.5);
    if (contracted < std::min(reflected, value[worst])) {
      simplex[worst] = cand;
      value[worst] = contracted;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      value[i] = f(simplex[i]);
    }
  }
  sort_simplex();
  return simplex[order[0]];
}

// ---------------------------------------------------------------------------
// kernel and marginal likelihood
// ---------------------------------------------------------------------------

Matrix kernel_matrix(const Matrix& x, const std::vector<double>& log_length,
                     double log_signal_var, double jitter) {
  const std::size_t n = x.rows;
  const double sig = std::exp(log_signal_var);
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v =
          sig * matern52(x.row(i), x.row(j), x.cols, log_length);
      k(i, j) = v;
      k(j, i) = v;
    }
    k(i, i) += jitter;
  }
  return k;
}

// Box penalty keeping the search in a sane region; quadratic outside.
double box_penalty(const std::vector<double>& theta) {
  double pen = 0.0;
  const std::size_t d = theta.size() - 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (theta[i] < kLogLenLo) pen += (kLogLenLo - theta[i]) * (kLogLenLo - theta[i]);
    if (theta[i] > kLogLenHi) pen += (theta[i] - kLogLenHi) * (theta[i] - kLogLenHi);
  }
  const double v = theta[d];
  if (v < kLogVarLo) pen += (kLogVarLo - v) * (kLogVarLo - v);
  if (v > kLogVarHi) pen += (v - kLogVarHi) * (v - kLogVarHi);
  return 100.0 * pen;
}

std::vector<double> clamp_theta(std::vector<double> theta) {
  const std::size_t d = theta.size() - 1;
  for (std::size_t i = 0; i < d; ++i) {
    theta[i] = std::clamp(theta[i], kLogLenLo, kLogLenHi);
  }
  theta[d] = std::clamp(theta[d], kLogVarLo, kLogVarHi);
  return theta;
}

}  // namespace

double matern52(const double* a, const double* b, std::size_t d,
                const std::vector<double>& log_length) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double u = (a[i] - b[i]) / std::exp(log_length[i]);
    r2 += u * u;
  }
  const double r = std::sqrt(r2);
  const double s = std::sqrt(5.0) * r;
  return (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
}

double nlml(const Matrix& x, const std::vector<double>& y_std,
            const std::vector<double>& log_length, double log_signal_var,
            double jitter) {
  const std::size_t n = x.rows;
  const Matrix k = kernel_matrix(x, log_length, log_signal_var, jitter);
  Matrix l;
  try {
    l = linalg::cholesky(k);
  } catch (const std::exception&) {
    return 1e12;  // indefinite under these hyperparameters
  }
  const std::vector<double> alpha = linalg::cholesky_solve(l, y_std);
  double fit = 0.0;
  for (std::size_t i = 0; i < n; ++i) fit += y_std[i] * alpha[i];
  constexpr double kLog2Pi = 1.8378770664093453;
  return 0.5 * fit + 0.5 * linalg::cholesky_logdet(l) +
         0.5 * double(n) * kLog2Pi;
}

GpModel fit_gp(const Matrix& x, const std::vector<double>& y, double jitter) {
  require(x.rows >= 1 && x.cols >= 1, "fit_gp", "empty training set");
  require(x.rows == y.size(), "fit_gp", "row count mismatch");
  require(jitter > 0.0, "fit_gp", "jitter must be positive");
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;

  GpModel model;
  model.x = x;
  model.jitter = jitter;
  model.y_mean = linalg::mean(y.data(), n);
  model.y_sd = std::max(std::sqrt(linalg::variance(y.data(), n)), 1e-12);
  std::vector<double> y_std(n);
  for (std::size_t i = 0; i < n; ++i) {
    y_std[i] = (y[i] - model.y_mean) / model.y_sd;
  }

  // theta = (log length scales..., log signal variance).
  auto objective = [&](const std::vector<double>& theta) {
    const std::vector<double> c = clamp_theta(theta);
    const std::vector<double> ll(c.begin(), c.end() - 1);
    return nlml(x, y_std, ll, c.back(), jitter) + box_penalty(theta);
  };

  const double starts[][2] = {
      {std::log(0.3), 0.0}, {0.0, 0.0}, {std::log(0.05), std::log(0.5)}};
  std::vector<double> best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    std::vector<double> theta0(d + 1, s[0]);
    theta0[d] = s[1];
    const std::vector<double> theta =
        nelder_mead(objective, theta0, 0.4, 200, 1e-9);
    const double value = objective(theta);
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  }

  const std::vector<double> theta = clamp_theta(best_theta);
  model.log_length.assign(theta.begin(), theta.end() - 1);
  model.log_signal_var = theta.back();

  // Factorize at the optimum, escalating jitter only if needed.
  for (;;) {
    const Matrix k = kernel_matrix(x, model.log_length, model.log_signal_var,
                                   model.jitter);
    try {
      model.chol = linalg::cholesky(k);
      break;
    } catch (const std::exception&) {
      model.jitter *= 10.0;
      require(model.jitter <= 1e-2, "fit_gp",
              "covariance not positive definite even with inflated jitter");
    }
  }
  model.alpha = linalg::cholesky_solve(model.chol, y_std);
  return model;
}

Posterior predict(const GpModel& model, const double* point) {
  const std::size_t n = model.size();
  const double sig = std::exp(model.log_signal_var);
  std::vector<double> ks(n);
  for (std::size_t i = 0; i < n; ++i) {
    ks[i] = sig *
            matern52(model.x.row(i), point, model.dim(), model.log_length);
  }
  double mean_std = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_std += ks[i] * model.alpha[i];

  // v = L^{-1} k*; var = k(x*,x*) - ||v||^2.
  std::vector<double> v = ks;
  const Matrix& l = model.chol;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = v[i];
    for (std::size_t j = 0; j < i; ++j) acc -= l(i, j) * v[j];
    v[i] = acc / l(i, i);
  }
  double vv = 0.0;
  for (std::size_t i = 0; i < n; ++i) vv += v[i] * v[i];
  const double var_std = std::max(sig + model.jitter - vv, 0.0);

  Posterior out;
  out.mean = model.y_mean + model.y_sd * mean_std;
  out.sd = model.y_sd * std::sqrt(var_std);
  return out;
}

}  // namespace lagsynth::gp
