#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oracles {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// features oracles
// ---------------------------------------------------------------------------

std::vector<std::complex<double>> morlet_direct(const std::vector<double>& x,
                                                double fs, double freq,
                                                double central_freq,
                                                double time_res) {
  const double fwhm = time_res * central_freq / freq;
  const double sigma_t = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double dt = 1.0 / fs;
  const long half = static_cast<long>(std::ceil(5.0 * sigma_t / dt));
  const double amp = dt / (std::sqrt(2.0 * kPi) * sigma_t);

  std::vector<std::complex<double>> kernel(2 * half + 1);
  for (long m = -half; m <= half; ++m) {
    double t = static_cast<double>(m) * dt;
    double g = amp * std::exp(-t * t / (2.0 * sigma_t * sigma_t));
    kernel[static_cast<std::size_t>(m + half)] =
        g * std::exp(std::complex<double>(0.0, 2.0 * kPi * freq * t));
  }

  const long n = static_cast<long>(x.size());
  std::vector<std::complex<double>> out(
      x.size(), std::complex<double>(std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN()));
  for (long i = half; i < n - half; ++i) {
    std::complex<double> acc(0.0, 0.0);
    for (long m = -half; m <= half; ++m) {
      // w[i] = sum_m x[i - m] * h[m]
      acc += x[static_cast<std::size_t>(i - m)] *
             kernel[static_cast<std::size_t>(m + half)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> resample_naive(const std::vector<double>& x, double fs,
                                   double tr) {
  const double q = fs * tr;
  const double cutoff = 0.45 / q;  // cycles per input sample
  const long half = static_cast<long>(std::ceil(6.0 * q));
  const long n = static_cast<long>(x.size());
  const std::size_t out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) / q));

  auto sample_held = [&](long i) {
    if (i < 0) return x.front();
    if (i >= n) return x.back();
    return x[static_cast<std::size_t>(i)];
  };
  auto kernel = [&](double u) {
    if (std::fabs(u) > static_cast<double>(half)) return 0.0;
    double s = (u == 0.0) ? 2.0 * cutoff
                          : std::sin(2.0 * kPi * cutoff * u) / (kPi * u);
    double w = 0.54 + 0.46 * std::cos(kPi * u / static_cast<double>(half));
    return s * w;
  };

  std::vector<double> out(out_len);
  for (std::size_t k = 0; k < out_len; ++k) {
    double p = static_cast<double>(k) * q;
    long lo = static_cast<long>(std::ceil(p)) - half;
    long hi = static_cast<long>(std::floor(p)) + half;
    double acc = 0.0, wsum = 0.0;
    for (long i = lo; i <= hi; ++i) {
      double w = kernel(p - static_cast<double>(i));
      acc += w * sample_held(i);
      wsum += w;
    }
    out[k] = acc / wsum;
  }
  return out;
}

// ---------------------------------------------------------------------------
// solver oracles
// ---------------------------------------------------------------------------

std::vector<double> ols_normal_equations(const Mat& x,
                                         const std::vector<double>& y) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols + 1;  // leading intercept column
  Mat aug(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    aug(i, 0) = 1.0;
    for (std::size_t j = 0; j < x.cols; ++j) aug(i, j + 1) = x(i, j);
  }
  // Normal equations A b = c with A = X'X, c = X'y, Gaussian elimination
  // with partial pivoting.
  Mat a(p, p);
  std::vector<double> c(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += aug(r, i) * aug(r, j);
      a(i, j) = s;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += aug(r, i) * y[r];
    c[i] = s;
  }
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < p; ++i) {
      if (std::fabs(a(i, k)) > std::fabs(a(piv, k))) piv = i;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < p; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(c[k], c[piv]);
    }
    if (a(k, k) == 0.0) throw std::runtime_error("oracle ols: singular");
    for (std::size_t i = k + 1; i < p; ++i) {
      double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < p; ++j) a(i, j) -= f * a(k, j);
      c[i] -= f * c[k];
    }
  }
  std::vector<double> b(p, 0.0);
  for (std::size_t ii = p; ii-- > 0;) {
    double s = c[ii];
    for (std::size_t j = ii + 1; j < p; ++j) s -= a(ii, j) * b[j];
    b[ii] = s / a(ii, ii);
  }
  return b;
}

CdLassoResult lasso_coordinate_descent(const Mat& x,
                                       const std::vector<double>& y,
                                       double lambda, double tol,
                                       std::size_t max_iter) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  // Center y and columns; intercept recovered at the end.
  double ymean = std::accumulate(y.begin(), y.end(), 0.0) /
                 static_cast<double>(n);
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - ymean;
  Mat xc(n, p);
  std::vector<double> colmean(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x(i, j);
    m /= static_cast<double>(n);
    colmean[j] = m;
    for (std::size_t i = 0; i < n; ++i) xc(i, j) = x(i, j) - m;
  }
  std::vector<double> colsq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) colsq[j] += xc(i, j) * xc(i, j);
  }

  std::vector<double> beta(p, 0.0);
  std::vector<double> resid(yc);  // yc - Xc beta
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (colsq[j] == 0.0) continue;
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += xc(i, j) * resid[i];
      rho += colsq[j] * beta[j];
      double z = rho / static_cast<double>(n);
      double thr = lambda;
      double bnew;
      if (z > thr) {
        bnew = (z - thr) * static_cast<double>(n) / colsq[j];
      } else if (z < -thr) {
        bnew = (z + thr) * static_cast<double>(n) / colsq[j];
      } else {
        bnew = 0.0;
      }
      double d = bnew - beta[j];
      if (d != 0.0) {
        for (std::size_t i = 0; i < n; ++i) resid[i] -= d * xc(i, j);
        beta[j] = bnew;
        max_delta = std::max(max_delta, std::fabs(d));
      }
    }
    if (max_delta < tol) break;
  }

  CdLassoResult out;
  out.beta = beta;
  out.iterations = it;
  double dotbm = 0.0;
  for (std::size_t j = 0; j < p; ++j) dotbm += beta[j] * colmean[j];
  out.intercept = ymean - dotbm;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) rss += resid[i] * resid[i];
  double l1 = 0.0;
  for (double b : beta) l1 += std::fabs(b);
  out.objective = rss / (2.0 * static_cast<double>(n)) + lambda * l1;
  return out;
}

double sgl_objective(const Mat& x, const std::vector<double>& y,
                     double intercept, const std::vector<double>& beta,
                     double lambda, double alpha,
                     const std::vector<std::size_t>& group_index) {
  const std::size_t n = x.rows;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = intercept;
    for (std::size_t j = 0; j < x.cols; ++j) pred += x(i, j) * beta[j];
    double r = y[i] - pred;
    rss += r * r;
  }
  std::size_t n_groups = 0;
  for (std::size_t g : group_index) n_groups = std::max(n_groups, g + 1);
  std::vector<double> gnorm(n_groups, 0.0);
  std::vector<double> gsize(n_groups, 0.0);
  double l1 = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    gnorm[group_index[j]] += beta[j] * beta[j];
    gsize[group_index[j]] += 1.0;
    l1 += std::fabs(beta[j]);
  }
  double group_pen = 0.0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    group_pen += std::sqrt(gsize[g]) * std::sqrt(gnorm[g]);
  }
  return rss / (2.0 * static_cast<double>(n)) +
         lambda * (1.0 - alpha) * group_pen + lambda * alpha * l1;
}

double prox_objective(const std::vector<double>& v,
                      const std::vector<double>& z, double step, double lambda,
                      double alpha, const std::vector<std::size_t>& groups) {
  double quad = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    double d = z[j] - v[j];
    quad += d * d;
  }
  std::size_t n_groups = 0;
  for (std::size_t g : groups) n_groups = std::max(n_groups, g + 1);
  std::vector<double> gnorm(n_groups, 0.0), gsize(n_groups, 0.0);
  double l1 = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    gnorm[groups[j]] += z[j] * z[j];
    gsize[groups[j]] += 1.0;
    l1 += std::fabs(z[j]);
  }
  double gp = 0.0;
  for (std::size_t g = 0; g < n_groups; ++g)
    gp += std::sqrt(gsize[g]) * std::sqrt(gnorm[g]);
  return 0.5 * quad + step * lambda * (1.0 - alpha) * gp +
         step * lambda * alpha * l1;
}

std::vector<double> prox_grid_minimize(const std::vector<double>& v,
                                       double step, double lambda,
                                       double alpha,
                                       const std::vector<std::size_t>& groups,
                                       double resolution) {
  const std::size_t d = v.size();
  if (d > 4) throw std::runtime_error("oracle prox grid: > 4 dims");
  std::vector<double> center(v);
  double width = 0.0;
  for (double e : v) width = std::max(width, std::fabs(e) + 1.0);

  const int pts = 11;  // per axis per refinement round
  std::vector<double> best(center);
  double best_obj = prox_objective(v, best, step, lambda, alpha, groups);
  while (width > resolution / 2.0) {
    std::vector<int> idx(d, 0);
    bool carry = false;
    while (!carry) {
      std::vector<double> z(d);
      for (std::size_t j = 0; j < d; ++j) {
        z[j] = center[j] +
               width * (2.0 * idx[j] / (pts - 1.0) - 1.0);
      }
      double obj = prox_objective(v, z, step, lambda, alpha, groups);
      if (obj < best_obj) {
        best_obj = obj;
        best = z;
      }
      std::size_t j = 0;
      for (; j < d; ++j) {
        if (++idx[j] < pts) break;
        idx[j] = 0;
      }
      carry = (j == d);
    }
    center = best;
    width /= 4.0;  // new grid spans +-width around best with finer spacing
  }
  // Exact zero is always a candidate (the penalty is non-smooth there).
  std::vector<double> zero(d, 0.0);
  if (prox_objective(v, zero, step, lambda, alpha, groups) < best_obj) {
    best = zero;
  }
  return best;
}

double prox_subgradient_residual(const std::vector<double>& v,
                                 const std::vector<double>& z, double step,
                                 double lambda, double alpha,
                                 const std::vector<std::size_t>& groups) {
  std::size_t n_groups = 0;
  for (std::size_t g : groups) n_groups = std::max(n_groups, g + 1);
  std::vector<double> gnorm(n_groups, 0.0), gsize(n_groups, 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    gnorm[groups[j]] += z[j] * z[j];
    gsize[groups[j]] += 1.0;
  }
  for (auto& gn : gnorm) gn = std::sqrt(gn);

  const double l1w = step * lambda * alpha;
  double worst = 0.0;
  // Coordinates in groups with nonzero norm.
  for (std::size_t j = 0; j < z.size(); ++j) {
    std::size_t g = groups[j];
    double l2w = step * lambda * (1.0 - alpha) * std::sqrt(gsize[g]);
    if (gnorm[g] > 0.0) {
      if (z[j] != 0.0) {
        double grad = z[j] - v[j] + l1w * (z[j] > 0 ? 1.0 : -1.0) +
                      l2w * z[j] / gnorm[g];
        worst = std::max(worst, std::fabs(grad));
      } else {
        // z_j = 0 in an active group: group term contributes 0 at this
        // coordinate; l1 subgradient in [-l1w, l1w].
        double resid = std::fabs(z[j] - v[j]) - l1w;
        worst = std::max(worst, std::max(0.0, resid));
      }
    }
  }
  // Entirely zero groups: 0 must lie in -v_g + l1-ball + l2w * unit-ball.
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (gnorm[g] > 0.0) continue;
    double l2w = step * lambda * (1.0 - alpha) * std::sqrt(gsize[g]);
    double ssq = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (groups[j] != g) continue;
      double soft = std::max(0.0, std::fabs(v[j]) - l1w);
      ssq += soft * soft;
    }
    worst = std::max(worst, std::max(0.0, std::sqrt(ssq) - l2w));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// statistics oracles
// ---------------------------------------------------------------------------

namespace {

// Average ranks of |d| (1-based, ties share the mean rank).
std::vector<double> abs_ranks(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(diffs[a]) < std::fabs(diffs[b]);
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(diffs[order[j + 1]]) ==
                            std::fabs(diffs[order[i]])) {
      ++j;
    }
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) /
                 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::pair<double, double> wilcoxon_enumerate(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  if (n == 0 || n > 20)
    throw std::runtime_error("oracle wilcoxon: n out of range");
  auto ranks = abs_ranks(diffs);
  double w_obs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) w_obs += ranks[i];
  }
  const std::uint64_t total = 1ULL << n;
  std::uint64_t count_le = 0, count_ge = 0;
  const double eps = 1e-9;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ULL << i)) w += ranks[i];
    }
    if (w <= w_obs + eps) ++count_le;
    if (w >= w_obs - eps) ++count_ge;
  }
  double p = 2.0 *
             std::min(static_cast<double>(count_le),
                      static_cast<double>(count_ge)) /
             static_cast<double>(total);
  return {w_obs, std::min(1.0, p)};
}

std::vector<bool> bh_stepup_hand(const std::vector<double>& pvals, double q) {
  const std::size_t m = pvals.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::size_t k = 0;  // largest 1-based rank i with p_(i) <= i*q/m
  for (std::size_t i = 1; i <= m; ++i) {
    if (pvals[order[i - 1]] <=
        static_cast<double>(i) * q / static_cast<double>(m)) {
      k = i;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < k; ++i) reject[order[i]] = true;
  return reject;
}

std::vector<double> bh_adjusted_hand(const std::vector<double>& pvals) {
  const std::size_t m = pvals.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::vector<double> adj(m, 0.0);
  double running = 1.0;
  for (std::size_t ii = m; ii-- > 0;) {
    double cand = static_cast<double>(m) * pvals[order[ii]] /
                  static_cast<double>(ii + 1);
    running = std::min(running, std::min(1.0, cand));
    adj[order[ii]] = running;
  }
  return adj;
}

double pearson_direct(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) /
              static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) /
              static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracles
