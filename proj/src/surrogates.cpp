#include "lagsynth/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "lagsynth/fft.hpp"
#include "lagsynth/linalg.hpp"
#include "lagsynth/parallel.hpp"
#include "lagsynth/rng.hpp"

namespace lagsynth::surrogates {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::vector<double> magnitudes(const std::vector<std::complex<double>>& bins) {
  std::vector<double> mags(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) mags[i] = std::abs(bins[i]);
  return mags;
}

// Relative RMS difference between the spectral magnitudes of x and the
// reference magnitudes.
double spectrum_error(const std::vector<double>& x,
                      const std::vector<double>& ref_mags) {
  const auto mags = magnitudes(fft::rfft(x));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref_mags.size(); ++i) {
    const double d = mags[i] - ref_mags[i];
    num += d * d;
    den += ref_mags[i] * ref_mags[i];
  }
  if (den <= 0.0) return 0.0;
  return std::sqrt(num / den);
}

}  // namespace

// ---------------------------------------------------------------------------
// FT surrogate
// ---------------------------------------------------------------------------

std::vector<double> ft_surrogate(const std::vector<double>& y,
                                 std::uint64_t seed) {
  const std::size_t n = y.size();
  require(n >= 4, "ft_surrogate", "need at least 4 samples");

  auto bins = fft::rfft(y);
  std::mt19937_64 gen = rng::engine(rng::derive(seed, 0x66742d70ULL));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  // Interior bins get fresh phases; DC always stays, and for even n the
  // Nyquist bin must stay real.
  const std::size_t last = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
  for (std::size_t k = 1; k < last; ++k) {
    const double mag = std::abs(bins[k]);
    const double ph = phase(gen);
    bins[k] = std::polar(mag, ph);
  }
  return fft::irfft(bins, n);
}

// ---------------------------------------------------------------------------
// IAAFT surrogate
// ---------------------------------------------------------------------------

IaaftResult iaaft_surrogate(const std::vector<double>& y, std::uint64_t seed,
                            const IaaftOptions& opts) {
  const std::size_t n = y.size();
  require(n >= 4, "iaaft_surrogate", "need at least 4 samples");
  require(opts.max_iter >= 1, "iaaft_surrogate", "max_iter must be >= 1");
  require(opts.spectrum_tol >= 0.0, "iaaft_surrogate",
          "spectrum_tol must be >= 0");

  const std::vector<double> ref_mags = magnitudes(fft::rfft(y));
  std::vector<double> sorted_y = y;
  std::sort(sorted_y.begin(), sorted_y.end());

  // Start from a seeded random permutation of the original values.
  std::vector<double> current = y;
  std::mt19937_64 gen = rng::engine(rng::derive(seed, 0x69616166ULL));
  std::shuffle(current.begin(), current.end(), gen);

  IaaftResult out;
  out.series = current;
  out.spectrum_error = spectrum_error(current, ref_mags);
  out.converged = out.spectrum_error <= opts.spectrum_tol;
  if (out.converged) return out;

  std::vector<std::size_t> order(n);
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    // Impose the exact spectral magnitudes, keeping the current phases.
    auto bins = fft::rfft(current);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double mag = std::abs(bins[k]);
      bins[k] = mag > 0.0 ? bins[k] * (ref_mags[k] / mag)
                          : std::complex<double>(ref_mags[k], 0.0);
    }
    const std::vector<double> shaped = fft::irfft(bins, n);

    // Restore the exact amplitude distribution by rank remapping.
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return shaped[a] < shaped[b];
                     });
    std::vector<double> remapped(n);
    for (std::size_t r = 0; r < n; ++r) remapped[order[r]] = sorted_y[r];

    const double err = spectrum_error(remapped, ref_mags);
    if (remapped == current) {
      // Exact fixed point: the remap reproduced its own input, so every
      // further pass is identical. The spectral error stays at its floor.
      out.iterations = it + 1;
      out.converged = true;
      break;
    }
    if (err >= out.spectrum_error) {
      // Error floor reached: accepting this pass would not improve the
      // match, so the previous iterate stands as the converged output.
      out.converged = true;
      break;
    }

    current = std::move(remapped);
    out.series = current;
    out.spectrum_error = err;
    out.iterations = it + 1;
    if (err <= opts.spectrum_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// augmented Dickey-Fuller
// ---------------------------------------------------------------------------

double mackinnon_pvalue(double statistic) {
  // Response-surface approximation, constant case. Outside the tabulated
  // range the p-value saturates.
  constexpr double kTauMax = 2.74;
  constexpr double kTauMin = -18.83;
  constexpr double kTauStar = -1.61;
  if (statistic > kTauMax) return 1.0;
  if (statistic < kTauMin) return 0.0;
  double z;
  if (statistic <= kTauStar) {
    z = 2.1659 + statistic * (1.4412 + statistic * 0.038269);
  } else {
    z = 1.7339 +
        statistic * (0.93202 + statistic * (-0.12745 + statistic * -0.010368));
  }
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace {

// Builds the ADF regression rows for lag order p with responses
// dy[start..]: X = [1, y_{t-1}, dy_{t-1}, ..., dy_{t-p}].
void adf_regression(const std::vector<double>& y,
                    const std::vector<double>& dy, std::size_t p,
                    std::size_t start, Matrix& x, std::vector<double>& b) {
  const std::size_t rows = dy.size() - start;
  x = Matrix(rows, p + 2);
  b.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t s = start + r;  // response is dy[s] = y[s+1] - y[s]
    b[r] = dy[s];
    x(r, 0) = 1.0;
    x(r, 1) = y[s];
    for (std::size_t j = 1; j <= p; ++j) x(r, 1 + j) = dy[s - j];
  }
}

}  // namespace

AdfResult adf_test(const std::vector<double>& y, std::size_t max_lag,
                   double threshold) {
  const std::size_t n = y.size();
  require(n > max_lag + 2, "adf_test", "series shorter than max_lag + 3");
  require(threshold > 0.0 && threshold < 1.0, "adf_test",
          "threshold must be in (0, 1)");
  const std::size_t sel_rows = n - 1 - max_lag;
  require(sel_rows > max_lag + 3, "adf_test",
          "too few observations for the requested max_lag");

  std::vector<double> dy(n - 1);
  for (std::size_t t = 0; t + 1 < n; ++t) dy[t] = y[t + 1] - y[t];

  // Lag order by AIC on the common sample (every candidate sees the same
  // rows, so the criteria are comparable); ties go to the smaller order.
  std::size_t best_p = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  Matrix x;
  std::vector<double> b;
  for (std::size_t p = 0; p <= max_lag; ++p) {
    adf_regression(y, dy, p, max_lag, x, b);
    const auto ls = linalg::qr_least_squares(x, b);
    const double m = double(x.rows);
    const double aic =
        m * std::log(std::max(ls.residual_ss / m, 1e-300)) +
        2.0 * double(p + 2);
    if (aic < best_aic) {
      best_aic = aic;
      best_p = p;
    }
  }

  // Refit the chosen order on the longest available sample.
  adf_regression(y, dy, best_p, best_p, x, b);
  const auto ls = linalg::qr_least_squares(x, b);
  const double dof = double(x.rows) - double(best_p + 2);
  require(dof > 0.0, "adf_test", "no residual degrees of freedom");
  const double sigma2 = ls.residual_ss / dof;
  const double se = std::sqrt(sigma2 * ls.xtx_inv(1, 1));
  require(se > 0.0 && std::isfinite(se), "adf_test",
          "degenerate regression (zero standard error)");

  AdfResult out;
  out.statistic = ls.coef[1] / se;
  out.p_value = mackinnon_pvalue(out.statistic);
  out.lags_used = best_p;
  out.threshold = threshold;
  out.rejected = out.p_value < threshold;
  return out;
}

// ---------------------------------------------------------------------------
// null distribution
// ---------------------------------------------------------------------------

NullDistribution null_distribution(const cv::SessionData& s1,
                                   const cv::SessionData& s2,
                                   const cv::PipelineOptions& pipeline,
                                   const NullOptions& opts,
                                   const cv::PipelineFn& run_fn) {
  require(opts.n_surrogates >= 1, "null_distribution",
          "need at least 1 surrogate");
  require(static_cast<bool>(run_fn), "null_distribution",
          "pipeline function must be callable");

  NullDistribution out;
  out.adf_session1 =
      adf_test(s1.target, opts.adf_max_lag, opts.adf_threshold);
  out.adf_session2 =
      adf_test(s2.target, opts.adf_max_lag, opts.adf_threshold);
  if (!out.adf_session1.rejected || !out.adf_session2.rejected) {
    fail("null_distribution",
         "target failed the stationarity pre-test (ADF statistic = " +
             std::to_string(out.adf_session1.statistic) + " / " +
             std::to_string(out.adf_session2.statistic) + ", p = " +
             std::to_string(out.adf_session1.p_value) + " / " +
             std::to_string(out.adf_session2.p_value) +
             "; unit root not rejected)");
  }

  out.observed_stat = run_fn(s1, s2, pipeline).report.mean_r;

  const std::size_t n = opts.n_surrogates;
  std::vector<double> stats(n, 0.0);
  std::vector<char> ok(n, 0);
  std::vector<std::string> errors(n);
  parallel_for(n, [&](std::size_t i) {
    const std::uint64_t seed_i = opts.base_seed + i;
    cv::SessionData t1 = s1;
    cv::SessionData t2 = s2;
    t1.target =
        iaaft_surrogate(s1.target, rng::derive(seed_i, 0), opts.iaaft).series;
    t2.target =
        iaaft_surrogate(s2.target, rng::derive(seed_i, 1), opts.iaaft).series;
    try {
      stats[i] = run_fn(t1, t2, pipeline).report.mean_r;
      ok[i] = 1;
    } catch (const std::exception& err) {
      errors[i] = err.what();
    }
  });

  std::size_t exceed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) {
      ++out.n_failed;
      std::cerr << "null_distribution: warning: surrogate " << i
                << " failed and was excluded: " << errors[i] << "\n";
      continue;
    }
    out.surrogate_stats.push_back(stats[i]);
    if (stats[i] >= out.observed_stat) ++exceed;
  }
  out.n_surrogates = out.surrogate_stats.size();
  require(out.n_surrogates >= 1, "null_distribution",
          "all surrogate fits failed");
  out.p_value = double(exceed) / double(out.n_surrogates);
  out.p_conservative =
      double(exceed + 1) / double(out.n_surrogates + 1);
  return out;
}

}  // namespace lagsynth::surrogates
