#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lagsynth/cv.hpp"

// Surrogate-data significance testing: phase-randomized (FT) and iterative
// amplitude-adjusted (IAAFT) surrogates of the target series, an augmented
// Dickey-Fuller stationarity pre-test, and the empirical null distribution
// of test correlations over surrogate-trained models.

namespace lagsynth::surrogates {

// Phase-randomized surrogate: identical spectral magnitudes, uniformly
// random phases on the interior bins (DC and Nyquist fixed so the series
// stays real and keeps its mean). Deterministic per (y, seed).
std::vector<double> ft_surrogate(const std::vector<double>& y,
                                 std::uint64_t seed);

struct IaaftOptions {
  std::size_t max_iter = 200;
  double spectrum_tol = 1e-4;  // relative RMS magnitude error
};

struct IaaftResult {
  std::vector<double> series;
  std::size_t iterations = 0;
  double spectrum_error = 0.0;  // relative RMS error of `series`
  bool converged = false;
};

// Iterative amplitude-adjusted surrogate: alternates exact spectral
// magnitude replacement with rank remapping onto the sorted original
// values, so the output is always a permutation of y. `converged` means
// the relative RMS spectral error reached spectrum_tol or the iteration
// reached its floor: either an exact fixed point (the remap reproduced
// its own input) or a pass that would have increased the error (the
// previous iterate is returned, keeping the error trajectory monotone).
// converged = false only when max_iter ran out while still improving.
IaaftResult iaaft_surrogate(const std::vector<double>& y, std::uint64_t seed,
                            const IaaftOptions& opts = {});

struct AdfResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t lags_used = 0;
  bool rejected = false;  // p_value < threshold: unit root rejected
  double threshold = 0.05;
};

// Augmented Dickey-Fuller test with constant term. The lag order p in
// [0, max_lag] minimizes the AIC on a common sample (all candidates see the
// same rows), then the chosen order is refit on the longest sample. The
// p-value uses the standard response-surface approximation for the
// constant-only case.
AdfResult adf_test(const std::vector<double>& y, std::size_t max_lag = 12,
                   double threshold = 0.05);

// Response-surface p-value for the constant-case statistic (exposed for
// direct testing against frozen references).
double mackinnon_pvalue(double statistic);

struct NullOptions {
  std::size_t n_surrogates = 100;
  std::uint64_t base_seed = 0;
  double adf_threshold = 0.05;
  std::size_t adf_max_lag = 12;
  IaaftOptions iaaft;
};

struct NullDistribution {
  // Test correlation of each successful surrogate-trained model, in
  // surrogate index order.
  std::vector<double> surrogate_stats;
  double observed_stat = 0.0;
  std::size_t n_surrogates = 0;  // successes contributing to the p-values
  std::size_t n_failed = 0;
  // Tie-inclusive count: #{surrogate >= observed} / n.
  double p_value = 1.0;
  // Conservative variant (k+1)/(n+1), never exactly zero.
  double p_conservative = 1.0;
  AdfResult adf_session1, adf_session2;
};

// Empirical null of the pipeline's mean test correlation. Both session
// targets must pass the ADF stationarity pre-test. Surrogate i replaces
// the two targets with IAAFT surrogates drawn from the seed stream
// base_seed + i (one sub-stream per session) and reruns the *same*
// pipeline entry point used for the observed statistic; failures are
// excluded with a warning and the counts adjusted.
NullDistribution null_distribution(const cv::SessionData& s1,
                                   const cv::SessionData& s2,
                                   const cv::PipelineOptions& pipeline,
                                   const NullOptions& opts,
                                   const cv::PipelineFn& run_fn =
                                       &cv::run_pipeline);

}  // namespace lagsynth::surrogates
