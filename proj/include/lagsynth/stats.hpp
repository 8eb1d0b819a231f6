#pragma once

#include <cstddef>
#include <vector>

#include "lagsynth/common.hpp"
#include "lagsynth/types.hpp"

// Reference baseline models (sensorimotor-rhythm shift predictor, massive
// univariate correlation) and the group-level statistics: Pearson
// correlation, Wilcoxon signed-rank, Benjamini-Hochberg FDR, and coefficient
// map aggregation with one-sample t tests.

namespace lagsynth::stats {

struct PearsonResult {
  double r = 0.0;
  // Set when either input has zero variance; r is reported as 0.
  bool degenerate = false;
};

PearsonResult pearson(const std::vector<double>& x,
                      const std::vector<double>& y);

struct WilcoxonResult {
  double statistic = 0.0;  // W+: rank sum of positive differences
  double p_value = 1.0;    // two-sided
  std::size_t n_used = 0;  // pairs remaining after zero-difference removal
  bool exact = false;      // exact null enumeration vs normal approximation
  bool degenerate = false;  // all differences were zero
};

// Paired two-sided test of a vs b. Zero differences are dropped; all-zero
// input yields the degenerate p = 1 result; 1 <= n < 5 non-zero differences
// is refused. Exact null distribution for n <= 25 (average ranks, tie-aware
// convolution), tie-corrected normal approximation above (no continuity
// correction).
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b);

struct BhResult {
  std::vector<bool> reject;
  std::vector<double> adjusted;  // monotone step-up adjusted p-values
};

// Benjamini-Hochberg step-up control of FDR at level q.
BhResult bh_fdr(const std::vector<double>& pvals, double q);

// Student-t helpers used by the map statistics (two-sided).
double student_t_cdf(double t, double df);
double student_t_critical(double alpha_two_sided, double df);

// Sensorimotor-rhythm baseline: mean relative power over channels {C3, C4}
// and frequencies in [8, 30] Hz, shifted forward by round(6.3 / tr) samples
// with edge-hold at each run start. The raw band power is returned; under
// task-related desynchronization it correlates negatively with activation,
// so callers typically evaluate both signed r and |r|.
std::vector<double> smr_predict(const SpectralFeatureTensor& tensor,
                                double tr);

struct MucModel {
  // Per-column Pearson correlation with the target, indexed like the design
  // columns: (c*F + f)*M + m.
  std::vector<double> corr;
  std::size_t channels = 0, freqs = 0, lags = 0;
  std::size_t selected_col = 0;  // max |corr|, ties to the lowest index
  std::size_t sel_channel = 0, sel_freq = 0, sel_lag = 0;
  double scale = 0.0, offset = 0.0;  // univariate fit on the selected column
};

// Massive univariate correlation baseline: correlate every design column
// with the target, select the strongest, and fit a univariate least-squares
// prediction rule on it. Zero-variance columns record correlation 0.
MucModel muc_fit(const LaggedDesign& design, const std::vector<double>& y);

std::vector<double> muc_predict(const MucModel& model,
                                const LaggedDesign& design);

struct TMap {
  std::size_t rows = 0, cols = 0;
  std::vector<double> t;     // row-major t-statistics
  std::vector<bool> masked;  // zero-variance cells (t undefined)
  double critical_t = 0.0;
  // Connected components (4-connectivity) of unmasked |t| > critical_t,
  // labeled 1..n_clusters in row-major discovery order; 0 = below threshold.
  std::vector<int> cluster;
  std::size_t n_clusters = 0;
};

struct TMapSet {
  TMap freq_channel;  // F x C view, lags collapsed
  TMap freq_lag;      // F x M view, channels collapsed
  // Mean over units and channels of the aggregated frequency x channel
  // values, one entry per frequency.
  std::vector<double> mean_curve;
  double alpha = 0.05;
};

// Aggregates per-unit coefficient (or correlation) tensors of shape
// [C x F x M] (flattened like design columns) across units. Collapsing an
// axis takes the value of maximum absolute magnitude, preserving its sign,
// with ties broken toward the lowest collapsed index; cell statistics are
// one-sample t tests across units.
TMapSet aggregate_coeff_maps(const std::vector<std::vector<double>>& units,
                             std::size_t channels, std::size_t freqs,
                             std::size_t lags, double alpha = 0.05);

}  // namespace lagsynth::stats
