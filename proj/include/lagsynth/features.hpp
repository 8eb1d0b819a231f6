#pragma once

#include <cstddef>
#include <vector>

#include "lagsynth/common.hpp"
#include "lagsynth/types.hpp"

// Feature pipeline: raw multichannel series -> relative spectral power ->
// trial-average removal -> resampling to the target grid -> per-run
// standardization -> lag-stacked regression design.

namespace lagsynth::features {

// Time-frequency decomposition with an analytic complex Morlet wavelet.
//
// The mother wavelet is pinned as a Gaussian-envelope complex exponential
// with unit peak frequency-domain gain:
//   h(t) = 1/(sqrt(2 pi) sigma_t) * exp(-t^2 / (2 sigma_t^2)) * e^{i 2 pi f t}
// where the envelope width scales with frequency so that the FWHM time
// resolution equals time_res_s at central_freq and shrinks as 1/f:
//   FWHM_t(f) = time_res_s * central_freq / f,
//   sigma_t(f) = FWHM_t(f) / (2 sqrt(2 ln 2)),  sigma_f = 1/(2 pi sigma_t).
// Computed in the frequency domain: the spectrum is multiplied by the
// one-sided Gaussian exp(-(f'-f)^2 / (2 sigma_f^2)) for f' >= 0 and zero for
// f' < 0 (analytic transform, circular boundary).
//
// Output is relative power: |w|^2 normalized per (t, c) by the sum across
// the requested frequencies, so frequency marginals sum to 1. An all-zero
// spectrum maps to the uniform distribution 1/F.
//
// signal: [N x C] row-major, one column per channel.
SpectralFeatureTensor morlet_relative_power(const Matrix& signal, double fs,
                                            const std::vector<double>& freqs,
                                            double central_freq = 1.0,
                                            double time_res_s = 3.0);

// Subtracts the per-run, per-side across-trial mean ("stereotype") inside
// each trial window; samples outside windows pass through unchanged. Windows
// must lie inside a single run and must not overlap. Applying the operation
// twice equals applying it once.
SpectralFeatureTensor remove_trial_average(const SpectralFeatureTensor& tensor,
                                           const TrialParadigm& paradigm);

// Anti-aliased resampling to one sample per tr seconds. Each run is
// resampled independently with a Hamming-windowed sinc kernel (cutoff
// 0.45/q cycles per input sample, half-length ceil(6 q), q = fs * tr),
// edge-hold padding, and per-position kernel normalization; output run
// length is floor(run_length / q).
SpectralFeatureTensor resample_to_tr(const SpectralFeatureTensor& tensor,
                                     double tr);

// Per run and per (channel, frequency) series: subtract the mean and divide
// by the population (1/N) standard deviation. Zero-variance series map to
// all zeros.
SpectralFeatureTensor standardize_runs(const SpectralFeatureTensor& tensor);

// Lag-stacked design. Column (c, f, n) is at index (c*F + f)*M + n and holds
// tensor[t - n, c, f] for output row t - (M-1); the first M-1 samples are
// dropped so every row is fully defined. Run boundaries inside the tensor
// are ignored here: callers slice per contiguous block first (see
// slice_time) so lags never reach across block seams.
LaggedDesign build_lagged_design(const SpectralFeatureTensor& tensor,
                                 std::size_t lags);

// Trims a target series exactly like build_lagged_design trims rows.
std::vector<double> align_target(const std::vector<double>& y,
                                 std::size_t lags);

// Sample subrange [begin, end) as a standalone tensor; run boundaries are
// clipped and rebased.
SpectralFeatureTensor slice_time(const SpectralFeatureTensor& tensor,
                                 std::size_t begin, std::size_t end);

}  // namespace lagsynth::features
