#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lagsynth/types.hpp"

// Synthetic paired (features, target) sessions with known ground truth:
// latent band-power series driven by a trial paradigm, a target built from
// the latents through a lagged coefficient tensor, autoregressive noise
// scaled to an exact signal-to-noise ratio, and an optional session-level
// drift shared by features and target (the leakage lever).

namespace lagsynth::synthgen {

// -----------------------------------------------------------------------
// hemodynamic response kernel
// -----------------------------------------------------------------------

struct HrfParams {
  double peak_s = 6.0;         // response gamma peaks here (shape 6)
  double undershoot_s = 16.0;  // undershoot gamma peaks here (shape 12)
  double ratio = 1.0 / 6.0;    // undershoot size relative to the response
};

// Difference of two gamma densities sampled every `tr` seconds over
// [0, duration], rescaled so the largest sample is exactly 1. The result
// rises to a peak near peak_s, dips into a single shallow negative
// undershoot, and returns toward zero.
std::vector<double> double_gamma_hrf(double tr, double duration_s,
                                     const HrfParams& params = {});

// -----------------------------------------------------------------------
// generator spec
// -----------------------------------------------------------------------

struct SyntheticSpec {
  std::size_t t_per_session = 0;  // samples per session
  std::size_t n_channels = 0;
  std::size_t n_freqs = 0;
  std::size_t n_lags = 0;
  double tr = 1.0;  // seconds per sample

  std::vector<std::string> channel_labels;  // size n_channels
  std::vector<double> freqs;                // size n_freqs

  TrialParadigm paradigm;     // shared by both sessions
  double trial_duration_s = 0.0;  // boxcar length per onset

  // Ground-truth lagged coefficients, row-major [channel][freq][lag].
  // A (channel, freq) cell is active when any of its lags is nonzero;
  // active cells carry the paradigm boxcar in their latent series.
  std::vector<double> true_coeffs;

  double snr = 4.0;              // var(noiseless target) / var(noise)
  double noise_ar = 0.4;         // AR(1) coefficient of the target noise
  double feature_noise = 0.1;    // iid noise sd added to every feature
  double session_confound = 0.0; // shared-drift amplitude (0 disables)

  HrfParams hrf;
  std::uint64_t seed = 0;

  double& coeff(std::size_t c, std::size_t f, std::size_t m) {
    return true_coeffs[(c * n_freqs + f) * n_lags + m];
  }
  double coeff(std::size_t c, std::size_t f, std::size_t m) const {
    return true_coeffs[(c * n_freqs + f) * n_lags + m];
  }

  void validate(const std::string& where) const;
};

struct SyntheticDataset {
  SpectralFeatureTensor session1;
  SpectralFeatureTensor session2;
  std::vector<double> target1;
  std::vector<double> target2;
  SyntheticSpec spec;  // regenerating from this reproduces the data exactly
};

// Deterministic generation: the same spec always yields bit-identical
// sessions. The target's noiseless part is sum_{c,f,m} coeff * u(t - m)
// over latent series u; the injected AR(1) noise is rescaled so the
// empirical variance ratio equals spec.snr exactly.
SyntheticDataset generate(const SyntheticSpec& spec);

// Pinned example specs: "S1" group-sparse recovery (three active channels),
// "S2" a single planted cell at (C3, 10 Hz, lag 5), "S3" session-confound
// leakage demonstration. Unknown names raise an error listing the valid
// ones.
SyntheticSpec scenario(const std::string& name);

}  // namespace lagsynth::synthgen
