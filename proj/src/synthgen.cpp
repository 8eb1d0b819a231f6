#include "lagsynth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lagsynth/common.hpp"
#include "lagsynth/linalg.hpp"
#include "lagsynth/rng.hpp"

namespace lagsynth::synthgen {

namespace {

// Stream tags keeping every noise source on its own seed lane, so e.g.
// changing snr never reshuffles the latents.
constexpr std::uint64_t kLatentTag = 0x6c61746eULL;
constexpr std::uint64_t kNoiseTag = 0x6e6f6973ULL;
constexpr std::uint64_t kFeatureTag = 0x66656174ULL;
constexpr std::uint64_t kDriftTag = 0x64726674ULL;

constexpr double kLatentAr = 0.8;   // fluctuation memory of latent series
constexpr double kLatentMix = 0.5;  // fluctuation amplitude vs boxcar
constexpr double kDriftLoadingSd = 3.0;  // feature-side drift loading spread

double gamma_pdf(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::pow(t, shape - 1.0) * std::exp(-t / scale) /
         (std::tgamma(shape) * std::pow(scale, shape));
}

void standardize(std::vector<double>& x, const std::string& where) {
  const double m = linalg::mean(x.data(), x.size());
  const double v = linalg::variance(x.data(), x.size());
  require(v > 0.0, where, "series has zero variance");
  const double inv_sd = 1.0 / std::sqrt(v);
  for (double& value : x) value = (value - m) * inv_sd;
}

// AR(1) driven by unit normals, started at zero.
std::vector<double> ar1_noise(std::size_t n, double coeff,
                              std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n);
  double prev = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    prev = coeff * prev + normal(gen);
    x[t] = prev;
  }
  return x;
}

// Trial boxcar over the latent window [-n_lags, T) in samples; warmup
// samples fall before every onset and stay zero.
std::vector<double> trial_boxcar(const SyntheticSpec& spec) {
  const std::size_t window = spec.t_per_session + spec.n_lags;
  std::vector<double> box(window, 0.0);
  for (std::size_t w = 0; w < window; ++w) {
    const double time_s =
        (double(w) - double(spec.n_lags)) * spec.tr;
    for (const auto& onset : spec.paradigm.onsets) {
      if (time_s >= onset.time_s &&
          time_s < onset.time_s + spec.trial_duration_s) {
        box[w] = 1.0;
        break;
      }
    }
  }
  return box;
}

// Smooth per-session drift: four low-frequency sinusoids with seeded
// phases, standardized to unit variance.
std::vector<double> slow_drift(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::vector<double> d(n, 0.0);
  for (int harmonic = 1; harmonic <= 4; ++harmonic) {
    const double ph = phase(gen);
    for (std::size_t t = 0; t < n; ++t) {
      d[t] += std::sin(2.0 * M_PI * double(harmonic) * (double(t) + 0.5) /
                           double(n) +
                       ph);
    }
  }
  standardize(d, "synthgen::slow_drift");
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// hemodynamic response kernel
// ---------------------------------------------------------------------------

std::vector<double> double_gamma_hrf(double tr, double duration_s,
                                     const HrfParams& params) {
  require(tr > 0.0, "double_gamma_hrf", "tr must be positive");
  require(duration_s >= 20.0, "double_gamma_hrf",
          "duration must cover at least 20 s");
  require(params.peak_s > 0.0 && params.undershoot_s > params.peak_s &&
              params.ratio >= 0.0,
          "double_gamma_hrf", "invalid shape parameters");

  // Gamma densities with shapes 6 and 12; the scales put their modes at
  // peak_s and undershoot_s exactly.
  const double response_scale = params.peak_s / 5.0;
  const double undershoot_scale = params.undershoot_s / 11.0;

  const auto n = std::size_t(std::floor(duration_s / tr)) + 1;
  std::vector<double> kernel(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) * tr;
    kernel[i] = gamma_pdf(t, 6.0, response_scale) -
                params.ratio * gamma_pdf(t, 12.0, undershoot_scale);
    peak = std::max(peak, kernel[i]);
  }
  require(peak > 0.0, "double_gamma_hrf", "kernel has no positive peak");
  for (double& v : kernel) v /= peak;
  return kernel;
}

// ---------------------------------------------------------------------------
// spec validation
// ---------------------------------------------------------------------------

void SyntheticSpec::validate(const std::string& where) const {
  require(t_per_session >= 2 * std::max<std::size_t>(n_lags, 1), where,
          "t_per_session too small for the lag depth");
  require(n_channels >= 1 && n_freqs >= 1 && n_lags >= 1, where,
          "dimensions must be positive");
  require(tr > 0.0, where, "tr must be positive");
  require(channel_labels.size() == n_channels, where,
          "channel_labels size mismatch");
  require(freqs.size() == n_freqs, where, "freqs size mismatch");
  require(true_coeffs.size() == n_channels * n_freqs * n_lags, where,
          "true_coeffs size mismatch");
  require(std::any_of(true_coeffs.begin(), true_coeffs.end(),
                      [](double v) { return v != 0.0; }),
          where, "true_coeffs must have active support");
  require(snr > 0.0, where, "snr must be positive");
  require(noise_ar > -1.0 && noise_ar < 1.0, where,
          "noise_ar must lie in (-1, 1)");
  require(feature_noise >= 0.0, where, "feature_noise must be >= 0");
  require(session_confound >= 0.0, where, "session_confound must be >= 0");
  require(trial_duration_s >= 0.0, where, "trial_duration_s must be >= 0");
  paradigm.validate(where);
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

namespace {

void generate_session(const SyntheticSpec& spec, std::uint64_t session,
                      const std::vector<double>& boxcar,
                      SpectralFeatureTensor& tensor,
                      std::vector<double>& target) {
  const std::size_t t_out = spec.t_per_session;
  const std::size_t lags = spec.n_lags;
  const std::size_t window = t_out + lags;
  const std::size_t cells = spec.n_channels * spec.n_freqs;

  // Latent band-power series per (channel, freq) cell over the padded
  // window; active cells carry the trial boxcar.
  std::vector<std::vector<double>> latents(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::mt19937_64 gen =
        rng::engine(rng::derive(rng::derive(spec.seed, kLatentTag, session),
                                cell));
    auto fluctuation = ar1_noise(window, kLatentAr, gen);
    standardize(fluctuation, "synthgen::generate");

    const std::size_t c = cell / spec.n_freqs;
    const std::size_t f = cell % spec.n_freqs;
    bool active = false;
    for (std::size_t m = 0; m < lags && !active; ++m) {
      active = spec.coeff(c, f, m) != 0.0;
    }

    auto& u = latents[cell];
    if (active) {
      u.resize(window);
      for (std::size_t w = 0; w < window; ++w) {
        u[w] = boxcar[w] + kLatentMix * fluctuation[w];
      }
      standardize(u, "synthgen::generate");
    } else {
      u = std::move(fluctuation);
    }
  }

  // Noiseless target through the lagged coefficient tensor.
  std::vector<double> clean(t_out, 0.0);
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    for (std::size_t f = 0; f < spec.n_freqs; ++f) {
      const auto& u = latents[c * spec.n_freqs + f];
      for (std::size_t m = 0; m < lags; ++m) {
        const double w = spec.coeff(c, f, m);
        if (w == 0.0) continue;
        for (std::size_t t = 0; t < t_out; ++t) {
          clean[t] += w * u[t + lags - m];
        }
      }
    }
  }
  const double clean_var = linalg::variance(clean.data(), clean.size());
  require(clean_var > 0.0, "synthgen::generate",
          "noiseless target is constant; check support and paradigm");

  // AR(1) noise rescaled so var(clean) / var(noise) == snr exactly.
  std::mt19937_64 noise_gen =
      rng::engine(rng::derive(spec.seed, kNoiseTag, session));
  auto noise = ar1_noise(t_out, spec.noise_ar, noise_gen);
  standardize(noise, "synthgen::generate");
  const double noise_scale = std::sqrt(clean_var / spec.snr);

  target.resize(t_out);
  for (std::size_t t = 0; t < t_out; ++t) {
    target[t] = clean[t] + noise_scale * noise[t];
  }

  // Features: latents over the exposed window plus independent noise.
  tensor = SpectralFeatureTensor(t_out, spec.n_channels, spec.n_freqs);
  tensor.sample_rate = 1.0 / spec.tr;
  tensor.channel_labels = spec.channel_labels;
  tensor.freqs = spec.freqs;
  std::mt19937_64 feat_gen =
      rng::engine(rng::derive(spec.seed, kFeatureTag, session));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t c = 0; c < spec.n_channels; ++c) {
      for (std::size_t f = 0; f < spec.n_freqs; ++f) {
        const auto& u = latents[c * spec.n_freqs + f];
        double value = u[t + lags];
        if (spec.feature_noise > 0.0) {
          value += spec.feature_noise * normal(feat_gen);
        }
        tensor.at(t, c, f) = value;
      }
    }
  }

  // Session drift shared by features and target: the leakage lever. The
  // per-session loading pattern makes it exploitable only when training
  // and test rows come from the same session.
  if (spec.session_confound > 0.0) {
    std::mt19937_64 drift_gen =
        rng::engine(rng::derive(spec.seed, kDriftTag, session));
    const auto drift = slow_drift(t_out, drift_gen);
    std::vector<double> loading(cells);
    for (double& g : loading) g = kDriftLoadingSd * normal(drift_gen);

    const double amp = spec.session_confound;
    for (std::size_t t = 0; t < t_out; ++t) {
      for (std::size_t cell = 0; cell < cells; ++cell) {
        tensor.data[t * cells + cell] += amp * loading[cell] * drift[t];
      }
    }
    const double clean_sd = std::sqrt(clean_var);
    for (std::size_t t = 0; t < t_out; ++t) {
      target[t] += amp * clean_sd * drift[t];
    }
  }

  tensor.validate("synthgen::generate");
}

}  // namespace

SyntheticDataset generate(const SyntheticSpec& spec) {
  spec.validate("synthgen::generate");
  const auto boxcar = trial_boxcar(spec);

  SyntheticDataset out;
  out.spec = spec;
  generate_session(spec, 0, boxcar, out.session1, out.target1);
  generate_session(spec, 1, boxcar, out.session2, out.target2);
  return out;
}

// ---------------------------------------------------------------------------
// pinned scenarios
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kMontage16 = {
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T7",
    "C3",  "Cz",  "C4", "T8", "P7", "P3", "Pz", "P4"};

std::size_t label_index(const std::vector<std::string>& labels,
                        const std::string& name) {
  const auto it = std::find(labels.begin(), labels.end(), name);
  require(it != labels.end(), "synthgen::scenario", "label missing: " + name);
  return std::size_t(it - labels.begin());
}

std::size_t freq_index(const std::vector<double>& freqs, double f) {
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (freqs[i] == f) return i;
  }
  fail("synthgen::scenario", "frequency missing from grid");
}

// Evenly spaced trial onsets with alternating sides.
TrialParadigm block_paradigm(std::size_t first, std::size_t spacing,
                             std::size_t count, double tr) {
  TrialParadigm paradigm;
  for (std::size_t k = 0; k < count; ++k) {
    TrialParadigm::Onset onset;
    onset.time_s = double(first + k * spacing) * tr;
    onset.side = (k % 2 == 0) ? Side::left : Side::right;
    paradigm.onsets.push_back(onset);
  }
  return paradigm;
}

// Writes hrf-tap coefficients for one (channel, freq) cell.
void plant_cell(SyntheticSpec& spec, std::size_t c, std::size_t f, double w,
                const std::vector<double>& hrf) {
  for (std::size_t m = 0; m < spec.n_lags; ++m) {
    spec.coeff(c, f, m) = w * hrf[m];
  }
}

}  // namespace

SyntheticSpec scenario(const std::string& name) {
  SyntheticSpec spec;
  spec.tr = 1.26;

  if (name == "S1") {
    // Group-sparse recovery: three active channels, alpha and beta cells.
    spec.t_per_session = 400;
    spec.n_channels = 16;
    spec.n_freqs = 20;
    spec.n_lags = 5;
    spec.channel_labels = kMontage16;
    for (std::size_t i = 0; i < spec.n_freqs; ++i) {
      spec.freqs.push_back(4.0 + 2.0 * double(i));
    }
    spec.paradigm = block_paradigm(20, 40, 9, spec.tr);
    spec.trial_duration_s = 20.0 * spec.tr;
    spec.true_coeffs.assign(
        spec.n_channels * spec.n_freqs * spec.n_lags, 0.0);
    const auto hrf = double_gamma_hrf(spec.tr, 32.0);
    const struct {
      const char* channel;
      double weight;
    } groups[] = {{"C3", -1.0}, {"C4", -0.8}, {"P3", -1.2}};
    for (const auto& g : groups) {
      const std::size_t c = label_index(spec.channel_labels, g.channel);
      plant_cell(spec, c, freq_index(spec.freqs, 10.0), g.weight, hrf);
      plant_cell(spec, c, freq_index(spec.freqs, 20.0), 0.7 * g.weight, hrf);
    }
    spec.snr = 4.0;
    spec.noise_ar = 0.4;
    spec.feature_noise = 0.1;
    spec.session_confound = 0.0;
    spec.seed = 11;
    return spec;
  }

  if (name == "S2") {
    // Single planted cell for interpretability maps: (C3, 10 Hz, lag 5).
    spec.t_per_session = 300;
    spec.n_channels = 16;
    spec.n_freqs = 20;
    spec.n_lags = 7;
    spec.channel_labels = kMontage16;
    for (std::size_t i = 0; i < spec.n_freqs; ++i) {
      spec.freqs.push_back(4.0 + 2.0 * double(i));
    }
    spec.paradigm = block_paradigm(20, 40, 6, spec.tr);
    spec.trial_duration_s = 20.0 * spec.tr;
    spec.true_coeffs.assign(
        spec.n_channels * spec.n_freqs * spec.n_lags, 0.0);
    spec.coeff(label_index(spec.channel_labels, "C3"),
               freq_index(spec.freqs, 10.0), 5) = -1.0;
    spec.snr = 6.0;
    spec.noise_ar = 0.4;
    spec.feature_noise = 0.1;
    spec.session_confound = 0.0;
    spec.seed = 22;
    return spec;
  }

  if (name == "S3") {
    // Session-confound leakage demonstration.
    spec.t_per_session = 300;
    spec.n_channels = 8;
    spec.n_freqs = 6;
    spec.n_lags = 3;
    spec.channel_labels = {"F3", "Fz", "F4", "C3", "Cz", "C4", "P3", "Pz"};
    spec.freqs = {6.0, 10.0, 14.0, 18.0, 22.0, 26.0};
    spec.paradigm = block_paradigm(15, 30, 9, spec.tr);
    spec.trial_duration_s = 15.0 * spec.tr;
    spec.true_coeffs.assign(
        spec.n_channels * spec.n_freqs * spec.n_lags, 0.0);
    const auto hrf = double_gamma_hrf(spec.tr, 32.0);
    for (const char* channel : {"C3", "C4"}) {
      const std::size_t c = label_index(spec.channel_labels, channel);
      plant_cell(spec, c, freq_index(spec.freqs, 10.0), -1.0, hrf);
      plant_cell(spec, c, freq_index(spec.freqs, 22.0), -0.7, hrf);
    }
    spec.snr = 1.5;
    spec.noise_ar = 0.4;
    spec.feature_noise = 0.2;
    spec.session_confound = 0.5;
    spec.seed = 33;
    return spec;
  }

  fail("synthgen::scenario",
       "unknown scenario '" + name + "'; valid names: S1, S2, S3");
}

}  // namespace lagsynth::synthgen
