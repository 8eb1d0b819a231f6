#include "lagsynth/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include "lagsynth/fft.hpp"
#include "lagsynth/parallel.hpp"

namespace lagsynth::features {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// morlet_relative_power
// ---------------------------------------------------------------------------

SpectralFeatureTensor morlet_relative_power(const Matrix& signal, double fs,
                                            const std::vector<double>& freqs,
                                            double central_freq,
                                            double time_res_s) {
  const std::size_t n = signal.rows;
  const std::size_t n_ch = signal.cols;
  const std::size_t n_fr = freqs.size();
  require(n > 0 && n_ch > 0, "features::morlet_relative_power",
          "empty signal");
  require(n_fr > 0, "features::morlet_relative_power", "no frequencies");
  require(central_freq > 0.0 && time_res_s > 0.0,
          "features::morlet_relative_power", "invalid wavelet parameters");
  for (double f : freqs) {
    require(f > 0.0, "features::morlet_relative_power",
            "frequencies must be positive");
    require(fs > 2.0 * f, "features::morlet_relative_power",
            "sample rate too low for requested frequency");
  }
  for (double v : signal.data) {
    require(std::isfinite(v), "features::morlet_relative_power",
            "non-finite input sample");
  }

  SpectralFeatureTensor out(n, n_ch, n_fr);
  out.sample_rate = fs;
  out.freqs = freqs;
  out.channel_labels.resize(n_ch);
  for (std::size_t c = 0; c < n_ch; ++c) {
    out.channel_labels[c] = "ch" + std::to_string(c + 1);
  }

  const std::size_t n_bins = n / 2 + 1;
  const double bin_hz = fs / static_cast<double>(n);
  const double sig_scale = 2.0 * std::sqrt(2.0 * std::log(2.0));

  // Power per (t, f) for one channel at a time, then normalize across f.
  std::vector<double> column(n);
  std::vector<std::complex<double>> spec_full(n);
  Matrix power(n, n_fr);
  for (std::size_t c = 0; c < n_ch; ++c) {
    for (std::size_t t = 0; t < n; ++t) column[t] = signal(t, c);
    const auto spec = fft::rfft(column);

    for (std::size_t fi = 0; fi < n_fr; ++fi) {
      const double f = freqs[fi];
      const double sigma_t = (time_res_s * central_freq / f) / sig_scale;
      const double sigma_f = 1.0 / (2.0 * kPi * sigma_t);

      // One-sided Gaussian on the analytic spectrum; negative-frequency
      // bins stay zero.
      std::fill(spec_full.begin(), spec_full.end(),
                std::complex<double>(0.0, 0.0));
      for (std::size_t k = 0; k < n_bins; ++k) {
        double fk = static_cast<double>(k) * bin_hz;
        double d = (fk - f) / sigma_f;
        spec_full[k] = spec[k] * std::exp(-0.5 * d * d);
      }
      const auto w = fft::ifft(spec_full);
      for (std::size_t t = 0; t < n; ++t) power(t, fi) = std::norm(w[t]);
    }

    for (std::size_t t = 0; t < n; ++t) {
      double total = 0.0;
      for (std::size_t fi = 0; fi < n_fr; ++fi) total += power(t, fi);
      if (total <= 0.0) {
        double uniform = 1.0 / static_cast<double>(n_fr);
        for (std::size_t fi = 0; fi < n_fr; ++fi) out.at(t, c, fi) = uniform;
      } else {
        for (std::size_t fi = 0; fi < n_fr; ++fi) {
          out.at(t, c, fi) = power(t, fi) / total;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// remove_trial_average
// ---------------------------------------------------------------------------

SpectralFeatureTensor remove_trial_average(const SpectralFeatureTensor& tensor,
                                           const TrialParadigm& paradigm) {
  tensor.validate("features::remove_trial_average");
  paradigm.validate("features::remove_trial_average");

  const double fs = tensor.sample_rate;
  const long len = std::lround((paradigm.window_pre_s + paradigm.window_post_s) * fs);
  require(len >= 1, "features::remove_trial_average",
          "trial window shorter than one sample");

  struct Window {
    std::size_t start;
    std::size_t run;
    Side side;
  };
  std::vector<Window> windows;
  windows.reserve(paradigm.onsets.size());
  for (const auto& onset : paradigm.onsets) {
    long start = std::lround((onset.time_s - paradigm.window_pre_s) * fs);
    require(start >= 0, "features::remove_trial_average",
            "trial window extends before the recording");
    std::size_t s = static_cast<std::size_t>(start);
    require(s + static_cast<std::size_t>(len) <= tensor.t_samples,
            "features::remove_trial_average",
            "trial window extends past the recording");
    std::size_t run = tensor.run_of(s);
    auto [rb, re] = tensor.run_extent(run);
    (void)rb;
    require(s + static_cast<std::size_t>(len) <= re,
            "features::remove_trial_average",
            "trial window crosses a run boundary");
    windows.push_back({s, run, onset.side});
  }
  for (std::size_t i = 1; i < windows.size(); ++i) {
    require(windows[i].start >=
                windows[i - 1].start + static_cast<std::size_t>(len),
            "features::remove_trial_average", "trial windows overlap");
  }

  const std::size_t cf = tensor.n_channels * tensor.n_freqs;
  const std::size_t wlen = static_cast<std::size_t>(len);

  // Stereotypes per (run, side) from the unmodified input.
  std::map<std::pair<std::size_t, int>, std::vector<const Window*>> groups;
  for (const auto& w : windows) {
    groups[{w.run, static_cast<int>(w.side)}].push_back(&w);
  }

  SpectralFeatureTensor out = tensor;
  std::vector<double> stereotype(wlen * cf);
  for (const auto& [key, members] : groups) {
    (void)key;
    std::fill(stereotype.begin(), stereotype.end(), 0.0);
    for (const Window* w : members) {
      const double* src = tensor.data.data() + w->start * cf;
      for (std::size_t i = 0; i < wlen * cf; ++i) stereotype[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (double& v : stereotype) v *= inv;
    for (const Window* w : members) {
      double* dst = out.data.data() + w->start * cf;
      for (std::size_t i = 0; i < wlen * cf; ++i) dst[i] -= stereotype[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// resample_to_tr
// ---------------------------------------------------------------------------

namespace {

// One series at ratio q input samples per output sample. Windowed-sinc
// evaluated at fractional positions with edge-hold padding and per-position
// normalization (exact DC gain).
std::vector<double> resample_series(const double* x, std::size_t n, double q) {
  const double cutoff = 0.45 / q;  // cycles per input sample
  const long half = static_cast<long>(std::ceil(6.0 * q));
  const std::size_t out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) / q));
  const long nl = static_cast<long>(n);

  std::vector<double> out(out_len);
  for (std::size_t k = 0; k < out_len; ++k) {
    const double p = static_cast<double>(k) * q;
    const long lo = static_cast<long>(std::ceil(p)) - half;
    const long hi = static_cast<long>(std::floor(p)) + half;
    double acc = 0.0, wsum = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double u = p - static_cast<double>(i);
      double s = (u == 0.0) ? 2.0 * cutoff
                            : std::sin(2.0 * kPi * cutoff * u) / (kPi * u);
      double w = 0.54 + 0.46 * std::cos(kPi * u / static_cast<double>(half));
      double h = s * w;
      long idx = i < 0 ? 0 : (i >= nl ? nl - 1 : i);
      acc += h * x[static_cast<std::size_t>(idx)];
      wsum += h;
    }
    out[k] = acc / wsum;
  }
  return out;
}

}  // namespace

SpectralFeatureTensor resample_to_tr(const SpectralFeatureTensor& tensor,
                                     double tr) {
  tensor.validate("features::resample_to_tr");
  require(tr > 1.0 / tensor.sample_rate, "features::resample_to_tr",
          "tr must exceed the input sample interval");
  const double q = tensor.sample_rate * tr;
  const std::size_t cf = tensor.n_channels * tensor.n_freqs;

  // Per-run output lengths and boundaries.
  std::vector<std::size_t> out_lens(tensor.n_runs());
  std::size_t total = 0;
  for (std::size_t r = 0; r < tensor.n_runs(); ++r) {
    auto [b, e] = tensor.run_extent(r);
    out_lens[r] =
        static_cast<std::size_t>(std::floor(static_cast<double>(e - b) / q));
    require(out_lens[r] >= 1, "features::resample_to_tr",
            "run too short for the requested tr");
    total += out_lens[r];
  }

  SpectralFeatureTensor out(total, tensor.n_channels, tensor.n_freqs);
  out.sample_rate = 1.0 / tr;
  out.channel_labels = tensor.channel_labels;
  out.freqs = tensor.freqs;
  out.run_boundaries.clear();
  std::size_t offset = 0;
  for (std::size_t r = 0; r < tensor.n_runs(); ++r) {
    out.run_boundaries.push_back(offset);
    offset += out_lens[r];
  }

  parallel_for(cf, [&](std::size_t idx) {
    const std::size_t c = idx / tensor.n_freqs;
    const std::size_t f = idx % tensor.n_freqs;
    std::size_t out_base = 0;
    for (std::size_t r = 0; r < tensor.n_runs(); ++r) {
      auto [b, e] = tensor.run_extent(r);
      std::vector<double> series(e - b);
      for (std::size_t t = b; t < e; ++t) series[t - b] = tensor.at(t, c, f);
      auto res = resample_series(series.data(), series.size(), q);
      for (std::size_t k = 0; k < res.size(); ++k) {
        out.at(out_base + k, c, f) = res[k];
      }
      out_base += out_lens[r];
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// standardize_runs
// ---------------------------------------------------------------------------

SpectralFeatureTensor standardize_runs(const SpectralFeatureTensor& tensor) {
  tensor.validate("features::standardize_runs");
  for (std::size_t r = 0; r < tensor.n_runs(); ++r) {
    auto [b, e] = tensor.run_extent(r);
    require(e - b >= 2, "features::standardize_runs",
            "runs need at least 2 samples");
  }

  SpectralFeatureTensor out = tensor;
  for (std::size_t r = 0; r < tensor.n_runs(); ++r) {
    auto [b, e] = tensor.run_extent(r);
    const double inv_n = 1.0 / static_cast<double>(e - b);
    for (std::size_t c = 0; c < tensor.n_channels; ++c) {
      for (std::size_t f = 0; f < tensor.n_freqs; ++f) {
        double mean = 0.0;
        for (std::size_t t = b; t < e; ++t) mean += tensor.at(t, c, f);
        mean *= inv_n;
        double var = 0.0;
        for (std::size_t t = b; t < e; ++t) {
          double d = tensor.at(t, c, f) - mean;
          var += d * d;
        }
        var *= inv_n;
        // Constant series standardize to zero instead of amplifying
        // round-off noise.
        if (var <= 1e-24 * std::max(1.0, mean * mean)) {
          for (std::size_t t = b; t < e; ++t) out.at(t, c, f) = 0.0;
        } else {
          const double inv_sd = 1.0 / std::sqrt(var);
          for (std::size_t t = b; t < e; ++t) {
            out.at(t, c, f) = (tensor.at(t, c, f) - mean) * inv_sd;
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// build_lagged_design / align_target / slice_time
// ---------------------------------------------------------------------------

LaggedDesign build_lagged_design(const SpectralFeatureTensor& tensor,
                                 std::size_t lags) {
  tensor.validate("features::build_lagged_design");
  require(lags >= 1, "features::build_lagged_design", "need at least 1 lag");
  require(tensor.t_samples > lags, "features::build_lagged_design",
          "lag count must be smaller than the sample count");

  const std::size_t c_n = tensor.n_channels;
  const std::size_t f_n = tensor.n_freqs;
  const std::size_t rows = tensor.t_samples - lags + 1;
  const std::size_t cols = c_n * f_n * lags;

  LaggedDesign d;
  d.matrix = Matrix(rows, cols);
  d.lags = lags;
  d.n_groups = c_n;
  d.group_index.resize(cols);
  d.column_meta.resize(cols);

  for (std::size_t c = 0; c < c_n; ++c) {
    for (std::size_t f = 0; f < f_n; ++f) {
      for (std::size_t n = 0; n < lags; ++n) {
        const std::size_t col = (c * f_n + f) * lags + n;
        d.group_index[col] = c;
        d.column_meta[col] = {c, f, n};
        for (std::size_t row = 0; row < rows; ++row) {
          // absolute time of the row is row + lags - 1
          d.matrix(row, col) = tensor.at(row + lags - 1 - n, c, f);
        }
      }
    }
  }
  return d;
}

std::vector<double> align_target(const std::vector<double>& y,
                                 std::size_t lags) {
  require(lags >= 1, "features::align_target", "need at least 1 lag");
  require(y.size() >= lags, "features::align_target",
          "target shorter than lag count");
  return std::vector<double>(y.begin() + static_cast<long>(lags) - 1, y.end());
}

SpectralFeatureTensor slice_time(const SpectralFeatureTensor& tensor,
                                 std::size_t begin, std::size_t end) {
  require(begin < end && end <= tensor.t_samples, "features::slice_time",
          "invalid sample range");
  SpectralFeatureTensor out(end - begin, tensor.n_channels, tensor.n_freqs);
  out.sample_rate = tensor.sample_rate;
  out.channel_labels = tensor.channel_labels;
  out.freqs = tensor.freqs;
  const std::size_t cf = tensor.n_channels * tensor.n_freqs;
  std::copy(tensor.data.begin() + static_cast<long>(begin * cf),
            tensor.data.begin() + static_cast<long>(end * cf),
            out.data.begin());
  out.run_boundaries.clear();
  out.run_boundaries.push_back(0);
  for (std::size_t b : tensor.run_boundaries) {
    if (b > begin && b < end) out.run_boundaries.push_back(b - begin);
  }
  return out;
}

}  // namespace lagsynth::features
