#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lagsynth/common.hpp"

// Core domain types shared across the pipeline: the time x channel x
// frequency feature tensor, the trial paradigm, and the lag-stacked
// regression design.

namespace lagsynth {

// Relative spectral power series: data[(t * C + c) * F + f]. Before
// standardization every (t, c) slice sums to 1 across frequencies.
struct SpectralFeatureTensor {
  std::size_t t_samples = 0;
  std::size_t n_channels = 0;
  std::size_t n_freqs = 0;
  std::vector<double> data;
  double sample_rate = 0.0;
  std::vector<std::string> channel_labels;
  std::vector<double> freqs;
  // Sample index of the first sample of each run; first element is 0,
  // strictly increasing.
  std::vector<std::size_t> run_boundaries;

  SpectralFeatureTensor() = default;
  SpectralFeatureTensor(std::size_t t, std::size_t c, std::size_t f)
      : t_samples(t),
        n_channels(c),
        n_freqs(f),
        data(t * c * f, 0.0),
        run_boundaries{0} {}

  double& at(std::size_t t, std::size_t c, std::size_t f) {
    return data[(t * n_channels + c) * n_freqs + f];
  }
  double at(std::size_t t, std::size_t c, std::size_t f) const {
    return data[(t * n_channels + c) * n_freqs + f];
  }

  std::size_t n_runs() const { return run_boundaries.size(); }
  // Half-open sample range [begin, end) of run r.
  std::pair<std::size_t, std::size_t> run_extent(std::size_t r) const {
    std::size_t begin = run_boundaries[r];
    std::size_t end =
        r + 1 < run_boundaries.size() ? run_boundaries[r + 1] : t_samples;
    return {begin, end};
  }
  // Index of the run containing sample t.
  std::size_t run_of(std::size_t t) const;

  void validate(const std::string& where) const;
};

enum class Side { left, right };

// Motor-task trial timing: onset seconds plus cue side, and the analysis
// window around each onset.
struct TrialParadigm {
  struct Onset {
    double time_s = 0.0;
    Side side = Side::left;
  };
  std::vector<Onset> onsets;
  double window_pre_s = 5.0;
  double window_post_s = 5.0;

  void validate(const std::string& where) const;
};

// Lag-stacked design: column (c, f, n) holds the feature series of channel c
// and frequency f delayed by n samples. Rows that would need samples before
// the start of the tensor are dropped.
struct LaggedDesign {
  struct ColumnMeta {
    std::size_t channel = 0;
    std::size_t freq = 0;
    std::size_t lag = 0;
  };

  Matrix matrix;
  std::size_t lags = 0;
  std::size_t n_groups = 0;  // one group per channel
  std::vector<std::size_t> group_index;  // per column, in [0, n_groups)
  std::vector<ColumnMeta> column_meta;

  std::size_t group_size() const {
    return n_groups > 0 ? matrix.cols / n_groups : 0;
  }
};

}  // namespace lagsynth
