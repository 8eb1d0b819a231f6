#include "lagsynth/types.hpp"

#include <algorithm>
#include <cmath>

namespace lagsynth {

std::size_t SpectralFeatureTensor::run_of(std::size_t t) const {
  auto it = std::upper_bound(run_boundaries.begin(), run_boundaries.end(), t);
  return static_cast<std::size_t>(it - run_boundaries.begin()) - 1;
}

void SpectralFeatureTensor::validate(const std::string& where) const {
  require(t_samples > 0 && n_channels > 0 && n_freqs > 0, where,
          "tensor dimensions must be positive");
  require(data.size() == t_samples * n_channels * n_freqs, where,
          "tensor storage size mismatch");
  require(sample_rate > 0.0, where, "sample_rate must be positive");
  require(!run_boundaries.empty() && run_boundaries.front() == 0, where,
          "run_boundaries must start at 0");
  for (std::size_t i = 1; i < run_boundaries.size(); ++i) {
    require(run_boundaries[i] > run_boundaries[i - 1], where,
            "run_boundaries must be strictly increasing");
  }
  require(run_boundaries.back() < t_samples, where,
          "run boundary beyond tensor length");
  if (!channel_labels.empty()) {
    require(channel_labels.size() == n_channels, where,
            "channel_labels count mismatch");
  }
  if (!freqs.empty()) {
    require(freqs.size() == n_freqs, where, "freqs count mismatch");
  }
  for (double v : data) {
    require(std::isfinite(v), where, "tensor contains non-finite values");
  }
}

void TrialParadigm::validate(const std::string& where) const {
  require(window_pre_s >= 0.0 && window_post_s >= 0.0, where,
          "trial window extents must be non-negative");
  require(window_pre_s + window_post_s > 0.0, where,
          "trial window must have positive length");
  for (std::size_t i = 1; i < onsets.size(); ++i) {
    require(onsets[i].time_s > onsets[i - 1].time_s, where,
            "onsets must be strictly increasing");
  }
}

}  // namespace lagsynth
