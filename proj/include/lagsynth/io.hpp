#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lagsynth/types.hpp"

// File formats and configuration. All writers are atomic (temp file plus
// rename) and deterministic: rewriting unchanged data produces identical
// bytes.

namespace lagsynth::io {

// -----------------------------------------------------------------------
// primitives
// -----------------------------------------------------------------------

// FNV-1a 64-bit hash, used as the config provenance fingerprint.
std::uint64_t fnv1a64(const std::string& bytes);

std::string read_file(const std::string& path);
void atomic_write(const std::string& path, const std::string& bytes);

// -----------------------------------------------------------------------
// numeric array container format
// -----------------------------------------------------------------------
// Layout: magic "LGST", version byte (1), dimension-count byte, then each
// dimension as little-endian uint64, then the row-major values as
// little-endian IEEE-754 doubles.

void write_array(const std::string& path,
                 const std::vector<std::size_t>& dims,
                 const std::vector<double>& data);
std::pair<std::vector<std::size_t>, std::vector<double>> read_array(
    const std::string& path);

// Feature tensor = 3-d array file plus a JSON sidecar at path + ".json"
// carrying sample_rate, channel_labels, freqs, and run_boundaries.
void write_tensor(const std::string& path, const SpectralFeatureTensor& t);
SpectralFeatureTensor read_tensor(const std::string& path);

// -----------------------------------------------------------------------
// CSV
// -----------------------------------------------------------------------

// One value per line, %.17g (value round-trips exactly).
void write_series_csv(const std::string& path,
                      const std::vector<double>& values);
std::vector<double> read_series_csv(const std::string& path);

// Header "time_s,side", one onset per line, side spelled left|right.
void write_onsets_csv(const std::string& path, const TrialParadigm& paradigm);
TrialParadigm read_onsets_csv(const std::string& path);

// -----------------------------------------------------------------------
// flat key = value configuration
// -----------------------------------------------------------------------
// Lines hold `key = value` pairs with dotted key names; '#' starts a
// comment; blank lines are ignored; duplicate keys are rejected. Lookups
// mark keys as consumed so require_all_consumed can reject unknown keys.

class Config {
 public:
  static Config parse_text(const std::string& text, const std::string& where);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string need_string(const std::string& key) const;  // throws if absent
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Throws listing every key never touched by a lookup.
  void require_all_consumed(const std::string& where) const;

  // Fingerprint of the raw config bytes as parsed.
  std::uint64_t hash() const { return fnv1a64(text_); }
  const std::string& text() const { return text_; }
  // Directory of the file this config was parsed from ("" for text).
  const std::string& base_dir() const { return base_dir_; }
  // Resolves a path value relative to the config file's directory.
  std::string resolve_path(const std::string& value) const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string text_;
  std::string base_dir_;
};

}  // namespace lagsynth::io
