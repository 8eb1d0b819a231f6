#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "lagsynth/cv.hpp"

// Command implementations behind the lagsynth binary. Each cmd_* function
// performs one subcommand end to end (validate, compute, write files) and
// throws on failure; run_guarded maps exceptions to the process exit codes
// (0 = ok, 1 = computation failure, 2 = usage or configuration error).

namespace lagsynth::cli {

inline constexpr const char* kToolName = "lagsynth";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

// Bad invocation, unreadable input, or invalid configuration; mapped to
// exit code 2. Everything else that throws is a computation failure (1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Command-line flags layered on top of the config file.
struct Overrides {
  std::string out_dir;  // --out; falls back to the run.out config key
  bool has_seed = false;
  std::uint64_t seed = 0;  // --seed
  std::string scheme;      // --scheme inter|intra; empty keeps the config
  bool has_surrogates = false;
  std::size_t surrogates = 0;  // --surrogates
  bool force = false;          // --force (overwrite synth outputs)
};

// Fully validated settings: config file contents plus overrides. Data
// paths are resolved relative to the config file's directory.
struct RunConfig {
  std::string session1_path, target1_path;
  std::string session2_path, target2_path;

  cv::Scheme scheme = cv::Scheme::inter_session;
  std::uint64_t seed = 0;
  std::string out_dir;

  cv::NestedFitOptions nested;  // lags, folds, solver and search options

  std::size_t n_surrogates = 100;
  double adf_threshold = 0.05;
  std::size_t adf_max_lag = 12;

  std::string baseline_scenario = "S1";
  std::size_t baseline_replicas = 15;
  double baseline_q = 0.05;

  std::uint64_t config_hash = 0;  // FNV-1a of the raw config bytes
  std::string config_text;
};

// Parses, applies overrides, validates ranges, and rejects unknown keys.
RunConfig load_run_config(const std::string& path, const Overrides& ov);

// synth <scenario>: writes the generated session tensors, target and onset
// CSVs, the ground-truth coefficient array, a dataset manifest, and a
// ready-to-run fit config. Refuses to overwrite existing files without
// --force.
void cmd_synth(const std::string& scenario_name, const Overrides& ov);

// fit: runs the split / nested-fit / evaluate pipeline on the configured
// session pair and writes report.json plus rendered summary and plots.
void cmd_fit(const std::string& config_path, const Overrides& ov);

// nulltest: surrogate null distribution of the pipeline statistic; writes
// null.json plus rendered summary and violin plot.
void cmd_nulltest(const std::string& config_path, const Overrides& ov);

// baseline: replicate synthetic cohort comparing the learned model with
// the SMR and MUC references on identical splits; writes baseline.json
// plus rendered summary and plot.
void cmd_baseline(const std::string& config_path, const Overrides& ov);

// report: re-renders the text summary and plots from a stored *.json
// report (any kind) into --out, defaulting to the report's directory.
void cmd_report(const std::string& report_path, const Overrides& ov);

// verify: recomputes the config hash embedded in a stored report and
// fails on mismatch; when config_path is nonempty the hash of that file
// must match too.
void cmd_verify(const std::string& report_path,
                const std::string& config_path);

// Runs fn, printing any error to stderr; returns the exit code.
int run_guarded(const std::function<void()>& fn);

}  // namespace lagsynth::cli
