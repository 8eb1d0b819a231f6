#include "lagsynth/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lagsynth/common.hpp"
#include "lagsynth/features.hpp"
#include "lagsynth/io.hpp"
#include "lagsynth/rng.hpp"
#include "lagsynth/sgl.hpp"
#include "lagsynth/stats.hpp"
#include "lagsynth/surrogates.hpp"
#include "lagsynth/svg.hpp"
#include "lagsynth/synthgen.hpp"

namespace lagsynth::cli {

namespace {

using nlohmann::json;

// Sub-stream label for per-replica cohort seeds.
constexpr std::uint64_t kCohortTag = 0x62617365ULL;
// Must match the per-parcellation derivation inside the pipeline.
constexpr std::uint64_t kParcelTag = 0x70697065ULL;

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016" PRIx64, h);
  return buf;
}

std::string scheme_name(cv::Scheme scheme) {
  return scheme == cv::Scheme::inter_session ? "inter" : "intra";
}

cv::Scheme parse_scheme(const std::string& name) {
  if (name == "inter") return cv::Scheme::inter_session;
  if (name == "intra") return cv::Scheme::intra_session;
  throw UsageError("config: scheme must be inter or intra, got " + name);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Output directory from --out or run.out; created on demand.
std::string ensure_out_dir(const Overrides& ov, const std::string& cfg_out) {
  const std::string out = !ov.out_dir.empty() ? ov.out_dir : cfg_out;
  if (out.empty()) {
    throw UsageError("no output directory: pass --out or set run.out");
  }
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    throw UsageError("cannot create output directory " + out + ": " +
                     ec.message());
  }
  return out;
}

// Runs the validation/loading phase of a command: any failure there is a
// usage error (exit 2), not a computation failure.
template <typename Fn>
auto usage_phase(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& err) {
    throw UsageError(err.what());
  }
}

json adf_json(const surrogates::AdfResult& adf) {
  return json{{"statistic", adf.statistic},
              {"p_value", adf.p_value},
              {"lags_used", adf.lags_used},
              {"rejected", adf.rejected},
              {"threshold", adf.threshold}};
}

json provenance_json(const RunConfig& rc) {
  return json{{"tool", kToolName},
              {"version", kToolVersion},
              {"schema", kReportSchema},
              {"config_hash", hash_hex(rc.config_hash)},
              {"config_text", rc.config_text},
              {"seed", rc.seed}};
}

std::string provenance_text(const json& j) {
  const json& p = j.at("provenance");
  std::string out;
  out += "tool: " + p.at("tool").get<std::string>() + " " +
         p.at("version").get<std::string>() + " (report schema " +
         std::to_string(p.at("schema").get<int>()) + ")\n";
  out += "config hash: " + p.at("config_hash").get<std::string>() + "\n";
  out += "seed: " + std::to_string(p.at("seed").get<std::uint64_t>()) + "\n";
  return out;
}

// Loaded session pair plus the pipeline options shared by fit and nulltest.
struct LoadedRun {
  RunConfig rc;
  cv::SessionData s1, s2;
  cv::PipelineOptions popts;
};

LoadedRun load_sessions(const std::string& config_path, const Overrides& ov) {
  return usage_phase([&] {
    LoadedRun run;
    run.rc = load_run_config(config_path, ov);
    const RunConfig& rc = run.rc;
    require(!rc.session1_path.empty() && !rc.target1_path.empty() &&
                !rc.session2_path.empty() && !rc.target2_path.empty(),
            "config",
            "data.session1/2 and data.target1/2 are required");
    run.s1.tensor = io::read_tensor(rc.session1_path);
    run.s1.target = io::read_series_csv(rc.target1_path);
    run.s2.tensor = io::read_tensor(rc.session2_path);
    run.s2.target = io::read_series_csv(rc.target2_path);
    require(run.s1.target.size() == run.s1.tensor.t_samples &&
                run.s2.target.size() == run.s2.tensor.t_samples,
            "config", "target length must match the session tensor");
    run.popts.scheme = rc.scheme;
    run.popts.nested = rc.nested;
    return run;
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

RunConfig load_run_config(const std::string& path, const Overrides& ov) {
  return usage_phase([&] {
    const io::Config cfg = io::Config::parse_file(path);
    RunConfig rc;
    rc.config_text = cfg.text();
    rc.config_hash = cfg.hash();

    auto path_of = [&](const char* key) {
      const std::string v = cfg.get_string(key, "");
      return v.empty() ? v : cfg.resolve_path(v);
    };
    rc.session1_path = path_of("data.session1");
    rc.target1_path = path_of("data.target1");
    rc.session2_path = path_of("data.session2");
    rc.target2_path = path_of("data.target2");

    // Config keys are read even when a flag overrides them so that the
    // unknown-key check below never trips on a legitimately present key.
    const std::string cfg_scheme = cfg.get_string("run.scheme", "inter");
    rc.scheme = parse_scheme(ov.scheme.empty() ? cfg_scheme : ov.scheme);
    const std::uint64_t cfg_seed = cfg.get_u64("run.seed", 0);
    rc.seed = ov.has_seed ? ov.seed : cfg_seed;
    const std::string cfg_out = cfg.get_string("run.out", "");
    rc.out_dir = cfg_out.empty() ? cfg_out : cfg.resolve_path(cfg_out);

    rc.nested.lags = cfg.get_size("fit.lags", 5);
    rc.nested.k_folds = cfg.get_size("fit.k_folds", 3);
    rc.nested.lambda_floor_ratio =
        cfg.get_double("fit.lambda_floor_ratio", 1e-4);
    rc.nested.fit.max_iter = cfg.get_size("fit.max_iter", 5000);
    rc.nested.fit.kkt_tol = cfg.get_double("fit.kkt_tol", 1e-6);
    if (cfg.has("fit.fixed_lambda")) {
      rc.nested.use_fixed = true;
      rc.nested.fixed.lambda = cfg.get_double("fit.fixed_lambda", 0.0);
      rc.nested.fixed.alpha = cfg.get_double("fit.fixed_alpha", 0.5);
      require(rc.nested.fixed.lambda >= 0.0, "config",
              "fit.fixed_lambda must be >= 0");
      require(rc.nested.fixed.alpha >= 0.0 && rc.nested.fixed.alpha <= 1.0,
              "config", "fit.fixed_alpha must lie in [0, 1]");
    } else {
      require(!cfg.has("fit.fixed_alpha"), "config",
              "fit.fixed_alpha requires fit.fixed_lambda");
    }

    rc.nested.bo.budget = cfg.get_size("bo.budget", 40);
    rc.nested.bo.initial_design = cfg.get_size("bo.initial_design", 8);
    rc.nested.bo.candidate_pool = cfg.get_size("bo.candidate_pool", 2000);
    rc.nested.bo.kappa = cfg.get_double("bo.kappa", 0.1);
    rc.nested.bo.seed = rc.seed;

    const std::size_t cfg_surrogates = cfg.get_size("null.surrogates", 100);
    rc.n_surrogates = ov.has_surrogates ? ov.surrogates : cfg_surrogates;
    rc.adf_threshold = cfg.get_double("null.adf_threshold", 0.05);
    rc.adf_max_lag = cfg.get_size("null.adf_max_lag", 12);

    rc.baseline_scenario = cfg.get_string("baseline.scenario", "S1");
    rc.baseline_replicas = cfg.get_size("baseline.replicas", 15);
    rc.baseline_q = cfg.get_double("baseline.q", 0.05);

    cfg.require_all_consumed("config " + path);

    require(rc.nested.lags >= 1, "config", "fit.lags must be >= 1");
    require(rc.nested.k_folds >= 2, "config", "fit.k_folds must be >= 2");
    require(rc.nested.lambda_floor_ratio > 0.0 &&
                rc.nested.lambda_floor_ratio < 1.0,
            "config", "fit.lambda_floor_ratio must lie in (0, 1)");
    require(rc.nested.fit.max_iter >= 1, "config",
            "fit.max_iter must be >= 1");
    require(rc.nested.fit.kkt_tol > 0.0, "config",
            "fit.kkt_tol must be positive");
    require(rc.nested.bo.kappa >= 0.0, "config", "bo.kappa must be >= 0");
    require(rc.adf_threshold > 0.0 && rc.adf_threshold < 1.0, "config",
            "null.adf_threshold must lie in (0, 1)");
    require(rc.baseline_q > 0.0 && rc.baseline_q < 1.0, "config",
            "baseline.q must lie in (0, 1)");
    return rc;
  });
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

void cmd_synth(const std::string& scenario_name, const Overrides& ov) {
  synthgen::SyntheticSpec spec = usage_phase([&] {
    auto s = synthgen::scenario(scenario_name);
    if (ov.has_seed) s.seed = ov.seed;
    return s;
  });
  const std::string out = ensure_out_dir(ov, "");

  const char* names[] = {"session1.lgst", "session1.lgst.json",
                         "session2.lgst", "session2.lgst.json",
                         "target1.csv",   "target2.csv",
                         "onsets.csv",    "truth.lgst",
                         "dataset.cfg",   "run.cfg"};
  if (!ov.force) {
    for (const char* name : names) {
      if (std::filesystem::exists(join_path(out, name))) {
        throw UsageError(join_path(out, name) +
                         " already exists; pass --force to overwrite");
      }
    }
  }

  const synthgen::SyntheticDataset data = synthgen::generate(spec);

  io::write_tensor(join_path(out, "session1.lgst"), data.session1);
  io::write_tensor(join_path(out, "session2.lgst"), data.session2);
  io::write_series_csv(join_path(out, "target1.csv"), data.target1);
  io::write_series_csv(join_path(out, "target2.csv"), data.target2);
  io::write_onsets_csv(join_path(out, "onsets.csv"), spec.paradigm);
  io::write_array(join_path(out, "truth.lgst"),
                  {spec.n_channels, spec.n_freqs, spec.n_lags},
                  spec.true_coeffs);

  std::string manifest = "# synthetic dataset manifest\n";
  manifest += "channels = " + std::to_string(spec.n_channels) + "\n";
  manifest += "feature_noise = " + fmt17(spec.feature_noise) + "\n";
  manifest += "freqs = " + std::to_string(spec.n_freqs) + "\n";
  manifest += "lags = " + std::to_string(spec.n_lags) + "\n";
  manifest += "noise_ar = " + fmt17(spec.noise_ar) + "\n";
  manifest +=
      "samples_per_session = " + std::to_string(spec.t_per_session) + "\n";
  manifest += "scenario = " + scenario_name + "\n";
  manifest += "seed = " + std::to_string(spec.seed) + "\n";
  manifest += "session_confound = " + fmt17(spec.session_confound) + "\n";
  manifest += "snr = " + fmt17(spec.snr) + "\n";
  manifest += "tr = " + fmt17(spec.tr) + "\n";
  manifest += "trial_duration_s = " + fmt17(spec.trial_duration_s) + "\n";
  io::atomic_write(join_path(out, "dataset.cfg"), manifest);

  std::string run_cfg = "# generated by lagsynth synth " + scenario_name +
                        "; input to fit/nulltest\n";
  run_cfg += "data.session1 = session1.lgst\n";
  run_cfg += "data.session2 = session2.lgst\n";
  run_cfg += "data.target1 = target1.csv\n";
  run_cfg += "data.target2 = target2.csv\n";
  run_cfg += "run.scheme = inter\n";
  run_cfg += "run.seed = " + std::to_string(spec.seed) + "\n";
  run_cfg += "fit.lags = " + std::to_string(spec.n_lags) + "\n";
  run_cfg += "fit.k_folds = 3\n";
  run_cfg += "bo.budget = 40\n";
  run_cfg += "bo.initial_design = 8\n";
  run_cfg += "bo.candidate_pool = 2000\n";
  run_cfg += "null.surrogates = 100\n";
  io::atomic_write(join_path(out, "run.cfg"), run_cfg);

  std::cout << "synth " << scenario_name << " (seed " << spec.seed
            << "): wrote " << (sizeof(names) / sizeof(names[0]))
            << " files to " << out << "\n";
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

namespace {

json fit_report_json(const LoadedRun& run, const cv::PipelineResult& result) {
  const RunConfig& rc = run.rc;
  json j;
  j["kind"] = "fit";
  j["provenance"] = provenance_json(rc);
  std::vector<std::uint64_t> parcel_seeds;
  for (std::size_t p = 0; p < result.parcellations.size(); ++p) {
    parcel_seeds.push_back(rng::derive(rc.seed, kParcelTag, p));
  }
  j["provenance"]["parcellation_seeds"] = parcel_seeds;

  j["scheme"] = scheme_name(rc.scheme);
  j["lags"] = rc.nested.lags;
  j["k_folds"] = rc.nested.k_folds;
  j["bo"] = json{{"budget", rc.nested.bo.budget},
                 {"initial_design", rc.nested.bo.initial_design},
                 {"candidate_pool", rc.nested.bo.candidate_pool},
                 {"kappa", rc.nested.bo.kappa}};

  j["channels"] = run.s1.tensor.channel_labels;
  j["freqs"] = run.s1.tensor.freqs;

  const std::size_t n_ch = run.s1.tensor.n_channels;
  const std::size_t n_fq = run.s1.tensor.n_freqs;
  const std::size_t lags = rc.nested.lags;
  std::vector<double> mass(n_ch * n_fq, 0.0);

  json parcels = json::array();
  for (std::size_t p = 0; p < result.parcellations.size(); ++p) {
    const cv::ParcellationOutcome& out = result.parcellations[p];
    const cv::AssembledDesign test = cv::assemble_blocks(
        cv::gather_blocks(run.s1, run.s2,
                          result.plan.parcellations[p].test),
        lags);
    const std::vector<double> pred = sgl::predict(out.model, test.design);

    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < n_ch; ++c) {
      for (std::size_t f = 0; f < n_fq; ++f) {
        double ss = 0.0;
        for (std::size_t m = 0; m < lags; ++m) {
          const double b = out.model.coeffs[(c * n_fq + f) * lags + m];
          ss += b * b;
          if (b != 0.0) ++nonzero;
        }
        mass[c * n_fq + f] +=
            std::sqrt(ss) / double(result.parcellations.size());
      }
    }

    std::size_t n_failed = 0;
    for (const auto& ev : out.trace.evals) n_failed += ev.failed ? 1 : 0;

    parcels.push_back(
        json{{"index", p},
             {"r", out.score.r},
             {"mse", out.score.mse},
             {"degenerate", out.score.degenerate},
             {"lambda", out.model.hyper.lambda},
             {"alpha", out.model.hyper.alpha},
             {"lambda_range",
              json::array({out.trace.lambda_lo, out.trace.lambda_hi})},
             {"n_evals", out.trace.evals.size()},
             {"n_failed", n_failed},
             {"nonzero_coeffs", nonzero},
             {"observed", test.y},
             {"predicted", pred}});
  }
  j["parcellations"] = parcels;
  j["coefficient_mass"] = mass;
  j["mean_r"] = result.report.mean_r;
  j["mean_mse"] = result.report.mean_mse;
  return j;
}

void render_fit(const json& j, const std::string& out) {
  std::string text = "lagsynth fit report\n";
  text += provenance_text(j);
  text += "scheme: " + j.at("scheme").get<std::string>() +
          " (lags = " + std::to_string(j.at("lags").get<std::size_t>()) +
          ", k folds = " +
          std::to_string(j.at("k_folds").get<std::size_t>()) + ")\n";
  const json& bo = j.at("bo");
  text += "search: budget " +
          std::to_string(bo.at("budget").get<std::size_t>()) +
          ", initial design " +
          std::to_string(bo.at("initial_design").get<std::size_t>()) +
          ", candidate pool " +
          std::to_string(bo.at("candidate_pool").get<std::size_t>()) +
          ", kappa " + fmt6(bo.at("kappa").get<double>()) + "\n";

  for (const json& p : j.at("parcellations")) {
    const std::size_t idx = p.at("index").get<std::size_t>();
    text += "parcellation " + std::to_string(idx) +
            ": r = " + fmt6(p.at("r").get<double>()) +
            ", mse = " + fmt6(p.at("mse").get<double>()) +
            ", lambda = " + fmt6(p.at("lambda").get<double>()) +
            ", alpha = " + fmt6(p.at("alpha").get<double>()) + " (evals " +
            std::to_string(p.at("n_evals").get<std::size_t>()) +
            ", nonzero coeffs " +
            std::to_string(p.at("nonzero_coeffs").get<std::size_t>()) + ")";
    if (p.at("degenerate").get<bool>()) text += " [degenerate prediction]";
    text += "\n";

    const svg::Series observed{"observed",
                               p.at("observed").get<std::vector<double>>(),
                               ""};
    const svg::Series predicted{"predicted",
                                p.at("predicted").get<std::vector<double>>(),
                                ""};
    io::atomic_write(
        join_path(out, "parcellation_" + std::to_string(idx) + ".svg"),
        svg::line_plot("parcellation " + std::to_string(idx) +
                           ": predicted vs observed (r = " +
                           fmt6(p.at("r").get<double>()) + ")",
                       {observed, predicted}, "test sample", "target"));
  }
  text += "mean over parcellations: r = " +
          fmt6(j.at("mean_r").get<double>()) +
          ", mse = " + fmt6(j.at("mean_mse").get<double>()) + "\n";
  io::atomic_write(join_path(out, "report.txt"), text);

  std::vector<std::string> freq_labels;
  for (double f : j.at("freqs").get<std::vector<double>>()) {
    freq_labels.push_back(fmt6(f));
  }
  io::atomic_write(
      join_path(out, "coefficient_mass.svg"),
      svg::heatmap("coefficient group mass (channel x frequency)",
                   j.at("channels").get<std::vector<std::string>>(),
                   freq_labels,
                   j.at("coefficient_mass").get<std::vector<double>>()));
}

}  // namespace

void cmd_fit(const std::string& config_path, const Overrides& ov) {
  const LoadedRun run = load_sessions(config_path, ov);
  const std::string out = ensure_out_dir(ov, run.rc.out_dir);

  const cv::PipelineResult result =
      cv::run_pipeline(run.s1, run.s2, run.popts);
  const json j = fit_report_json(run, result);
  io::atomic_write(join_path(out, "report.json"), j.dump(2) + "\n");
  render_fit(j, out);

  std::cout << "fit: mean test r = " << fmt6(result.report.mean_r)
            << ", mse = " << fmt6(result.report.mean_mse) << " ("
            << scheme_name(run.rc.scheme) << "), report in " << out << "\n";
}

// ---------------------------------------------------------------------------
// nulltest
// ---------------------------------------------------------------------------

namespace {

void render_nulltest(const json& j, const std::string& out) {
  std::string text = "lagsynth null-test report\n";
  text += provenance_text(j);
  text += "scheme: " + j.at("scheme").get<std::string>() + "\n";
  for (const char* which : {"session1", "session2"}) {
    const json& adf = j.at("adf").at(which);
    text += std::string("adf ") + which +
            ": statistic = " + fmt6(adf.at("statistic").get<double>()) +
            ", p = " + fmt6(adf.at("p_value").get<double>()) +
            ", lags used = " +
            std::to_string(adf.at("lags_used").get<std::size_t>()) +
            (adf.at("rejected").get<bool>() ? " (unit root rejected)"
                                            : " (unit root NOT rejected)") +
            "\n";
  }
  text +=
      "observed mean test r: " + fmt6(j.at("observed_r").get<double>()) + "\n";
  text += "surrogates: " +
          std::to_string(j.at("surrogates_requested").get<std::size_t>()) +
          " requested, " +
          std::to_string(j.at("n_surrogates").get<std::size_t>()) +
          " contributing, " +
          std::to_string(j.at("n_failed").get<std::size_t>()) + " failed\n";
  text += "p (ties count against the observed): " +
          fmt6(j.at("p_value").get<double>()) + "\n";
  text += "p (conservative (k+1)/(n+1)): " +
          fmt6(j.at("p_conservative").get<double>()) + "\n";
  io::atomic_write(join_path(out, "null.txt"), text);

  io::atomic_write(
      join_path(out, "null_distribution.svg"),
      svg::violin_plot(
          "surrogate null of the mean test correlation",
          {{"surrogates",
            j.at("surrogate_stats").get<std::vector<double>>()}},
          "mean test r",
          {{"observed (p = " + fmt6(j.at("p_value").get<double>()) + ")",
            j.at("observed_r").get<double>()}}));
}

}  // namespace

void cmd_nulltest(const std::string& config_path, const Overrides& ov) {
  const LoadedRun run = load_sessions(config_path, ov);
  usage_phase([&] {
    require(run.rc.n_surrogates >= 1, "config",
            "null.surrogates must be >= 1");
    return 0;
  });
  const std::string out = ensure_out_dir(ov, run.rc.out_dir);

  surrogates::NullOptions nopts;
  nopts.n_surrogates = run.rc.n_surrogates;
  nopts.base_seed = run.rc.seed;
  nopts.adf_threshold = run.rc.adf_threshold;
  nopts.adf_max_lag = run.rc.adf_max_lag;
  const surrogates::NullDistribution null =
      surrogates::null_distribution(run.s1, run.s2, run.popts, nopts);

  json j;
  j["kind"] = "nulltest";
  j["provenance"] = provenance_json(run.rc);
  j["scheme"] = scheme_name(run.rc.scheme);
  j["adf"] = json{{"session1", adf_json(null.adf_session1)},
                  {"session2", adf_json(null.adf_session2)}};
  j["observed_r"] = null.observed_stat;
  j["surrogate_stats"] = null.surrogate_stats;
  j["surrogates_requested"] = run.rc.n_surrogates;
  j["n_surrogates"] = null.n_surrogates;
  j["n_failed"] = null.n_failed;
  j["p_value"] = null.p_value;
  j["p_conservative"] = null.p_conservative;
  io::atomic_write(join_path(out, "null.json"), j.dump(2) + "\n");
  render_nulltest(j, out);

  std::cout << "nulltest: observed r = " << fmt6(null.observed_stat)
            << ", p = " << fmt6(null.p_value) << " (conservative "
            << fmt6(null.p_conservative) << ", n = " << null.n_surrogates
            << "), report in " << out << "\n";
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

namespace {

// Mean-over-parcellations test r of the SMR and MUC references on exactly
// the splits the learned model was evaluated on.
struct ReferenceScores {
  double muc = 0.0;
  double smr_signed = 0.0;
  double smr_abs = 0.0;
};

ReferenceScores reference_scores(const cv::SessionData& s1,
                                 const cv::SessionData& s2,
                                 const cv::SplitPlan& plan,
                                 std::size_t lags) {
  require(s1.tensor.sample_rate > 0.0, "baseline",
          "tensor sample_rate must be positive");
  const double tr = 1.0 / s1.tensor.sample_rate;

  ReferenceScores scores;
  for (const cv::Parcellation& parc : plan.parcellations) {
    const auto train_blocks = cv::gather_blocks(s1, s2, parc.train);
    const auto test_blocks = cv::gather_blocks(s1, s2, parc.test);
    const cv::AssembledDesign train = cv::assemble_blocks(train_blocks, lags);
    const cv::AssembledDesign test = cv::assemble_blocks(test_blocks, lags);

    const stats::MucModel muc = stats::muc_fit(train.design, train.y);
    const stats::PearsonResult muc_r =
        stats::pearson(stats::muc_predict(muc, test.design), test.y);
    scores.muc += muc_r.degenerate ? 0.0 : muc_r.r;

    // The SMR rule needs no training; it is scored on the same lag-trimmed
    // rows the other models predict.
    std::vector<double> smr, y;
    for (const cv::DataBlock& block : test_blocks) {
      const std::vector<double> s =
          features::align_target(stats::smr_predict(block.tensor, tr), lags);
      const std::vector<double> t = features::align_target(block.target, lags);
      smr.insert(smr.end(), s.begin(), s.end());
      y.insert(y.end(), t.begin(), t.end());
    }
    const stats::PearsonResult smr_r = stats::pearson(smr, y);
    scores.smr_signed += smr_r.degenerate ? 0.0 : smr_r.r;
    scores.smr_abs += smr_r.degenerate ? 0.0 : std::fabs(smr_r.r);
  }
  const double k = double(plan.parcellations.size());
  scores.muc /= k;
  scores.smr_signed /= k;
  scores.smr_abs /= k;
  return scores;
}

void render_baseline(const json& j, const std::string& out) {
  std::string text = "lagsynth baseline report\n";
  text += provenance_text(j);
  text += "scenario: " + j.at("scenario").get<std::string>() +
          ", replicas: " + std::to_string(j.at("replicas").get<std::size_t>()) +
          ", scheme: " + j.at("scheme").get<std::string>() +
          ", q = " + fmt6(j.at("q").get<double>()) + "\n";

  const auto sgl = j.at("per_replica").at("sgl").get<std::vector<double>>();
  const auto muc = j.at("per_replica").at("muc").get<std::vector<double>>();
  const auto smr_abs =
      j.at("per_replica").at("smr_abs").get<std::vector<double>>();
  const auto smr_signed =
      j.at("per_replica").at("smr_signed").get<std::vector<double>>();
  text += "per-replica mean test r:\n";
  for (std::size_t i = 0; i < sgl.size(); ++i) {
    text += "  replica " + std::to_string(i) + ": sgl = " + fmt6(sgl[i]) +
            ", muc = " + fmt6(muc[i]) + ", smr = " + fmt6(smr_signed[i]) +
            " (|r| " + fmt6(smr_abs[i]) + ")\n";
  }

  text += "comparisons (Wilcoxon signed-rank, BH at q = " +
          fmt6(j.at("q").get<double>()) + "):\n";
  for (const json& c : j.at("comparisons")) {
    text += "  " + c.at("name").get<std::string>() +
            ": W = " + fmt6(c.at("statistic").get<double>()) +
            ", p = " + fmt6(c.at("p_value").get<double>()) +
            ", adjusted = " + fmt6(c.at("p_adjusted").get<double>()) +
            (c.at("reject").get<bool>() ? ", reject" : ", no rejection") +
            " (n = " + std::to_string(c.at("n_used").get<std::size_t>()) +
            (c.at("exact").get<bool>() ? ", exact)" : ", approximate)") +
            "\n";
  }
  io::atomic_write(join_path(out, "baseline.txt"), text);

  io::atomic_write(
      join_path(out, "baseline_comparison.svg"),
      svg::violin_plot("per-replica mean test correlation by model",
                       {{"learned", sgl}, {"MUC", muc}, {"SMR |r|", smr_abs}},
                       "mean test r"));
}

}  // namespace

void cmd_baseline(const std::string& config_path, const Overrides& ov) {
  const RunConfig rc = load_run_config(config_path, ov);
  synthgen::SyntheticSpec base_spec = usage_phase([&] {
    require(rc.baseline_replicas >= 1, "config",
            "baseline.replicas must be >= 1");
    return synthgen::scenario(rc.baseline_scenario);
  });
  const std::string out = ensure_out_dir(ov, rc.out_dir);

  std::vector<double> sgl_r, muc_r, smr_signed, smr_abs;
  std::vector<std::uint64_t> replica_seeds;
  for (std::size_t i = 0; i < rc.baseline_replicas; ++i) {
    synthgen::SyntheticSpec spec = base_spec;
    spec.seed = rng::derive(rc.seed, kCohortTag, i);
    replica_seeds.push_back(spec.seed);
    const synthgen::SyntheticDataset data = synthgen::generate(spec);
    const cv::SessionData s1{data.session1, data.target1};
    const cv::SessionData s2{data.session2, data.target2};

    cv::PipelineOptions popts;
    popts.scheme = rc.scheme;
    popts.nested = rc.nested;
    popts.nested.bo.seed = spec.seed;
    const cv::PipelineResult result = cv::run_pipeline(s1, s2, popts);
    sgl_r.push_back(result.report.mean_r);

    const ReferenceScores ref =
        reference_scores(s1, s2, result.plan, rc.nested.lags);
    muc_r.push_back(ref.muc);
    smr_signed.push_back(ref.smr_signed);
    smr_abs.push_back(ref.smr_abs);
  }

  const stats::WilcoxonResult w_muc = stats::wilcoxon_signed_rank(sgl_r, muc_r);
  const stats::WilcoxonResult w_smr =
      stats::wilcoxon_signed_rank(sgl_r, smr_abs);
  const stats::BhResult bh =
      stats::bh_fdr({w_muc.p_value, w_smr.p_value}, rc.baseline_q);

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  auto comparison = [&](const std::string& name,
                        const stats::WilcoxonResult& w, std::size_t k,
                        double mean_a, double mean_b) {
    return json{{"name", name},
                {"statistic", w.statistic},
                {"p_value", w.p_value},
                {"p_adjusted", bh.adjusted[k]},
                {"reject", bool(bh.reject[k])},
                {"n_used", w.n_used},
                {"exact", w.exact},
                {"mean_a", mean_a},
                {"mean_b", mean_b}};
  };

  json j;
  j["kind"] = "baseline";
  j["provenance"] = provenance_json(rc);
  j["provenance"]["replica_seeds"] = replica_seeds;
  j["scheme"] = scheme_name(rc.scheme);
  j["scenario"] = rc.baseline_scenario;
  j["replicas"] = rc.baseline_replicas;
  j["q"] = rc.baseline_q;
  j["per_replica"] = json{{"sgl", sgl_r},
                          {"muc", muc_r},
                          {"smr_signed", smr_signed},
                          {"smr_abs", smr_abs}};
  j["comparisons"] =
      json::array({comparison("sgl_vs_muc", w_muc, 0, mean_of(sgl_r),
                              mean_of(muc_r)),
                   comparison("sgl_vs_smr_abs", w_smr, 1, mean_of(sgl_r),
                              mean_of(smr_abs))});
  io::atomic_write(join_path(out, "baseline.json"), j.dump(2) + "\n");
  render_baseline(j, out);

  std::cout << "baseline " << rc.baseline_scenario << " x"
            << rc.baseline_replicas << ": sgl " << fmt6(mean_of(sgl_r))
            << " vs muc " << fmt6(mean_of(muc_r)) << " (p "
            << fmt6(w_muc.p_value) << "), vs smr |r| "
            << fmt6(mean_of(smr_abs)) << " (p " << fmt6(w_smr.p_value)
            << "), report in " << out << "\n";
}

// ---------------------------------------------------------------------------
// report + verify
// ---------------------------------------------------------------------------

void cmd_report(const std::string& report_path, const Overrides& ov) {
  const json j = usage_phase([&] {
    try {
      return json::parse(io::read_file(report_path));
    } catch (const json::parse_error& err) {
      fail("report", report_path + " is not valid JSON: " + err.what());
    }
  });
  // Without --out the derived files land next to the report itself.
  const std::string out = ensure_out_dir(
      ov,
      std::filesystem::absolute(report_path).parent_path().string());

  const std::string kind = usage_phase([&] {
    require(j.contains("kind") && j.at("kind").is_string(), "report",
            report_path + " has no report kind");
    return j.at("kind").get<std::string>();
  });
  try {
    if (kind == "fit") {
      render_fit(j, out);
    } else if (kind == "nulltest") {
      render_nulltest(j, out);
    } else if (kind == "baseline") {
      render_baseline(j, out);
    } else {
      throw UsageError("report: unknown kind " + kind);
    }
  } catch (const UsageError&) {
    throw;
  } catch (const json::exception& err) {
    throw UsageError("report: " + report_path +
                     " is missing fields: " + err.what());
  }
  std::cout << "report: rendered " << kind << " summary to " << out << "\n";
}

void cmd_verify(const std::string& report_path,
                const std::string& config_path) {
  const json j = usage_phase([&] {
    try {
      return json::parse(io::read_file(report_path));
    } catch (const json::parse_error& err) {
      fail("verify", report_path + " is not valid JSON: " + err.what());
    }
  });
  std::string stored_hash, config_text;
  usage_phase([&] {
    try {
      stored_hash = j.at("provenance").at("config_hash").get<std::string>();
      config_text = j.at("provenance").at("config_text").get<std::string>();
    } catch (const json::exception& err) {
      fail("verify", report_path + " carries no provenance: " + err.what());
    }
    return 0;
  });

  const std::string recomputed = hash_hex(io::fnv1a64(config_text));
  require(recomputed == stored_hash, "verify",
          "embedded config hashes to " + recomputed + " but the report says " +
              stored_hash);
  if (!config_path.empty()) {
    const std::string file_text =
        usage_phase([&] { return io::read_file(config_path); });
    const std::string file_hash = hash_hex(io::fnv1a64(file_text));
    require(file_hash == stored_hash, "verify",
            config_path + " hashes to " + file_hash + " but the report says " +
                stored_hash);
  }
  std::cout << "verify: OK, config hash " << stored_hash << " ("
            << config_text.size() << " config bytes)\n";
}

int run_guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace lagsynth::cli
