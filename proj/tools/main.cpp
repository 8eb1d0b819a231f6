#include <string>

#include "CLI11.hpp"

#include "lagsynth/cli.hpp"

namespace cli = lagsynth::cli;

int main(int argc, char** argv) {
  CLI::App app{
      "EEG-to-fMRI prediction pipeline: synthetic datasets, sparse "
      "group-penalized fits, surrogate null tests, and reference baselines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolName) + " " +
                                        cli::kToolVersion);

  cli::Overrides ov;
  std::string scenario, config_path, report_path, verify_config;

  auto add_common = [&](CLI::App* cmd, bool with_scheme) {
    cmd->add_option("--out", ov.out_dir, "output directory");
    cmd->add_option("--seed", ov.seed, "seed override")
        ->each([&](const std::string&) { ov.has_seed = true; });
    if (with_scheme) {
      cmd->add_option("--scheme", ov.scheme, "train/test scheme")
          ->check(CLI::IsMember({"inter", "intra"}));
    }
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("scenario", scenario, "scenario name (S1, S2, S3)")
      ->required();
  add_common(synth, false);
  synth->add_flag("--force", ov.force, "overwrite existing files");

  CLI::App* fit = app.add_subcommand("fit", "run the prediction pipeline");
  fit->add_option("--config", config_path, "run configuration file")
      ->required();
  add_common(fit, true);

  CLI::App* nulltest =
      app.add_subcommand("nulltest", "surrogate significance test");
  nulltest->add_option("--config", config_path, "run configuration file")
      ->required();
  add_common(nulltest, true);
  nulltest->add_option("--surrogates", ov.surrogates, "surrogate count")
      ->each([&](const std::string&) { ov.has_surrogates = true; });

  CLI::App* baseline = app.add_subcommand(
      "baseline", "replicate cohort against the reference models");
  baseline->add_option("--config", config_path, "run configuration file")
      ->required();
  add_common(baseline, true);

  CLI::App* report = app.add_subcommand(
      "report", "re-render summary and plots from a stored report");
  report->add_option("report", report_path, "stored report (*.json)")
      ->required();
  add_common(report, false);

  CLI::App* verify =
      app.add_subcommand("verify", "check a report's embedded config hash");
  verify->add_option("report", report_path, "stored report (*.json)")
      ->required();
  verify->add_option("--config", verify_config,
                     "config file that must match the embedded hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad invocation
  }

  return cli::run_guarded([&] {
    if (synth->parsed()) {
      cli::cmd_synth(scenario, ov);
    } else if (fit->parsed()) {
      cli::cmd_fit(config_path, ov);
    } else if (nulltest->parsed()) {
      cli::cmd_nulltest(config_path, ov);
    } else if (baseline->parsed()) {
      cli::cmd_baseline(config_path, ov);
    } else if (report->parsed()) {
      cli::cmd_report(report_path, ov);
    } else {
      cli::cmd_verify(report_path, verify_config);
    }
  });
}
