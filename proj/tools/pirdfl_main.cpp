// pirdfl: PIR device-free localization lab.
// Subcommands: simulate | train | evaluate | sweep | baseline | augment

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "pirdfl/harness.hpp"

using namespace pirdfl;

namespace {

ExperimentConfig resolve_config(const std::string& config_path, long seed_override,
                                const std::string& preset, bool no_preprocess,
                                bool no_augment) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig::defaults()
                                             : load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (!preset.empty()) cfg.preset = preset;
  if (no_preprocess) cfg.preprocess = false;
  if (no_augment) cfg.augment = false;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PIR sensor array simulation, PIRNet training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", data_dir, ckpt_dir;
  long seed_override = -1;
  std::string preset;
  bool no_preprocess = false, no_augment = false;

  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--preset", preset, "model preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper", ""}));
  app.add_flag("--no-preprocess", no_preprocess,
               "feed raw windows instead of denoised, normalized DHF");
  app.add_flag("--no-augment", no_augment, "train on raw windows only");
  app.add_option("--out", out_dir, "output directory");

  auto* sim = app.add_subcommand("simulate", "generate train/val/test datasets");

  auto* train = app.add_subcommand("train", "train the networks");
  std::string target = "all";
  train->add_option("--target", target,
                    "counter, localizer-1..3, or all");
  train->add_option("--data", data_dir, "dataset directory")->required();

  auto* eval = app.add_subcommand("evaluate", "evaluate checkpoints on the test set");
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--checkpoints", ckpt_dir, "checkpoint directory")->required();

  auto* sweep = app.add_subcommand("sweep", "trend sweeps");
  std::string axis = "sensors";
  sweep->add_option("--axis", axis, "sensors | train-length | noise-sources")
      ->check(CLI::IsMember({"sensors", "train-length", "noise-sources"}));

  auto* baseline = app.add_subcommand("baseline", "separation baseline");
  std::string method = "scica";
  std::string count_source = "ground_truth";
  baseline->add_option("method", method, "baseline method")
      ->check(CLI::IsMember({"scica"}));
  baseline->add_option("--count-source", count_source,
                       "ground_truth or counting_net");
  baseline->add_option("--checkpoints", ckpt_dir,
                       "checkpoint directory for counting_net");

  auto* augment = app.add_subcommand("augment", "emit augmented training windows");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve_config(config_path, seed_override,
                                                preset, no_preprocess, no_augment);
    if (sim->parsed()) {
      cmd_simulate(cfg, out_dir);
      std::printf("dataset written to %s\n", out_dir.c_str());
    } else if (train->parsed()) {
      const auto results = cmd_train(cfg, data_dir, target, out_dir);
      for (const auto& r : results)
        std::printf("%s: best epoch %d (val %.6f), stopped after %d epochs\n",
                    r.target.c_str(), r.result.best_epoch, r.result.best_val_loss,
                    r.result.stopped_epoch);
    } else if (eval->parsed()) {
      const EvalReport report = cmd_evaluate(cfg, data_dir, ckpt_dir, out_dir);
      std::printf("accuracy %.4f\n", report.accuracy);
      for (int m = 0; m < kMaxPersons; ++m)
        std::printf("localization %d-person: mean %.3f m, std %.3f m (%ld samples)\n",
                    m + 1, report.loc_mean[m], report.loc_std[m],
                    static_cast<long>(report.loc_errors[m].size()));
      std::printf("report written to %s\n", out_dir.c_str());
    } else if (sweep->parsed()) {
      const auto rows = cmd_sweep(cfg, axis, out_dir);
      for (const auto& r : rows)
        std::printf("%s=%g accuracy %.4f overall localization %.3f m\n",
                    axis.c_str(), r.axis_value, r.report.accuracy,
                    r.report.overall_loc_mean());
    } else if (baseline->parsed()) {
      const BaselineReport report =
          cmd_baseline(cfg, out_dir, count_source, ckpt_dir);
      std::printf("disjoint-spectra mean correlation %.4f\n", report.disjoint_mean);
      for (std::size_t i = 0; i < report.overlap_sweep.size(); ++i)
        std::printf("overlap sweep point %zu: %.4f\n", i, report.overlap_sweep[i]);
    } else if (augment->parsed()) {
      cmd_augment(cfg, out_dir);
      std::printf("augmented windows written to %s\n", out_dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
