#pragma once
#include <memory>
#include <string>
#include <vector>

#include "pirdfl/config.hpp"
#include "pirdfl/dataset.hpp"
#include "pirdfl/metrics.hpp"
#include "pirdfl/scica.hpp"
#include "pirdfl/train.hpp"

namespace pirdfl {

/// Dataset generation: train/val/test JSONL plus the augmented training
/// windows and a manifest with seeds, counts and the raw-input scale.
void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

/// Builds training samples for one target from stored windows.
std::vector<TrainSample> build_samples(const ExperimentConfig& cfg,
                                       const std::vector<SignalWindow>& windows,
                                       const std::string& target,
                                       double raw_scale);

struct TrainedTarget {
  std::string target;
  TrainResult result;
  std::string checkpoint_path;
};

/// Trains `counter`, `localizer-M`, or `all`; persists checkpoints, loss
/// curves and the checkpoint manifest under out_dir.
std::vector<TrainedTarget> cmd_train(const ExperimentConfig& cfg,
                                     const std::string& data_dir,
                                     const std::string& target,
                                     const std::string& out_dir);

/// Loads the checkpoint set written by cmd_train.
struct LoadedModels {
  std::unique_ptr<PirNet> counter;
  std::array<std::unique_ptr<PirNet>, kMaxPersons> localizers;
  InferencePolicy policy(const ExperimentConfig& cfg) const;
  double raw_scale = 1.0;
};
LoadedModels load_models(const ExperimentConfig& cfg, const std::string& ckpt_dir);

EvalReport cmd_evaluate(const ExperimentConfig& cfg, const std::string& data_dir,
                        const std::string& ckpt_dir, const std::string& out_dir);

struct SweepRow {
  double axis_value = 0.0;
  EvalReport report;
};

/// axis: "sensors" (1..4 corner deployments), "train-length" (data
/// fractions), or "noise-sources" (0..4 perimeter heat sources at test
/// time). Writes sweep.csv and returns the rows.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg,
                                const std::string& axis,
                                const std::string& out_dir);

struct BaselineRow {
  std::string label;
  double speed_a = 0.0, speed_b = 0.0;
  std::uint64_t seed = 0;
  SeparationScore score;
};

struct BaselineReport {
  std::vector<BaselineRow> rows;
  double disjoint_mean = 0.0;            ///< mean correlation, disjoint case
  std::vector<double> overlap_sweep;     ///< mean correlation per sweep point
};

/// A two-person separation scene: both walk circles at fixed speeds so their
/// DHF spectra concentrate at distinct zone-crossing rates.
SeparationCase make_separation_case(const ExperimentConfig& cfg,
                                    std::uint64_t seed, double speed_a,
                                    double speed_b, double duration_s);

/// SCICA baseline evaluation: the disjoint-spectra case plus a 3-point
/// spectral-overlap sweep. count_source is "ground_truth" or "counting_net"
/// (the latter needs a checkpoint directory).
BaselineReport cmd_baseline(const ExperimentConfig& cfg,
                            const std::string& out_dir,
                            const std::string& count_source = "ground_truth",
                            const std::string& ckpt_dir = "");

/// Writes the augmented training windows as standalone JSONL.
void cmd_augment(const ExperimentConfig& cfg, const std::string& out_dir);

/// Majority-vote person count over a scene's windows using the counting net.
int counting_net_vote(const InferencePolicy& policy,
                      const std::vector<SignalWindow>& windows);

}  // namespace pirdfl
