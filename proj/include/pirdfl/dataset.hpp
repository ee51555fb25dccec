#pragma once
#include <string>
#include <vector>

#include "pirdfl/config.hpp"
#include "pirdfl/simulator.hpp"
#include "pirdfl/window.hpp"

namespace pirdfl {

enum class Split { kTrain, kVal, kTest };

/// Split-level RNG roots; train/val/test draw from disjoint streams.
std::uint64_t split_seed(const ExperimentConfig& cfg, Split split);

/// Deterministic scene for one (split, class, index) cell. `n_sensors`
/// truncates the deployment for sensor sweeps; extra_noise_sources adds
/// static heat sources at the configured perimeter posts.
Scene make_scene(const ExperimentConfig& cfg, Split split, int n_persons,
                 int scene_index, int n_sensors = -1,
                 int extra_noise_sources = 0);

/// Windows of one split across all classes 0..max_persons. Train windows use
/// the training hop, eval splits the evaluation hop.
std::vector<SignalWindow> generate_split_windows(const ExperimentConfig& cfg,
                                                 Split split, int n_sensors = -1,
                                                 int extra_noise_sources = 0,
                                                 double minutes_override = -1.0);

/// DHF-domain augmented training windows (time warps plus extremum
/// reshaping), regenerated deterministically from the same scene streams.
std::vector<SignalWindow> generate_augmented_windows(const ExperimentConfig& cfg,
                                                     int n_sensors = -1);

/// Fixed input scale for the no-preprocessing path: 1 / max |voltage| over
/// the training windows.
double raw_scale_from(const std::vector<SignalWindow>& train_windows);

/// Scene count per class for a split.
int scenes_per_class(const ExperimentConfig& cfg, Split split,
                     double minutes_override = -1.0);

}  // namespace pirdfl
