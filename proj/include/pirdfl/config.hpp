#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pirdfl/dynamics.hpp"
#include "pirdfl/geometry.hpp"
#include "pirdfl/params.hpp"
#include "pirdfl/pipeline.hpp"

namespace pirdfl {

/// Everything one experiment run needs; serialized as nested JSON.
struct ExperimentConfig {
  // arena and sensor deployment
  double arena_width = 7.0;
  double arena_height = 7.0;
  std::vector<Vec2> sensor_positions;  ///< default: the four corners

  // zone pattern shared by all sensors
  int n_beams = 7;
  double beam_width_deg = 4.0;
  double gap_width_deg = 4.0;
  double fov_deg = 110.0;
  double max_range = 12.0;
  DynamicsConstants dynamics;

  // radiometry
  double env_temp = 293.0;
  double radiometric_constant = 1.0;
  double person_area = 0.6;
  double person_radius = 0.25;
  double person_temp_min = 303.0;  ///< per-scene surface temps drawn here
  double person_temp_max = 307.0;
  double speed_min = 0.5;
  double speed_max = 1.5;
  bool occlusion = true;

  // noise, relative to the typical single-person peak
  double noise_gaussian_rel = 0.02;
  double noise_drift_rel = 0.05;
  double drift_cutoff = 0.2;

  // data volumes per class
  double train_minutes = 20.0;
  double val_minutes = 4.0;
  double test_minutes = 8.0;
  double scene_seconds = 60.0;
  double window_seconds = 2.5;
  double train_hop_seconds = 1.25;
  double eval_hop_seconds = 2.5;
  int max_persons = 3;

  PipelineConfig pipeline;

  std::string preset = "desk";  ///< desk | paper
  TrainConfig train;

  // ablation switches
  bool preprocess = true;
  bool augment = true;

  // sweep settings
  double sweep_train_fraction = 0.5;
  std::vector<Vec2> noise_posts;  ///< default: perimeter midpoints

  std::uint64_t seed = 1;

  /// Corner deployment in the conventional order.
  static ExperimentConfig defaults();

  std::vector<SensorModel> build_sensors(int first_k = -1) const;
  int window_samples() const {
    return static_cast<int>(window_seconds * dynamics.sample_rate);
  }
  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

}  // namespace pirdfl
