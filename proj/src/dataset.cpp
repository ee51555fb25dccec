#include "pirdfl/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include "pirdfl/parallel.hpp"
#include "pirdfl/pipeline.hpp"
#include "pirdfl/rng.hpp"

namespace pirdfl {

std::uint64_t split_seed(const ExperimentConfig& cfg, Split split) {
  switch (split) {
    case Split::kTrain: return Rng::mix(cfg.seed, 0x7a11);
    case Split::kVal: return Rng::mix(cfg.seed, 0x7a22);
    case Split::kTest: return Rng::mix(cfg.seed, 0x7a33);
  }
  throw std::logic_error("bad split");
}

int scenes_per_class(const ExperimentConfig& cfg, Split split,
                     double minutes_override) {
  double minutes = minutes_override;
  if (minutes <= 0.0) {
    minutes = split == Split::kTrain ? cfg.train_minutes
              : split == Split::kVal ? cfg.val_minutes
                                     : cfg.test_minutes;
  }
  return std::max(1, static_cast<int>(std::round(minutes * 60.0 / cfg.scene_seconds)));
}

namespace {

Trajectory random_trajectory(const ExperimentConfig& cfg, Rng& rng,
                             double duration) {
  Trajectory t;
  t.start_time = 0.0;
  t.waypoints.push_back(
      {rng.uniform(0.0, cfg.arena_width), rng.uniform(0.0, cfg.arena_height)});
  double covered = 0.0;
  while (covered < duration) {
    const Vec2 next{rng.uniform(0.0, cfg.arena_width),
                    rng.uniform(0.0, cfg.arena_height)};
    const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    const double leg = distance(t.waypoints.back(), next);
    if (leg < 0.5) continue;  // skip degenerate hops
    t.waypoints.push_back(next);
    t.leg_speeds.push_back(speed);
    covered += leg / speed;
  }
  return t;
}

long scene_ident(Split split, int n_persons, int scene_index) {
  return (static_cast<long>(split) + 1) * 1000000L + n_persons * 100000L +
         scene_index;
}

}  // namespace

Scene make_scene(const ExperimentConfig& cfg, Split split, int n_persons,
                 int scene_index, int n_sensors, int extra_noise_sources) {
  Scene scene;
  scene.arena = {cfg.arena_width, cfg.arena_height};
  scene.sensors = cfg.build_sensors(n_sensors);
  scene.duration = cfg.scene_seconds;
  scene.occlusion = cfg.occlusion;
  scene.env_temp = cfg.env_temp;
  scene.radiometric_constant = cfg.radiometric_constant;
  scene.rng_seed = Rng::mix(split_seed(cfg, split),
                            static_cast<std::uint64_t>(n_persons) * 0x10000 +
                                static_cast<std::uint64_t>(scene_index));

  Rng rng = Rng::stream(scene.rng_seed, 0xce11);
  for (int p = 0; p < n_persons; ++p) {
    Person person;
    person.state.effective_area = cfg.person_area;
    person.state.radius = cfg.person_radius;
    person.state.surface_temp =
        rng.uniform(cfg.person_temp_min, cfg.person_temp_max);
    person.trajectory = random_trajectory(cfg, rng, scene.duration);
    scene.persons.push_back(std::move(person));
  }

  for (int k = 0; k < extra_noise_sources; ++k) {
    if (k >= static_cast<int>(cfg.noise_posts.size())) break;
    HeatSource src;
    src.position = cfg.noise_posts[k];
    src.effective_area = 0.4;
    src.surface_temp = 304.0;  // person-like bystander
    scene.heat_sources.push_back(src);
  }

  const double peak = typical_single_person_peak(scene);
  scene.noise.gaussian_std = cfg.noise_gaussian_rel * peak;
  scene.noise.drift_std = cfg.noise_drift_rel * peak;
  scene.noise.drift_cutoff = cfg.drift_cutoff;
  scene.validate();
  return scene;
}

std::vector<SignalWindow> generate_split_windows(const ExperimentConfig& cfg,
                                                 Split split, int n_sensors,
                                                 int extra_noise_sources,
                                                 double minutes_override) {
  const int per_class = scenes_per_class(cfg, split, minutes_override);
  const double hop =
      split == Split::kTrain ? cfg.train_hop_seconds : cfg.eval_hop_seconds;

  struct Cell {
    int n_persons, index;
  };
  std::vector<Cell> cells;
  for (int c = 0; c <= cfg.max_persons; ++c)
    for (int i = 0; i < per_class; ++i) cells.push_back({c, i});

  std::vector<std::vector<SignalWindow>> per_cell(cells.size());
  parallel_for(static_cast<long>(cells.size()), [&](long ci) {
    const Cell cell = cells[ci];
    const Scene scene = make_scene(cfg, split, cell.n_persons, cell.index,
                                   n_sensors, extra_noise_sources);
    const SceneTrace trace = simulate_scene(scene);
    per_cell[ci] =
        window_dataset(trace, scene_ident(split, cell.n_persons, cell.index),
                       cfg.window_seconds, hop, cfg.pipeline.segments);
  });

  std::vector<SignalWindow> out;
  for (auto& v : per_cell)
    for (auto& w : v) out.push_back(std::move(w));
  return out;
}

std::vector<SignalWindow> generate_augmented_windows(const ExperimentConfig& cfg,
                                                     int n_sensors) {
  const int per_class = scenes_per_class(cfg, Split::kTrain);

  struct Cell {
    int n_persons, index;
  };
  std::vector<Cell> cells;
  for (int c = 0; c <= cfg.max_persons; ++c)
    for (int i = 0; i < per_class; ++i) cells.push_back({c, i});

  std::vector<std::vector<SignalWindow>> per_cell(cells.size());
  parallel_for(static_cast<long>(cells.size()), [&](long ci) {
    const Cell cell = cells[ci];
    const Scene scene =
        make_scene(cfg, Split::kTrain, cell.n_persons, cell.index, n_sensors);
    const SceneTrace trace = simulate_scene(scene);
    const long ident = scene_ident(Split::kTrain, cell.n_persons, cell.index);

    // augmentation operates on the scene-level denoised DHF estimate
    SeriesBundle bundle;
    bundle.sample_rate = trace.sample_rate;
    bundle.scene_id = ident;
    bundle.positions = trace.positions;
    for (std::size_t s = 0; s < trace.voltage.size(); ++s) {
      const auto raw = invert_dynamics(trace.voltage[s], scene.sensors[s].dynamics);
      bundle.dhf.push_back(low_pass_zero_phase(raw, cfg.pipeline.regularizer_cutoff,
                                               trace.sample_rate));
    }

    std::vector<SignalWindow> wins;
    for (double a : cfg.pipeline.warp_factors) {
      const SeriesBundle warped = time_warp(bundle, a);
      char tag[32];
      std::snprintf(tag, sizeof tag, "warp_%g", a);
      auto ws = window_bundle(warped, cfg.window_seconds, cfg.train_hop_seconds,
                              cfg.pipeline.segments, tag);
      for (auto& w : ws) wins.push_back(std::move(w));
    }
    Rng rng = Rng::stream(scene.rng_seed, 0xae5);
    const SeriesBundle reshaped = reshape_augment(bundle, cfg.pipeline, rng);
    auto ws = window_bundle(reshaped, cfg.window_seconds, cfg.train_hop_seconds,
                            cfg.pipeline.segments, "reshape");
    for (auto& w : ws) wins.push_back(std::move(w));
    per_cell[ci] = std::move(wins);
  });

  std::vector<SignalWindow> out;
  for (auto& v : per_cell)
    for (auto& w : v) out.push_back(std::move(w));
  return out;
}

double raw_scale_from(const std::vector<SignalWindow>& train_windows) {
  double peak = 0.0;
  for (const auto& w : train_windows)
    for (double v : w.voltages) peak = std::max(peak, std::abs(v));
  return peak > 0.0 ? 1.0 / peak : 1.0;
}

}  // namespace pirdfl
