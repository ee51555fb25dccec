#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pirdfl/geometry.hpp"
#include "pirdfl/rng.hpp"

namespace pirdfl {

/// Radiative properties of one person. The position comes from a Trajectory.
struct PersonState {
  double effective_area = 0.6;  ///< m^2 radiating cross-section
  double surface_temp = 305.0;  ///< kelvin
  double radius = 0.25;         ///< m, occlusion cylinder

  void validate() const;
};

/// Piecewise-linear path: waypoints with a speed per leg.
struct Trajectory {
  std::vector<Vec2> waypoints;
  std::vector<double> leg_speeds;  ///< m/s, size = waypoints.size() - 1
  double start_time = 0.0;

  /// Position at time t, clamped to the path ends.
  Vec2 position_at(double t) const;
  double total_time() const;
  void validate() const;
};

struct Person {
  PersonState state;
  Trajectory trajectory;
};

struct HeatSource {
  Vec2 position;
  double effective_area = 0.3;
  double surface_temp = 310.0;
  bool is_static = true;

  void validate() const;
};

/// Absolute noise levels in DHF units. White gaussian plus a low-pass drift
/// term (wind-like) are added to the DHF before the sensor dynamics.
struct NoiseConfig {
  double gaussian_std = 0.0;
  double drift_std = 0.0;
  double drift_cutoff = 0.2;  ///< Hz

  void validate() const;
};

struct Rect {
  double width = 7.0;
  double height = 7.0;

  bool contains(Vec2 p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height;
  }
};

constexpr int kMaxPersons = 3;

struct Scene {
  Rect arena;
  std::vector<SensorModel> sensors;
  std::vector<Person> persons;
  std::vector<HeatSource> heat_sources;
  NoiseConfig noise;
  double duration = 10.0;  ///< seconds
  std::uint64_t rng_seed = 0;
  bool occlusion = true;
  double env_temp = 293.0;          ///< kelvin; also the element temperature
  double radiometric_constant = 1.0;

  void validate() const;
};

/// DHF of a single emitter: zone sign times k_r * area * (T^4 - Tenv^4) / d^2.
/// Throws std::invalid_argument("degenerate geometry") when the emitter sits
/// exactly on the sensor.
double dhf_single(Vec2 position, double effective_area, double surface_temp,
                  const SensorModel& sensor, double env_temp,
                  double radiometric_constant);

/// True iff `blocker` hides `emitter` from the sensor: strictly nearer and
/// within the angular half-width atan(radius / blocker distance).
bool occludes(Vec2 blocker, double blocker_radius, Vec2 emitter,
              const SensorModel& sensor);

/// Instantaneous total DHF over persons and heat sources. With occlusion on,
/// any emitter hidden behind a person contributes zero.
double dhf_total(const std::vector<Vec2>& person_positions,
                 const std::vector<PersonState>& person_states,
                 const std::vector<HeatSource>& sources,
                 const SensorModel& sensor, bool occlusion, double env_temp,
                 double radiometric_constant);

/// Everything a simulated scene produces, sampled at the sensor rate.
struct SceneTrace {
  double sample_rate = 60.0;
  int n_samples = 0;
  std::vector<std::vector<double>> dhf;      ///< [sensor][sample], noise included
  std::vector<std::vector<double>> voltage;  ///< [sensor][sample]
  std::vector<std::vector<Vec2>> positions;  ///< [person][sample]
  /// Noise-free per-person DHF, [person][sensor][sample]; filled only when
  /// simulate_scene is asked to record it (separation ground truth).
  std::vector<std::vector<std::vector<double>>> person_dhf;
};

SceneTrace simulate_scene(const Scene& scene, bool record_per_person = false);

/// Peak single-person DHF for the default person standing at the arena
/// center seen from a corner; the anchor for relative noise levels.
double typical_single_person_peak(const Scene& scene);

}  // namespace pirdfl
