#include "pirdfl/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "pirdfl/dynamics.hpp"
#include "pirdfl/parallel.hpp"

namespace pirdfl {

void PersonState::validate() const {
  if (!(effective_area > 0.0)) throw std::invalid_argument("effective_area must be > 0");
  if (!(radius > 0.0)) throw std::invalid_argument("person radius must be > 0");
  if (!(surface_temp > 0.0)) throw std::invalid_argument("surface_temp must be > 0");
}

void HeatSource::validate() const {
  if (!(effective_area > 0.0)) throw std::invalid_argument("effective_area must be > 0");
  if (!(surface_temp > 0.0)) throw std::invalid_argument("surface_temp must be > 0");
}

void NoiseConfig::validate() const {
  if (gaussian_std < 0.0 || drift_std < 0.0 || drift_cutoff < 0.0)
    throw std::invalid_argument("noise levels must be >= 0");
}

double Trajectory::total_time() const {
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
    t += distance(waypoints[i], waypoints[i + 1]) / leg_speeds[i];
  return t;
}

void Trajectory::validate() const {
  if (waypoints.empty()) throw std::invalid_argument("trajectory needs waypoints");
  if (waypoints.size() >= 2 && leg_speeds.size() != waypoints.size() - 1)
    throw std::invalid_argument("trajectory needs one speed per leg");
  for (double s : leg_speeds)
    if (!(s > 0.0)) throw std::invalid_argument("leg speeds must be > 0");
}

Vec2 Trajectory::position_at(double t) const {
  t -= start_time;
  if (t <= 0.0 || waypoints.size() == 1) return waypoints.front();
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const double leg = distance(waypoints[i], waypoints[i + 1]) / leg_speeds[i];
    if (t <= leg) {
      const double f = leg > 0.0 ? t / leg : 0.0;
      return waypoints[i] + (waypoints[i + 1] - waypoints[i]) * f;
    }
    t -= leg;
  }
  return waypoints.back();
}

void Scene::validate() const {
  if (sensors.empty()) throw std::invalid_argument("scene needs at least one sensor");
  if (static_cast<int>(persons.size()) > kMaxPersons)
    throw std::invalid_argument("scene exceeds the maximum person count");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  for (const auto& s : sensors) s.validate();
  for (const auto& p : persons) {
    p.state.validate();
    p.trajectory.validate();
    for (Vec2 w : p.trajectory.waypoints)
      if (!arena.contains(w))
        throw std::invalid_argument("trajectory exiting arena");
  }
  for (const auto& h : heat_sources) h.validate();
  noise.validate();
}

double dhf_single(Vec2 position, double effective_area, double surface_temp,
                  const SensorModel& sensor, double env_temp,
                  double radiometric_constant) {
  const double d = distance(position, sensor.pose.position);
  if (d == 0.0) throw std::invalid_argument("degenerate geometry");
  const int sign = zone_sign(sensor, position);
  if (sign == 0) return 0.0;
  const double t4 = surface_temp * surface_temp * surface_temp * surface_temp;
  const double e4 = env_temp * env_temp * env_temp * env_temp;
  return sign * radiometric_constant * effective_area * (t4 - e4) / (d * d);
}

bool occludes(Vec2 blocker, double blocker_radius, Vec2 emitter,
              const SensorModel& sensor) {
  const Vec2 origin = sensor.pose.position;
  const double db = distance(blocker, origin);
  const double de = distance(emitter, origin);
  if (db == 0.0 || de == 0.0) return false;
  if (db >= de) return false;
  double delta = std::atan2(blocker.y - origin.y, blocker.x - origin.x) -
                 std::atan2(emitter.y - origin.y, emitter.x - origin.x);
  delta = std::remainder(delta, 2 * M_PI);
  return std::abs(delta) < std::atan(blocker_radius / db);
}

double dhf_total(const std::vector<Vec2>& person_positions,
                 const std::vector<PersonState>& person_states,
                 const std::vector<HeatSource>& sources,
                 const SensorModel& sensor, bool occlusion, double env_temp,
                 double radiometric_constant) {
  const std::size_t np = person_positions.size();
  auto hidden = [&](Vec2 emitter, std::size_t self) {
    if (!occlusion) return false;
    for (std::size_t b = 0; b < np; ++b) {
      if (b == self) continue;
      if (occludes(person_positions[b], person_states[b].radius, emitter, sensor))
        return true;
    }
    return false;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    if (hidden(person_positions[i], i)) continue;
    total += dhf_single(person_positions[i], person_states[i].effective_area,
                        person_states[i].surface_temp, sensor, env_temp,
                        radiometric_constant);
  }
  for (const auto& src : sources) {
    if (hidden(src.position, np)) continue;
    total += dhf_single(src.position, src.effective_area, src.surface_temp,
                        sensor, env_temp, radiometric_constant);
  }
  return total;
}

double typical_single_person_peak(const Scene& scene) {
  PersonState ref;
  const double d = std::hypot(scene.arena.width / 2, scene.arena.height / 2);
  const double t4 = std::pow(ref.surface_temp, 4);
  const double e4 = std::pow(scene.env_temp, 4);
  return scene.radiometric_constant * ref.effective_area * (t4 - e4) / (d * d);
}

SceneTrace simulate_scene(const Scene& scene, bool record_per_person) {
  scene.validate();
  const double fs = scene.sensors.front().dynamics.sample_rate;
  const int n = static_cast<int>(std::floor(scene.duration * fs));
  const std::size_t np = scene.persons.size();
  const std::size_t ns = scene.sensors.size();

  SceneTrace trace;
  trace.sample_rate = fs;
  trace.n_samples = n;
  trace.positions.assign(np, std::vector<Vec2>(n));
  for (std::size_t p = 0; p < np; ++p)
    for (int i = 0; i < n; ++i)
      trace.positions[p][i] = scene.persons[p].trajectory.position_at(i / fs);

  std::vector<PersonState> states;
  states.reserve(np);
  for (const auto& p : scene.persons) states.push_back(p.state);

  trace.dhf.assign(ns, {});
  trace.voltage.assign(ns, {});
  if (record_per_person)
    trace.person_dhf.assign(np, std::vector<std::vector<double>>(
                                    ns, std::vector<double>(n, 0.0)));

  // Each sensor owns an independent noise stream so results do not depend on
  // how sensors are scheduled across threads.
  parallel_for(static_cast<long>(ns), [&](long s) {
    const SensorModel& sensor = scene.sensors[s];
    std::vector<double> dhf(n, 0.0);
    std::vector<Vec2> pos(np);
    for (int i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < np; ++p) pos[p] = trace.positions[p][i];
      dhf[i] = dhf_total(pos, states, scene.heat_sources, sensor,
                         scene.occlusion, scene.env_temp,
                         scene.radiometric_constant);
      if (record_per_person) {
        for (std::size_t p = 0; p < np; ++p) {
          bool hidden = false;
          if (scene.occlusion) {
            for (std::size_t b = 0; b < np && !hidden; ++b)
              if (b != p &&
                  occludes(pos[b], states[b].radius, pos[p], sensor))
                hidden = true;
          }
          trace.person_dhf[p][s][i] =
              hidden ? 0.0
                     : dhf_single(pos[p], states[p].effective_area,
                                  states[p].surface_temp, sensor,
                                  scene.env_temp, scene.radiometric_constant);
        }
      }
    }

    if (scene.noise.gaussian_std > 0.0 || scene.noise.drift_std > 0.0) {
      Rng rng = Rng::stream(scene.rng_seed, 0x5e50ULL + s);
      const double a = std::exp(-2 * M_PI * scene.noise.drift_cutoff / fs);
      // innovation scale that gives the AR(1) drift its stationary std
      const double innov =
          scene.noise.drift_std * std::sqrt((1 + a) / (1 - a));
      double drift = 0.0;
      for (int i = 0; i < n; ++i) {
        double add = 0.0;
        if (scene.noise.gaussian_std > 0.0)
          add += scene.noise.gaussian_std * rng.gaussian();
        if (scene.noise.drift_std > 0.0) {
          drift = a * drift + (1 - a) * innov * rng.gaussian();
          add += drift;
        }
        dhf[i] += add;
      }
    }

    trace.voltage[s] = sensor_dynamics(dhf, sensor.dynamics);
    trace.dhf[s] = std::move(dhf);
  });

  return trace;
}

}  // namespace pirdfl
