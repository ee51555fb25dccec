#pragma once
#include <cmath>

#include "pirdfl/dynamics.hpp"

namespace pirdfl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Where a sensor sits and where it looks.
struct SensorPose {
  Vec2 position;
  double boresight = 0.0;  ///< radians, world frame
  double fov = 0.0;        ///< total horizontal field of view, (0, pi]
  double max_range = 0.0;  ///< meters

  void validate() const;
};

/// The alternating positive/negative fan zones cut by the lens array.
/// 2 n_beams beams (half positive, half negative) separated by
/// 2 n_beams - 1 gaps, laid out symmetrically about the boresight.
struct ZonePattern {
  int n_beams = 7;           ///< count of positive beams (= negative count)
  double beam_width = 0.0;   ///< radians
  double gap_width = 0.0;    ///< radians
  int first_sign = +1;       ///< sign of the lowest-bearing beam

  double span() const {
    return 2 * n_beams * beam_width + (2 * n_beams - 1) * gap_width;
  }
  void validate(double fov) const;
};

struct SensorModel {
  SensorPose pose;
  ZonePattern zones;
  DynamicsConstants dynamics;

  void validate() const {
    pose.validate();
    zones.validate(pose.fov);
    dynamics.validate();
  }
};

/// Bearing relative to the boresight, wrapped to (-pi, pi], and distance.
/// Throws std::invalid_argument("degenerate geometry") for a point exactly
/// at the sensor position.
struct BearingDistance {
  double bearing;
  double distance;
};
BearingDistance bearing_and_distance(const SensorModel& sensor, Vec2 point);

/// +1 in a positive beam, -1 in a negative beam, 0 in gaps, outside the
/// field of view, beyond max_range, or at the sensor itself. Beam intervals
/// are half-open (lower bearing inclusive) so the function is total and
/// deterministic.
int zone_sign(const SensorModel& sensor, Vec2 point);

/// Default sensor per the project configuration: 7 positive beams of 4 deg
/// with 4 deg gaps in a 110 deg fov, 12 m range.
SensorModel default_sensor(Vec2 position, double boresight);

}  // namespace pirdfl
