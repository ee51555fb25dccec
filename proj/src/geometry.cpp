#include "pirdfl/geometry.hpp"

#include <stdexcept>

namespace pirdfl {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  // wrap to (-pi, pi]
  a = std::fmod(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  if (a > kPi) a -= 2 * kPi;
  return a;
}
}  // namespace

void SensorPose::validate() const {
  if (!(fov > 0.0) || fov > kPi)
    throw std::invalid_argument("fov must be in (0, pi]");
  if (!(max_range > 0.0))
    throw std::invalid_argument("max_range must be positive");
}

void ZonePattern::validate(double fov) const {
  if (n_beams < 1) throw std::invalid_argument("n_beams must be >= 1");
  if (!(beam_width > 0.0) || gap_width < 0.0)
    throw std::invalid_argument("beam/gap widths invalid");
  if (first_sign != 1 && first_sign != -1)
    throw std::invalid_argument("first_sign must be +1 or -1");
  if (span() > fov + 1e-12)
    throw std::invalid_argument("zone pattern exceeds sensor fov");
}

BearingDistance bearing_and_distance(const SensorModel& sensor, Vec2 point) {
  const Vec2 d = point - sensor.pose.position;
  const double dist = d.norm();
  if (dist == 0.0) throw std::invalid_argument("degenerate geometry");
  const double bearing = wrap_angle(std::atan2(d.y, d.x) - sensor.pose.boresight);
  return {bearing, dist};
}

int zone_sign(const SensorModel& sensor, Vec2 point) {
  const Vec2 d = point - sensor.pose.position;
  const double dist = d.norm();
  if (dist == 0.0 || dist > sensor.pose.max_range) return 0;
  const double bearing = wrap_angle(std::atan2(d.y, d.x) - sensor.pose.boresight);
  if (std::abs(bearing) > sensor.pose.fov / 2) return 0;

  const ZonePattern& z = sensor.zones;
  const double lo = -z.span() / 2;  // beams centered on the boresight
  const double pitch = z.beam_width + z.gap_width;
  const double t = bearing - lo;
  if (t < 0.0 || t >= z.span()) return 0;
  const int cell = static_cast<int>(t / pitch);
  const double within = t - cell * pitch;
  if (within >= z.beam_width) return 0;  // in the gap after beam `cell`
  return (cell % 2 == 0) ? z.first_sign : -z.first_sign;
}

SensorModel default_sensor(Vec2 position, double boresight) {
  SensorModel s;
  s.pose.position = position;
  s.pose.boresight = boresight;
  s.pose.fov = 110.0 * kPi / 180.0;
  s.pose.max_range = 12.0;
  s.zones.n_beams = 7;
  s.zones.beam_width = 4.0 * kPi / 180.0;
  s.zones.gap_width = 4.0 * kPi / 180.0;
  s.zones.first_sign = +1;
  s.validate();
  return s;
}

}  // namespace pirdfl
