#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "pirdfl/geometry.hpp"
#include "pirdfl/rng.hpp"

using namespace pirdfl;

namespace {
SensorModel sensor_at_origin() { return default_sensor({0, 0}, 0.0); }
}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("bearing_and_distance basic directions") {
  const SensorModel s = sensor_at_origin();
  auto bd = bearing_and_distance(s, {1, 0});
  CHECK(bd.bearing == doctest::Approx(0.0));
  CHECK(bd.distance == doctest::Approx(1.0));
  bd = bearing_and_distance(s, {0, 2});
  CHECK(bd.bearing == doctest::Approx(M_PI / 2));
  CHECK(bd.distance == doctest::Approx(2.0));
}

TEST_CASE("bearing_and_distance rejects the sensor's own position") {
  const SensorModel s = sensor_at_origin();
  CHECK_THROWS_WITH_AS(bearing_and_distance(s, {0, 0}), "degenerate geometry",
                       std::invalid_argument);
}

TEST_CASE("bearing_and_distance round-trips random points") {
  SensorModel s = default_sensor({2.5, -1.0}, 0.7);
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    if (distance(p, s.pose.position) < 1e-9) continue;
    const auto bd = bearing_and_distance(s, p);
    CHECK(bd.bearing > -M_PI);
    CHECK(bd.bearing <= M_PI);
    const double world = bd.bearing + s.pose.boresight;
    const Vec2 back{s.pose.position.x + bd.distance * std::cos(world),
                    s.pose.position.y + bd.distance * std::sin(world)};
    CHECK(distance(back, p) < 1e-12);
  }
}

TEST_CASE("zone_sign hits the first positive beam center") {
  const SensorModel s = sensor_at_origin();
  const double span = s.zones.span();
  const double center = -span / 2 + s.zones.beam_width / 2;
  const Vec2 p{3.0 * std::cos(center), 3.0 * std::sin(center)};
  CHECK(zone_sign(s, p) == +1);
}

TEST_CASE("zone_sign is zero behind the sensor") {
  const SensorModel s = sensor_at_origin();
  CHECK(zone_sign(s, {-3.0, 0.0}) == 0);
}

TEST_CASE("zone_sign is zero beyond max range and at the sensor") {
  const SensorModel s = sensor_at_origin();
  CHECK(zone_sign(s, {s.pose.max_range + 0.5, 0.0}) == 0);
  CHECK(zone_sign(s, {0.0, 0.0}) == 0);
}

TEST_CASE("bearing sweep matches the interval oracle") {
  const SensorModel s = default_sensor({1.0, 2.0}, 0.35);
  for (int i = 0; i < 360; ++i) {
    const double a = -M_PI + (2 * M_PI) * i / 360.0 + 1e-4;
    const Vec2 p{s.pose.position.x + 3.0 * std::cos(a),
                 s.pose.position.y + 3.0 * std::sin(a)};
    CHECK(zone_sign(s, p) == oracle::zone_sign_by_intervals(s, p));
  }
}

TEST_CASE("in-range sweep alternates signs 2n-1 times with gaps between") {
  const SensorModel s = sensor_at_origin();
  // fine sweep across the zone span at fixed radius
  int alternations = 0;
  int last_nonzero = 0;
  bool saw_gap_since_last = true;
  const int steps = 20000;
  const double span = s.zones.span();
  for (int i = 0; i <= steps; ++i) {
    const double a = -span / 2 - 0.01 + (span + 0.02) * i / steps;
    const int sign = zone_sign(s, {3.0 * std::cos(a), 3.0 * std::sin(a)});
    if (sign == 0) {
      saw_gap_since_last = true;
      continue;
    }
    if (last_nonzero != 0 && sign != last_nonzero) {
      ++alternations;
      CHECK(saw_gap_since_last);  // a gap separates adjacent beams
    }
    last_nonzero = sign;
    saw_gap_since_last = false;
  }
  CHECK(alternations == 2 * s.zones.n_beams - 1);
}

TEST_CASE("zone_sign is invariant under rigid transforms") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    SensorModel s = default_sensor({rng.uniform(-3, 3), rng.uniform(-3, 3)},
                                   rng.uniform(-M_PI, M_PI));
    const Vec2 p{rng.uniform(-8, 8), rng.uniform(-8, 8)};
    const int base = zone_sign(s, p);

    const double rot = rng.uniform(-M_PI, M_PI);
    const Vec2 shift{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    auto xf = [&](Vec2 v) {
      return Vec2{v.x * std::cos(rot) - v.y * std::sin(rot) + shift.x,
                  v.x * std::sin(rot) + v.y * std::cos(rot) + shift.y};
    };
    SensorModel moved = s;
    moved.pose.position = xf(s.pose.position);
    moved.pose.boresight = s.pose.boresight + rot;
    CHECK(zone_sign(moved, xf(p)) == base);
  }
}

TEST_CASE("pose and pattern validation") {
  SensorModel s = sensor_at_origin();
  s.pose.fov = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = sensor_at_origin();
  s.pose.max_range = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = sensor_at_origin();
  s.zones.beam_width = 1.0;  // pattern no longer fits the fov
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = sensor_at_origin();
  s.zones.n_beams = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_SUITE_END();
