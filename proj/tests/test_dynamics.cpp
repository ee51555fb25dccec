#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pirdfl/dynamics.hpp"
#include "pirdfl/rng.hpp"

using namespace pirdfl;

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("bilinear transform keeps the zero at DC") {
  const DynamicsConstants c;
  const Biquad q = bilinear_biquad(c);
  CHECK(q.b0 + q.b1 + q.b2 == 0.0);  // exact: b1 = 0, b2 = -b0
}

TEST_CASE("constant input decays to zero") {
  const DynamicsConstants c;
  const std::vector<double> u(600, 1.0);  // 10 s
  const auto y = sensor_dynamics(u, c);
  double tail = 0.0;
  for (std::size_t i = y.size() - 60; i < y.size(); ++i)
    tail = std::max(tail, std::abs(y[i]));
  CHECK(tail < 1e-6);
}

TEST_CASE("resonance gain is A/C within 2 percent") {
  DynamicsConstants c;
  c.gain = 1.0;
  c.b_coeff = 0.01;
  c.c_coeff = 0.15;
  const double omega = 1.0 / std::sqrt(c.b_coeff);
  const int n = 1200;  // 20 s: transients are long gone
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = std::sin(omega * i / c.sample_rate);
  const auto y = sensor_dynamics(u, c);
  // least-squares projection of the steady-state tail onto sin/cos
  double ss = 0, sc = 0, cs = 0, cc = 0, ys = 0, yc = 0;
  for (int i = n / 2; i < n; ++i) {
    const double t = i / c.sample_rate;
    const double s = std::sin(omega * t), co = std::cos(omega * t);
    ss += s * s;
    sc += s * co;
    cc += co * co;
    ys += y[i] * s;
    yc += y[i] * co;
  }
  cs = sc;
  const double det = ss * cc - sc * cs;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * cs) / det;
  const double amp = std::hypot(a, b);
  CHECK(amp == doctest::Approx(c.gain / c.c_coeff).epsilon(0.02));
}

TEST_CASE("matches direct convolution with the impulse response") {
  const DynamicsConstants c;
  std::vector<double> delta(150, 0.0);
  delta[0] = 1.0;
  const auto h = sensor_dynamics(delta, c);

  Rng rng(3);
  std::vector<double> x(150);
  for (double& v : x) v = rng.gaussian();
  const auto y = sensor_dynamics(x, c);
  for (int nidx = 0; nidx < 150; ++nidx) {
    double conv = 0.0;
    for (int k = 0; k <= nidx; ++k) conv += h[k] * x[nidx - k];
    CHECK(std::abs(conv - y[nidx]) < 1e-9);
  }
}

TEST_CASE("linear and time-invariant") {
  const DynamicsConstants c;
  Rng rng(5);
  std::vector<double> x(200), y(200);
  for (int i = 0; i < 200; ++i) {
    x[i] = rng.gaussian();
    y[i] = rng.gaussian();
  }
  const double a = 1.7, b = -0.4;
  std::vector<double> mix(200);
  for (int i = 0; i < 200; ++i) mix[i] = a * x[i] + b * y[i];
  const auto fx = sensor_dynamics(x, c);
  const auto fy = sensor_dynamics(y, c);
  const auto fmix = sensor_dynamics(mix, c);
  for (int i = 0; i < 200; ++i)
    CHECK(std::abs(fmix[i] - (a * fx[i] + b * fy[i])) < 1e-10);
}

TEST_CASE("non-finite input is rejected") {
  const DynamicsConstants c;
  std::vector<double> x(10, 0.0);
  x[4] = std::nan("");
  CHECK_THROWS_AS(sensor_dynamics(x, c), std::invalid_argument);
  CHECK_THROWS_AS(invert_dynamics(x, c), std::invalid_argument);
}

TEST_CASE("exact inversion round-trips from zero state") {
  const DynamicsConstants c;
  Rng rng(11);
  std::vector<double> x(300);
  for (double& v : x) v = rng.gaussian();
  const auto y = sensor_dynamics(x, c);
  const auto back = invert_dynamics(y, c);
  for (int i = 0; i < 300; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-9);
}

TEST_CASE("dynamics constants validation") {
  DynamicsConstants c;
  c.b_coeff = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = DynamicsConstants{};
  c.gain = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_SUITE_END();
