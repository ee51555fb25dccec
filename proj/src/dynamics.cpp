#include "pirdfl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pirdfl {

void DynamicsConstants::validate() const {
  if (!(gain > 0.0) || !(b_coeff > 0.0) || !(c_coeff > 0.0))
    throw std::invalid_argument("dynamics constants must be positive");
  if (!(sample_rate > 0.0))
    throw std::invalid_argument("sample_rate must be positive");
}

Biquad bilinear_biquad(const DynamicsConstants& c) {
  c.validate();
  const double w = 2.0 * c.sample_rate;  // bilinear s = w (1 - z^-1)/(1 + z^-1)
  const double bw2 = c.b_coeff * w * w;
  const double cw = c.c_coeff * w;
  const double a0 = bw2 + cw + 1.0;
  Biquad q;
  q.b0 = c.gain * w / a0;
  q.b1 = 0.0;
  q.b2 = -c.gain * w / a0;
  q.a1 = (2.0 - 2.0 * bw2) / a0;
  q.a2 = (bw2 - cw + 1.0) / a0;
  return q;
}

std::vector<double> sensor_dynamics(std::span<const double> dhf,
                                    const DynamicsConstants& c) {
  for (double v : dhf)
    if (!std::isfinite(v))
      throw std::invalid_argument("sensor_dynamics: non-finite input");
  const Biquad q = bilinear_biquad(c);
  std::vector<double> out(dhf.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t n = 0; n < dhf.size(); ++n) {
    const double x0 = dhf[n];
    const double y0 = q.b0 * x0 + q.b1 * x1 + q.b2 * x2 - q.a1 * y1 - q.a2 * y2;
    out[n] = y0;
    x2 = x1;
    x1 = x0;
    y2 = y1;
    y1 = y0;
  }
  return out;
}

std::vector<double> invert_dynamics(std::span<const double> voltage,
                                    const DynamicsConstants& c) {
  for (double v : voltage)
    if (!std::isfinite(v))
      throw std::invalid_argument("invert_dynamics: non-finite input");
  const Biquad q = bilinear_biquad(c);
  std::vector<double> out(voltage.size());
  double y1 = 0, y2 = 0, x1 = 0, x2 = 0;  // y: voltage, x: recovered dhf
  for (std::size_t n = 0; n < voltage.size(); ++n) {
    const double y0 = voltage[n];
    const double x0 = (y0 + q.a1 * y1 + q.a2 * y2 - q.b1 * x1 - q.b2 * x2) / q.b0;
    out[n] = x0;
    y2 = y1;
    y1 = y0;
    x2 = x1;
    x1 = x0;
  }
  return out;
}

namespace {

void low_pass_inplace(std::vector<double>& x, double cutoff_hz,
                      double sample_rate) {
  // bilinear first-order low-pass: y[n] = b (x[n] + x[n-1]) + a y[n-1]
  const double g = std::tan(M_PI * cutoff_hz / sample_rate);
  const double b = g / (1.0 + g);
  const double a = (1.0 - g) / (1.0 + g);
  double xp = 0, yp = 0;
  for (double& v : x) {
    const double y = b * (v + xp) + a * yp;
    xp = v;
    yp = y;
    v = y;
  }
}

}  // namespace

std::vector<double> low_pass_forward(std::span<const double> x,
                                     double cutoff_hz, double sample_rate) {
  std::vector<double> out(x.begin(), x.end());
  low_pass_inplace(out, cutoff_hz, sample_rate);
  return out;
}

std::vector<double> low_pass_zero_phase(std::span<const double> x,
                                        double cutoff_hz, double sample_rate) {
  std::vector<double> out(x.begin(), x.end());
  low_pass_inplace(out, cutoff_hz, sample_rate);
  std::reverse(out.begin(), out.end());
  low_pass_inplace(out, cutoff_hz, sample_rate);
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace pirdfl
