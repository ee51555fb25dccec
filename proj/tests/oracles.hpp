#pragma once
// Independent reference implementations the tests check the library against.
// Everything here is deliberately written as plain scalar loops, separate
// from the library's code paths.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pirdfl/geometry.hpp"
#include "pirdfl/layers.hpp"
#include "pirdfl/params.hpp"
#include "pirdfl/tensor.hpp"

namespace oracle {

// ---- geometry: explicit beam/gap interval table ----

struct Interval {
  double lo, hi;  // bearing relative to boresight
  int sign;
};

inline std::vector<Interval> zone_intervals(const pirdfl::ZonePattern& z) {
  std::vector<Interval> out;
  const double span = 2 * z.n_beams * z.beam_width + (2 * z.n_beams - 1) * z.gap_width;
  double lo = -span / 2;
  for (int i = 0; i < 2 * z.n_beams; ++i) {
    const int sign = (i % 2 == 0) ? z.first_sign : -z.first_sign;
    out.push_back({lo, lo + z.beam_width, sign});
    lo += z.beam_width + z.gap_width;
  }
  return out;
}

inline int zone_sign_by_intervals(const pirdfl::SensorModel& s, pirdfl::Vec2 p) {
  const double dx = p.x - s.pose.position.x, dy = p.y - s.pose.position.y;
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0 || dist > s.pose.max_range) return 0;
  double b = std::atan2(dy, dx) - s.pose.boresight;
  while (b <= -M_PI) b += 2 * M_PI;
  while (b > M_PI) b -= 2 * M_PI;
  if (std::abs(b) > s.pose.fov / 2) return 0;
  for (const auto& iv : zone_intervals(s.zones))
    if (b >= iv.lo && b < iv.hi) return iv.sign;
  return 0;
}

// ---- occlusion: ray vs the blocker's transverse chord ----

// The blocker hides the emitter when the sensor->emitter ray crosses the
// segment of half-length r through the blocker center, perpendicular to the
// sensor->blocker direction, closer than the emitter.
inline bool occludes_by_segment(pirdfl::Vec2 blocker, double radius,
                                pirdfl::Vec2 emitter, pirdfl::Vec2 sensor) {
  const double bx = blocker.x - sensor.x, by = blocker.y - sensor.y;
  const double ex = emitter.x - sensor.x, ey = emitter.y - sensor.y;
  const double db = std::hypot(bx, by), de = std::hypot(ex, ey);
  if (db == 0.0 || de == 0.0 || db >= de) return false;
  // chord endpoints: blocker +- r * perpendicular unit vector
  const double px = -by / db, py = bx / db;
  const pirdfl::Vec2 a{blocker.x + radius * px, blocker.y + radius * py};
  const pirdfl::Vec2 b{blocker.x - radius * px, blocker.y - radius * py};
  // does the ray sensor->emitter (as an infinite ray) cross segment a-b?
  const double cross_a = ex * (a.y - sensor.y) - ey * (a.x - sensor.x);
  const double cross_b = ex * (b.y - sensor.y) - ey * (b.x - sensor.x);
  if ((cross_a > 0) == (cross_b > 0)) return false;  // same side
  // intersection parameter along the chord, then forward along the ray
  const double denom = cross_a - cross_b;
  if (denom == 0.0) return false;
  const double t = cross_a / denom;
  const double ix = a.x + t * (b.x - a.x) - sensor.x;
  const double iy = a.y + t * (b.y - a.y) - sensor.y;
  return ix * ex + iy * ey > 0.0;  // in front of the sensor
}

// ---- dense linear algebra ----

inline void matmul_naive(const double* a, const double* b, double* c, int m,
                         int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
}

// ---- scalar LSTM cell with layer norm, mirroring the library contract ----

struct LstmWeights {
  int in = 0, w = 0;
  std::vector<double> wx, wh, b, gain, bias;  // wx 4w x in, wh 4w x w
  std::vector<double> cgain, cbias;           // cell-state norm, w each
};

inline LstmWeights lstm_weights_from(const pirdfl::ModelParams& p, int wx, int wh,
                                     int b, int gain, int bias, int cgain,
                                     int cbias) {
  LstmWeights lw;
  lw.in = p.value(wx).cols();
  lw.w = p.value(wx).rows() / 4;
  lw.wx = p.value(wx).v;
  lw.wh = p.value(wh).v;
  lw.b = p.value(b).v;
  lw.gain = p.value(gain).v;
  lw.bias = p.value(bias).v;
  lw.cgain = p.value(cgain).v;
  lw.cbias = p.value(cbias).v;
  return lw;
}

inline double srelu(double x) { return x > 0 ? x : 0; }
inline double ssig(double x) { return 1.0 / (1.0 + std::exp(-x)); }
// detector heads bound their logit before the sigmoid
inline double ssig_bounded(double x) {
  return ssig(pirdfl::kLogitBound * std::tanh(x / pirdfl::kLogitBound));
}

// returns h for every scan step; inputs laid out steps x in
inline std::vector<std::vector<double>> lstm_scan_naive(
    const LstmWeights& lw, const std::vector<std::vector<double>>& inputs,
    double var_floor = 1e-6) {
  const int w = lw.w, g4 = 4 * w;
  std::vector<double> h(w, 0.0), c(w, 0.0);
  std::vector<std::vector<double>> out;
  for (const auto& x : inputs) {
    std::vector<double> z(g4, 0.0);
    for (int r = 0; r < g4; ++r) {
      double s = 0.0;
      for (int i = 0; i < lw.in; ++i) s += lw.wx[r * lw.in + i] * x[i];
      for (int i = 0; i < w; ++i) s += lw.wh[r * w + i] * h[i];
      z[r] = s;
    }
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= g4;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= g4;
    const double denom = std::sqrt(var <= var_floor ? var_floor : var);
    std::vector<double> y(g4);
    // both the layer-norm bias and the gate bias apply after normalization
    for (int r = 0; r < g4; ++r)
      y[r] = lw.gain[r] * ((z[r] - mean) / denom) + lw.bias[r] + lw.b[r];
    std::vector<double> nh(w), nc(w);
    for (int j = 0; j < w; ++j) {
      const double ig = ssig(y[j]);
      const double fg = ssig(y[w + j]);
      const double cand = srelu(y[3 * w + j]);
      nc[j] = fg * c[j] + ig * cand;
    }
    double c_mean = 0.0;
    for (double v : nc) c_mean += v;
    c_mean /= w;
    double c_var = 0.0;
    for (double v : nc) c_var += (v - c_mean) * (v - c_mean);
    c_var /= w;
    const double c_denom = std::sqrt(c_var <= var_floor ? var_floor : c_var);
    for (int j = 0; j < w; ++j) {
      const double og = ssig(y[2 * w + j]);
      const double yc = lw.cgain[j] * ((nc[j] - c_mean) / c_denom) + lw.cbias[j];
      nh[j] = og * srelu(yc);
    }
    h = nh;
    c = nc;
    out.push_back(h);
  }
  return out;
}

// bidirectional combination used throughout: out[k] = fwd[k] + bwd_scan[k]
// where the backward scan consumes the reversed sequence
inline std::vector<std::vector<double>> bilstm_naive(
    const LstmWeights& f, const LstmWeights& b,
    const std::vector<std::vector<double>>& inputs) {
  std::vector<std::vector<double>> rev(inputs.rbegin(), inputs.rend());
  const auto hf = lstm_scan_naive(f, inputs);
  const auto hb = lstm_scan_naive(b, rev);
  std::vector<std::vector<double>> out(hf.size());
  for (std::size_t k = 0; k < hf.size(); ++k) {
    out[k].resize(hf[k].size());
    for (std::size_t j = 0; j < hf[k].size(); ++j)
      out[k][j] = hf[k][j] + hb[k][j];
  }
  return out;
}

// ---- brute-force alternating extremum scan (hysteresis re-derivation) ----

struct Ext {
  int index;
  bool is_max;
};

// Re-derives the hysteresis sweep with a fresh O(window) scan for every
// running extremum instead of incremental tracking.
inline std::vector<Ext> extrema_bruteforce(const std::vector<double>& s,
                                           double floor_frac) {
  std::vector<Ext> out;
  const int n = static_cast<int>(s.size());
  if (n < 3) return out;
  double mn = s[0], mx = s[0];
  for (double v : s) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mx == mn) return out;
  const double floor_abs = floor_frac * (mx - mn);

  int dir = 0;
  int max_start = 0, min_start = 0;  // window starts for each tracker
  for (int i = 1; i < n; ++i) {
    int max_i = max_start, min_i = min_start;
    for (int j = max_start; j <= i; ++j)
      if (s[j] > s[max_i]) max_i = j;  // first index of a plateau
    for (int j = min_start; j <= i; ++j)
      if (s[j] < s[min_i]) min_i = j;
    if (dir >= 0 && s[max_i] - s[i] >= floor_abs) {
      if (dir != 0) {
        out.push_back({max_i, true});
        min_start = i;
      }
      dir = -1;
    } else if (dir <= 0 && s[i] - s[min_i] >= floor_abs) {
      if (dir != 0) {
        out.push_back({min_i, false});
        max_start = i;
      }
      dir = +1;
    }
  }
  return out;
}

}  // namespace oracle
