#include "pirdfl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pirdfl {

void PipelineConfig::validate(int window_samples) const {
  if (segments < 1 || window_samples % segments != 0)
    throw std::invalid_argument("K must divide the window length");
  for (double a : warp_factors)
    if (!(a > 0.0)) throw std::invalid_argument("warp factors must be > 0");
  if (reshape_fraction < 0.0 || reshape_fraction > 1.0)
    throw std::invalid_argument("reshape fraction must be in [0,1]");
  if (!(reshape_w_min <= reshape_w_max))
    throw std::invalid_argument("reshape w range invalid");
}

Tensor inverse_filter(const Tensor& voltages, const DynamicsConstants& constants,
                      const PipelineConfig& cfg) {
  const int n = voltages.rows(), d = voltages.cols();
  Tensor out({n, d});
  for (int r = 0; r < n; ++r) {
    std::span<const double> row(voltages.data() + static_cast<long>(r) * d, d);
    const auto raw = invert_dynamics(row, constants);
    const auto smooth =
        low_pass_zero_phase(raw, cfg.regularizer_cutoff, constants.sample_rate);
    std::copy(smooth.begin(), smooth.end(), out.data() + static_cast<long>(r) * d);
  }
  return out;
}

Tensor normalize(const Tensor& dhf) {
  const int n = dhf.rows(), d = dhf.cols();
  double sigma_sum = 0.0;
  for (int r = 0; r < n; ++r) {
    double mean = 0.0;
    for (int c = 0; c < d; ++c) mean += dhf(r, c);
    mean /= d;
    double var = 0.0;
    for (int c = 0; c < d; ++c) {
      const double t = dhf(r, c) - mean;
      var += t * t;
    }
    sigma_sum += std::sqrt(var / d);
  }
  if (sigma_sum == 0.0) throw std::runtime_error("silent window");
  Tensor out({n, d});
  for (long i = 0; i < out.size(); ++i) out[i] = dhf[i] / sigma_sum;
  return out;
}

std::vector<Tensor> segment(const Tensor& x, int k) {
  const int n = x.rows(), d = x.cols();
  if (k < 1 || d % k != 0)
    throw std::invalid_argument("K must divide the window length");
  const int t = d / k;
  std::vector<Tensor> out;
  out.reserve(k);
  for (int s = 0; s < k; ++s) {
    Tensor seg({n, t});
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < t; ++c) seg(r, c) = x(r, s * t + c);
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<Extremum> detect_extrema(const std::vector<double>& series,
                                     double prominence_floor) {
  std::vector<Extremum> out;
  if (series.size() < 3) return out;
  for (double v : series)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite series");
  const auto [mn_it, mx_it] = std::minmax_element(series.begin(), series.end());
  const double range = *mx_it - *mn_it;
  if (range == 0.0) return out;
  const double floor_abs = prominence_floor * range;

  // hysteresis sweep: confirm a running max/min once the series has moved
  // away from it by at least floor_abs; strict comparisons keep the first
  // index of a plateau. The first decisive move only sets the direction, so
  // the series boundary never counts as an extremum and monotone series
  // yield none.
  double run_max = series[0], run_min = series[0];
  int max_idx = 0, min_idx = 0;
  int dir = 0;  // +1 rising (next confirm is a max), -1 falling, 0 unknown
  for (int i = 1; i < static_cast<int>(series.size()); ++i) {
    const double v = series[i];
    if (v > run_max) { run_max = v; max_idx = i; }
    if (v < run_min) { run_min = v; min_idx = i; }
    if (dir >= 0 && run_max - v >= floor_abs) {
      if (dir != 0) {
        out.push_back({max_idx, true});
        run_min = v;
        min_idx = i;
      }
      dir = -1;
    } else if (dir <= 0 && v - run_min >= floor_abs) {
      if (dir != 0) {
        out.push_back({min_idx, false});
        run_max = v;
        max_idx = i;
      }
      dir = +1;
    }
  }
  return out;
}

void reshape_extrema(std::vector<double>& series, int t1, int t2, int t3,
                     double w) {
  if (!(t1 < t2 && t2 < t3) || t1 < 0 || t3 >= static_cast<int>(series.size()))
    throw std::invalid_argument("non-monotone extremum triple");
  if (w == 1.0) return;  // identity, bit-exact
  const double s1 = series[t1];
  const double s2_old = series[t2];
  const double s2_new = w * (s2_old - s1) + s1;
  for (int t = t1; t <= t2; ++t) series[t] = w * (series[t] - s1) + s1;
  // carry the t2 offset toward t3, fading linearly so s(t3) is untouched
  const double delta = s2_new - s2_old;
  for (int t = t2 + 1; t < t3; ++t)
    series[t] += delta * static_cast<double>(t3 - t) / (t3 - t2);
}

namespace {

std::vector<double> warp_series(const std::vector<double>& s, double a) {
  const int n = static_cast<int>(s.size());
  const int m = static_cast<int>(std::floor((n - 1) * a)) + 1;
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) {
    const double t = i / a;
    const int lo = static_cast<int>(t);
    if (lo >= n - 1) {
      out[i] = s[n - 1];
    } else {
      const double f = t - lo;
      out[i] = s[lo] + f * (s[lo + 1] - s[lo]);
    }
  }
  return out;
}

}  // namespace

SeriesBundle time_warp(const SeriesBundle& bundle, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("warp factor must be > 0");
  SeriesBundle out;
  out.sample_rate = bundle.sample_rate;
  out.scene_id = bundle.scene_id;
  for (const auto& s : bundle.dhf) out.dhf.push_back(warp_series(s, a));
  for (const auto& pos : bundle.positions) {
    std::vector<double> xs(pos.size()), ys(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) { xs[i] = pos[i].x; ys[i] = pos[i].y; }
    const auto wx = warp_series(xs, a);
    const auto wy = warp_series(ys, a);
    std::vector<Vec2> wp(wx.size());
    for (std::size_t i = 0; i < wx.size(); ++i) wp[i] = {wx[i], wy[i]};
    out.positions.push_back(std::move(wp));
  }
  return out;
}

SeriesBundle reshape_augment(const SeriesBundle& bundle,
                             const PipelineConfig& cfg, Rng& rng) {
  SeriesBundle out = bundle;
  for (auto& series : out.dhf) {
    const auto extrema = detect_extrema(series, cfg.prominence_floor);
    if (extrema.size() < 3) continue;
    // interior extrema only: the first and last have no neighbour pair
    const int eligible = static_cast<int>(extrema.size()) - 2;
    int n_pick = static_cast<int>(std::lround(cfg.reshape_fraction * eligible));
    n_pick = std::min(n_pick, eligible);
    std::vector<int> order(eligible);
    for (int i = 0; i < eligible; ++i) order[i] = i + 1;
    for (int i = eligible - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    order.resize(n_pick);
    std::sort(order.begin(), order.end());
    for (int e : order) {
      const double w = rng.uniform(cfg.reshape_w_min, cfg.reshape_w_max);
      reshape_extrema(series, extrema[e - 1].index, extrema[e].index,
                      extrema[e + 1].index, w);
    }
  }
  return out;
}

std::vector<SignalWindow> window_bundle(const SeriesBundle& bundle,
                                        double window_seconds,
                                        double hop_seconds, int segments,
                                        const std::string& augment_tag) {
  SceneTrace trace;
  trace.sample_rate = bundle.sample_rate;
  trace.n_samples = bundle.n_samples();
  trace.voltage = bundle.dhf;  // windowed below, then moved into dhf
  trace.dhf = bundle.dhf;
  trace.positions = bundle.positions;
  auto wins = window_dataset(trace, bundle.scene_id, window_seconds,
                             hop_seconds, segments);
  for (auto& w : wins) {
    w.dhf = std::move(w.voltages);
    w.voltages.clear();
    w.augment = augment_tag;
  }
  return wins;
}

}  // namespace pirdfl
