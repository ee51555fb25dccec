#pragma once
#include <vector>

#include "pirdfl/dynamics.hpp"
#include "pirdfl/rng.hpp"
#include "pirdfl/tensor.hpp"
#include "pirdfl/window.hpp"

namespace pirdfl {

struct PipelineConfig {
  double regularizer_cutoff = 10.0;          ///< Hz, inverse-filter low-pass
  int segments = 5;                          ///< K
  std::vector<double> warp_factors = {0.8, 1.2};
  double reshape_fraction = 0.10;            ///< share of extrema reshaped
  double reshape_w_min = 0.5;
  double reshape_w_max = 1.5;
  double prominence_floor = 0.05;            ///< fraction of series range

  void validate(int window_samples) const;
};

/// Recovers the DHF from sensor voltages: exact inversion of the discretized
/// sensor cascaded with a zero-phase regularizing low-pass, row by row.
Tensor inverse_filter(const Tensor& voltages, const DynamicsConstants& constants,
                      const PipelineConfig& cfg);

/// x = s / sum_i sigma_i with sigma_i the population std of row i.
/// Throws std::runtime_error("silent window") when all rows are constant.
Tensor normalize(const Tensor& dhf);

/// Splits an N x D matrix into K consecutive N x (D/K) blocks.
std::vector<Tensor> segment(const Tensor& x, int k);

struct Extremum {
  int index;
  bool is_max;
};

/// Alternating peaks/troughs with a hysteresis prominence floor (fraction of
/// the series range). Plateaus resolve to their first index.
std::vector<Extremum> detect_extrema(const std::vector<double>& series,
                                     double prominence_floor = 0.05);

/// Rescales the rise into the extremum at t2 by w and re-anchors the fall
/// toward t3 so both endpoints stay fixed; identity when w == 1.
/// t1 < t2 < t3 must be consecutive extremum indices.
void reshape_extrema(std::vector<double>& series, int t1, int t2, int t3,
                     double w);

/// Scene-level series plus label timelines; what the augmentation transforms
/// operate on before re-windowing.
struct SeriesBundle {
  double sample_rate = 60.0;
  long scene_id = 0;
  std::vector<std::vector<double>> dhf;      ///< [sensor][sample]
  std::vector<std::vector<Vec2>> positions;  ///< [person][sample]

  int n_samples() const { return dhf.empty() ? 0 : static_cast<int>(dhf[0].size()); }
};

/// s_DA(t) = s(t / a) by linear interpolation; the position timelines warp by
/// the same factor. a > 1 stretches (slower motion), a < 1 compresses.
SeriesBundle time_warp(const SeriesBundle& bundle, double a);

/// Randomly reshapes a fraction of each sensor's DHF extrema (first and last
/// extremum of a series have no neighbour pair and are skipped).
SeriesBundle reshape_augment(const SeriesBundle& bundle,
                             const PipelineConfig& cfg, Rng& rng);

/// Cuts an augmented bundle into DHF-domain windows (no voltages).
std::vector<SignalWindow> window_bundle(const SeriesBundle& bundle,
                                        double window_seconds,
                                        double hop_seconds, int segments,
                                        const std::string& augment_tag);

}  // namespace pirdfl
