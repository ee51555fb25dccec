#pragma once
#include <vector>

#include "pirdfl/net.hpp"

namespace pirdfl {

struct TrainSample {
  std::vector<Tensor> segs;
  NetLabel label;
};

/// Stops once the validation loss has strictly increased for `patience`
/// consecutive epochs; tracks the lowest-loss epoch for checkpointing.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  /// Returns true when training should stop after this epoch.
  bool feed(double val_loss);

  int best_epoch() const { return best_epoch_; }  ///< 1-based
  double best_loss() const { return best_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int consecutive_increases_ = 0;
  int best_epoch_ = 0;
  double best_ = 0.0;
  double prev_ = 0.0;
};

struct TrainResult {
  int best_epoch = 0;
  int stopped_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<double> train_losses;
  std::vector<double> val_losses;
};

/// Mini-batch Adam with per-epoch seeded shuffles and early stopping. Batch
/// gradients are reduced in a fixed sample order (slot buffers), so results
/// are bit-identical for any PIRDFL_THREADS. The net is left at the
/// lowest-validation checkpoint.
TrainResult train_loop(PirNet& net, const std::vector<TrainSample>& train,
                       const std::vector<TrainSample>& validation,
                       const TrainConfig& cfg);

/// Mean loss over a sample set (forward only).
double mean_loss(const PirNet& net, const std::vector<TrainSample>& samples);

}  // namespace pirdfl
