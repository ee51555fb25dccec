#include "pirdfl/train.hpp"

#include <limits>
#include <memory>
#include <stdexcept>

#include "pirdfl/parallel.hpp"
#include "pirdfl/rng.hpp"

namespace pirdfl {

bool EarlyStopper::feed(double val_loss) {
  ++epoch_;
  if (epoch_ == 1 || val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = epoch_;
  }
  if (epoch_ > 1 && val_loss > prev_)
    ++consecutive_increases_;
  else
    consecutive_increases_ = 0;
  prev_ = val_loss;
  return consecutive_increases_ >= patience_;
}

double mean_loss(const PirNet& net, const std::vector<TrainSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  std::vector<double> losses(samples.size());
  parallel_for(static_cast<long>(samples.size()), [&](long i) {
    NetCache cache;
    net.forward(samples[i].segs, cache);
    losses[i] = net.loss(cache, samples[i].label);
  });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(samples.size());
}

namespace {
constexpr int kChunk = 8;  // fixed reduction width, independent of threads
}

TrainResult train_loop(PirNet& net, const std::vector<TrainSample>& train,
                       const std::vector<TrainSample>& validation,
                       const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || validation.empty())
    throw std::invalid_argument("train and validation sets must be non-empty");
  net.params().reset_optimizer();
  net.label_smoothing = cfg.label_smoothing;

  const int nt = max_threads();
  // replica nets give each worker its own gradient buffers; replica 0 is the
  // live net itself
  std::vector<std::unique_ptr<PirNet>> replicas;
  for (int t = 1; t < nt; ++t)
    replicas.push_back(std::make_unique<PirNet>(net.spec(), 0));

  std::vector<std::vector<Tensor>> slot_grads(
      kChunk, std::vector<Tensor>());
  std::vector<double> slot_loss(kChunk, 0.0);
  std::vector<Tensor> accum = net.params().snapshot_values();
  auto zero_tensors = [](std::vector<Tensor>& ts) {
    for (auto& t : ts) t.fill(0.0);
  };

  // group samples by counting label so every batch sees a balanced class
  // mix; otherwise the per-batch class imbalance feeds a large common-mode
  // gradient into Adam's second moment and drowns the feature signal
  std::vector<std::vector<long>> by_class;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int c = train[i].label.count;
    if (c >= static_cast<int>(by_class.size())) by_class.resize(c + 1);
    by_class[c].push_back(static_cast<long>(i));
  }
  std::vector<long> order(train.size());

  TrainResult result;
  EarlyStopper stopper(cfg.patience);
  std::vector<Tensor> best_snapshot = net.params().snapshot_values();
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = Rng::stream(cfg.rng_seed, 0xe90c + epoch);
    for (auto& cls : by_class)
      for (long i = static_cast<long>(cls.size()) - 1; i > 0; --i)
        std::swap(cls[i], cls[shuffle_rng.uniform_index(i + 1)]);
    // round-robin interleave of the shuffled class streams
    {
      std::size_t filled = 0;
      std::vector<std::size_t> cursor(by_class.size(), 0);
      while (filled < order.size()) {
        for (std::size_t c = 0; c < by_class.size(); ++c) {
          if (cursor[c] < by_class[c].size()) order[filled++] = by_class[c][cursor[c]++];
          if (filled == order.size()) break;
        }
      }
    }

    if (!replicas.empty()) {
      const auto values = net.params().snapshot_values();
      for (auto& r : replicas) r->params().restore_values(values);
    }

    double epoch_loss = 0.0;
    long batch_start = 0;
    while (batch_start < static_cast<long>(order.size())) {
      const long batch_end = std::min<long>(batch_start + cfg.batch_size,
                                            static_cast<long>(order.size()));
      const long batch_n = batch_end - batch_start;
      zero_tensors(accum);

      for (long chunk = batch_start; chunk < batch_end; chunk += kChunk) {
        const long chunk_n = std::min<long>(kChunk, batch_end - chunk);
        parallel_for(chunk_n, [&](long j) {
#ifdef _OPENMP
          const int tid = omp_get_thread_num();
#else
          const int tid = 0;
#endif
          PirNet& worker = tid == 0 ? net : *replicas[tid - 1];
          worker.params().zero_grads();
          NetCache cache;
          const TrainSample& s = train[order[chunk + j]];
          slot_loss[j] = worker.loss_backward(s.segs, s.label, cache);
          slot_grads[j] = worker.params().grads_snapshot();
        });
        for (long j = 0; j < chunk_n; ++j) {
          epoch_loss += slot_loss[j];
          for (std::size_t t = 0; t < accum.size(); ++t) {
            const auto& src = slot_grads[j][t].v;
            auto& dst = accum[t].v;
            for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
          }
        }
      }

      const double scale = 1.0 / static_cast<double>(batch_n);
      net.params().set_grads(accum, scale);
      net.params().check_finite_grads();
      net.params().adam_step(cfg);
      if (!replicas.empty()) {
        const auto values = net.params().snapshot_values();
        for (auto& r : replicas) r->params().restore_values(values);
      }
      batch_start = batch_end;
    }

    const double val_loss = mean_loss(net, validation);
    result.train_losses.push_back(epoch_loss / static_cast<double>(order.size()));
    result.val_losses.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_snapshot = net.params().snapshot_values();
    }
    const bool stop = stopper.feed(val_loss);
    result.stopped_epoch = epoch;
    if (stop) break;
  }

  result.best_epoch = stopper.best_epoch();
  result.best_val_loss = stopper.best_loss();
  net.params().restore_values(best_snapshot);
  return result;
}

}  // namespace pirdfl
