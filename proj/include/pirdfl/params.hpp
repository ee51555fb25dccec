#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pirdfl/tensor.hpp"

namespace pirdfl {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled decay applied to matrix parameters only. Layer norm makes the
  /// network invariant to radial weight growth, so without a pullback the
  /// optimizer's drift inflates pre-activation norms and squeezes the
  /// input-driven signal out of the fixed per-vector variance budget.
  double weight_decay = 0.0;
  /// Detector target smoothing used during training; 0 keeps exact labels.
  double label_smoothing = 0.0;
  int batch_size = 32;
  int max_epochs = 40;
  int patience = 5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Named parameter tensors with mirrored gradient and Adam moment buffers.
class ModelParams {
 public:
  int add(std::string name, std::vector<int> shape);

  int count() const { return static_cast<int>(values_.size()); }
  const std::string& name(int id) const { return names_[id]; }

  /// Index of a parameter by name; throws when absent.
  int find(const std::string& name) const;
  Tensor& value(int id) { return values_[id]; }
  const Tensor& value(int id) const { return values_[id]; }
  Tensor& grad(int id) { return grads_[id]; }
  const Tensor& grad(int id) const { return grads_[id]; }

  long total_size() const;
  void zero_grads();

  /// Accumulates `other`'s gradients into ours (same registration order).
  void add_grads_from(const ModelParams& other, double scale = 1.0);

  std::vector<Tensor> grads_snapshot() const { return grads_; }

  /// Overwrites the gradient buffers with `scale * src`.
  void set_grads(const std::vector<Tensor>& src, double scale);

  /// Throws std::runtime_error naming the first parameter whose gradient is
  /// non-finite.
  void check_finite_grads() const;

  /// Bias-corrected Adam update in place; bumps the step counter.
  void adam_step(const TrainConfig& cfg);

  long step() const { return step_; }
  void reset_optimizer();

  /// Deep copies of the parameter values only (for checkpoints).
  std::vector<Tensor> snapshot_values() const { return values_; }
  void restore_values(const std::vector<Tensor>& snap);

  /// Structured text checkpoint; values at 17 significant digits so the
  /// round trip is bit-exact.
  void save(std::ostream& os, const std::string& model_name) const;
  static void load(std::istream& is, ModelParams& params,
                   std::string* model_name = nullptr);
  void save_file(const std::string& path, const std::string& model_name) const;
  static std::string load_file(const std::string& path, ModelParams& params);

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
  std::vector<Tensor> adam_m_;
  std::vector<Tensor> adam_v_;
  long step_ = 0;
};

}  // namespace pirdfl
