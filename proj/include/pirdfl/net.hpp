#pragma once
#include <array>
#include <string>
#include <vector>

#include "pirdfl/layers.hpp"
#include "pirdfl/pipeline.hpp"
#include "pirdfl/tensor.hpp"

namespace pirdfl {

/// Shapes of one two-stage network. Stage 1 separates the multi-sensor input
/// into per-person components, stage 2 runs a shared single-person network
/// over each component.
struct NetSpec {
  enum class Head { kDetector, kLocator };

  int n_sensors = 4;
  int seg_len = 30;       ///< T
  int segments = 5;       ///< K
  int conv_channels = 8;  ///< C
  int s1_width = 64;
  int n_components = 3;   ///< P (detector) or M (locator)
  int comp_width = 4;     ///< separation output width per component
  int s2_width = 16;
  Head head = Head::kDetector;

  enum class Preset { kDesk, kPaper };

  static NetSpec counting(int n_sensors, Preset preset = Preset::kDesk);
  static NetSpec localization(int n_sensors, int m,
                              Preset preset = Preset::kDesk);

  int flat_width() const { return n_sensors * conv_channels; }
  int fc1_width() const { return n_components * comp_width; }
  void validate() const;
};

/// Recompute granularity for finite-difference probes: perturbing a
/// parameter of stage `s` only dirties `s` and what it feeds.
enum class NetStage : int {
  kGatedProj = 0,
  kS1Input,
  kS1L1Fwd,
  kS1L1Bwd,
  kS1L2Fwd,
  kS1L2Bwd,
  kS1Fc,
  kS2Input,
  kS2L1Fwd,
  kS2L1Bwd,
  kS2L2Fwd,
  kS2L2Bwd,
  kHead,
};

struct NetCache {
  std::vector<GatedProjCache> gp;           ///< per segment
  std::vector<double> s1_in, s1_in_rev;     ///< K x s1_width
  LstmScan l1f, l1b, l2f, l2b;
  std::vector<double> l1_sum, l1_sum_rev;   ///< K x s1_width
  std::vector<double> l2_sum;               ///< K x s1_width
  std::vector<double> fc1_pre, comps;       ///< K x (P * comp_width)

  struct CompCache {
    std::vector<double> s2_in, s2_in_rev;    ///< K x s2_width
    LstmScan l1f, l1b, l2f, l2b;
    std::vector<double> l1_sum, l1_sum_rev;  ///< K x s2_width
    std::vector<double> l2_sum;              ///< K x s2_width
    std::vector<double> concat;              ///< detector head input
    double logit_pre = 0.0;
    std::vector<double> head_pre;            ///< locator: K x 2
  };
  std::vector<CompCache> comp;

  std::vector<double> probs;               ///< detector output, size P
  std::vector<std::vector<Vec2>> positions;  ///< locator output [M][K]
};

/// Training target for either head.
struct NetLabel {
  int count = 0;
  std::vector<std::vector<Vec2>> positions;  ///< [M][K]
};

/// Counting PIT: minimum of sum_p |c_hat - c| over all binary labelings with
/// the given population count; the chosen labeling routes the gradient.
/// `smoothing` relaxes the targets to [s, 1-s] during training so the
/// optimum stays interior and the sigmoid never rails out.
struct CountingPit {
  double loss = 0.0;
  std::vector<int> labeling;
};
CountingPit counting_loss(const std::vector<double>& probs, int true_count,
                          double smoothing = 0.0);

/// Localization PIT: minimum over all M! person assignments of the summed
/// per-segment euclidean distances; ties keep the first permutation in
/// lexicographic order.
struct LocalizationPit {
  double loss = 0.0;
  std::vector<int> perm;  ///< prediction m is matched to label perm[m]
};
LocalizationPit localization_loss(
    const std::vector<std::vector<Vec2>>& predictions,
    const std::vector<std::vector<Vec2>>& labels);

/// Components above 0.5 count as persons; ties at exactly 0.5 do not.
int predict_count(const std::vector<double>& probs);

class PirNet {
 public:
  PirNet(const NetSpec& spec, std::uint64_t init_seed);

  const NetSpec& spec() const { return spec_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

  /// Detector training target smoothing; 0 trains on exact 0/1 labels.
  double label_smoothing = 0.0;

  /// Full forward over K segments (each n_sensors x seg_len).
  void forward(const std::vector<Tensor>& segs, NetCache& cache) const;

  /// Stage 2 plus head from externally supplied separation components.
  void run_stage2(const std::vector<double>& comps, NetCache& cache) const;

  /// Loss of a forward-filled cache against the label.
  double loss(const NetCache& cache, const NetLabel& label) const;

  /// Minimal recomputation given that only parameters of `dirty` changed:
  /// untouched activations are read from `base`, recomputed ones go to
  /// `scratch`. Returns the loss.
  double loss_resume(const std::vector<Tensor>& segs, const NetLabel& label,
                     const NetCache& base, NetCache& scratch,
                     NetStage dirty) const;

  /// PIT loss plus gradient accumulation into params().grads.
  double loss_backward(const std::vector<Tensor>& segs, const NetLabel& label,
                       NetCache& cache);

  NetStage stage_of_param(int param_id) const { return param_stage_[param_id]; }

 private:
  void forward_impl(const std::vector<Tensor>& segs, const NetCache* base,
                    NetCache& out, NetStage dirty) const;
  void head_forward(NetCache& cache) const;

  NetSpec spec_;
  ModelParams params_;
  std::vector<NetStage> param_stage_;

  GatedProjIds gp_;
  int s1_input_ = -1;  ///< I1
  LstmCellIds s1_l1f_, s1_l1b_, s1_l2f_, s1_l2b_;
  int fc1_w_ = -1, fc1_b_ = -1;
  int s2_input_ = -1;  ///< I2
  LstmCellIds s2_l1f_, s2_l1b_, s2_l2f_, s2_l2b_;
  int head_w_ = -1, head_b_ = -1;
};

/// Inference input with the labels stripped off.
struct WindowSignal {
  int n_sensors = 0;
  int n_samples = 0;
  std::vector<double> voltages;
  std::vector<double> dhf;  ///< optional precomputed DHF estimate

  static WindowSignal strip(const SignalWindow& w) {
    return {w.n_sensors, w.n_samples, w.voltages, w.dhf};
  }
};

struct InferencePolicy {
  const PirNet* counter = nullptr;
  std::array<const PirNet*, kMaxPersons> localizers{};  ///< index M-1
  DynamicsConstants dynamics;
  PipelineConfig pipeline;
  bool preprocess = true;
  double raw_scale = 1.0;  ///< fixed input scale used when preprocess is off
};

struct InferenceResult {
  int count = 0;
  bool silent = false;
  std::vector<double> probs;
  std::vector<std::vector<Vec2>> positions;  ///< [count][K]
};

/// Counting selects which localization net runs; silent windows (all-constant
/// rows) report count 0 with the silent flag.
InferenceResult infer(const InferencePolicy& policy, const WindowSignal& win);

/// The preprocessing used both for training features and inference.
std::vector<Tensor> window_features(const InferencePolicy& policy,
                                    const WindowSignal& win, bool* silent);

}  // namespace pirdfl
