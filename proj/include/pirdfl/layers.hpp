#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "pirdfl/params.hpp"
#include "pirdfl/tensor.hpp"

namespace pirdfl {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }  // 0 at the kink
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Layer-norm divisor floor; keeps constant inputs finite while leaving the
/// unit-variance property exact whenever the variance exceeds it.
constexpr double kLnVarFloor = 1e-6;

/// Sigmoid heads squash their logit through kLogitBound * tanh(z / bound)
/// first, so probabilities stay strictly inside (0, 1) in double precision
/// and a wrongly saturated detector keeps a live gradient.
constexpr double kLogitBound = 4.0;

/// One LSTM cell, gate order input/forget/output/candidate; the concatenated
/// 4W gate pre-activation vector is layer-normalized (learnable gain/bias,
/// biases applied after the statistics), and the cell state is normalized
/// again before the output activation. Gates are sigmoid, candidate and cell
/// output use ReLU.
struct LstmCellIds {
  int wx = -1;        ///< [4W x input_width]
  int wh = -1;        ///< [4W x W]
  int b = -1;         ///< [4W]
  int ln_gain = -1;   ///< [4W]
  int ln_bias = -1;   ///< [4W]
  int lnc_gain = -1;  ///< [W], cell-state norm
  int lnc_bias = -1;  ///< [W]
  int width = 0;
  int input_width = 0;
};

LstmCellIds add_lstm_cell(ModelParams& p, const std::string& prefix,
                          int input_width, int width);

/// Forward activations of one directional scan, kept for backprop.
struct LstmScan {
  int steps = 0, width = 0, input_width = 0;
  std::vector<double> zn;     ///< steps x 4W, normalized pre-activations
  std::vector<double> gates;  ///< steps x 4W, post-activation i,f,o,g
  std::vector<double> yg;     ///< steps x W, candidate pre-ReLU
  std::vector<double> c;      ///< steps x W
  std::vector<double> cn;     ///< steps x W, normalized cell state
  std::vector<double> yc;     ///< steps x W, output pre-ReLU
  std::vector<double> h;      ///< steps x W
  std::vector<double> ln_denom;         ///< per step, gate norm
  std::vector<unsigned char> on_floor;  ///< per step
  std::vector<double> lnc_denom;        ///< per step, cell norm
  std::vector<unsigned char> c_on_floor;

  void resize(int steps_, int width_, int input_width_);
};

/// Runs the cell over `steps` inputs laid out steps x input_width in scan
/// order (the caller feeds the reversed sequence for a backward direction).
/// Zero initial state.
void lstm_forward(const ModelParams& p, const LstmCellIds& ids,
                  const double* input, int steps, LstmScan& scan);

/// BPTT over a recorded scan. `dh` is steps x width (dL/dh per scan step);
/// `dinput` (steps x input_width) is accumulated into when non-null.
void lstm_backward(ModelParams& p, const LstmCellIds& ids, const double* input,
                   const LstmScan& scan, const double* dh, double* dinput);

/// Gated 1-D projection: out = ReLU(x u) o Sigmoid(x v) + b, with x the
/// N x T segment, u and v T x C, b N x C.
struct GatedProjIds {
  int u = -1, v = -1, b = -1;
  int t = 0, c = 0, n = 0;
};

GatedProjIds add_gated_proj(ModelParams& p, const std::string& prefix, int n,
                            int t, int c);

struct GatedProjCache {
  Tensor xu, xv, out;  ///< N x C each
};

void gated_proj_forward(const ModelParams& p, const GatedProjIds& ids,
                        const Tensor& x, GatedProjCache& cache);
void gated_proj_backward(ModelParams& p, const GatedProjIds& ids,
                         const Tensor& x, const GatedProjCache& cache,
                         const Tensor& dout);

enum class Act { kNone, kRelu, kSigmoid };

/// y = act(W x + b), or act(W x) + b when bias_outside (the separation layer
/// adds its bias after the activation). `pre` caches W x (+ b when inside).
void fc_forward(const ModelParams& p, int w_id, int b_id, Act act,
                bool bias_outside, const double* x, double* pre, double* y);
void fc_backward(ModelParams& p, int w_id, int b_id, Act act,
                 bool bias_outside, const double* x, const double* pre,
                 const double* dy, double* dx_acc);

/// Uniform Glorot-style init for every matrix parameter, zero biases, +1 on
/// the LSTM forget-gate bias, unit layer-norm gains.
void init_params(ModelParams& p, std::uint64_t seed);

}  // namespace pirdfl
