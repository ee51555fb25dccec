#pragma once
#include <span>
#include <vector>

namespace pirdfl {

/// Constants of the sensor's second-order transfer function
/// V(s) = A s / (B s^2 + C s + 1), plus the sampling rate used to
/// discretize it.
struct DynamicsConstants {
  double gain = 1.0;       ///< A, output units per DHF unit
  double b_coeff = 0.01;   ///< B, s^2
  double c_coeff = 0.15;   ///< C, s
  double sample_rate = 60.0;

  void validate() const;
};

/// Discrete biquad b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2,
/// obtained from DynamicsConstants by the bilinear transform. The transform
/// keeps the zero at DC, so b0 + b1 + b2 == 0 exactly up to rounding.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad bilinear_biquad(const DynamicsConstants& c);

/// Runs the discretized sensor over a DHF series, zero initial state.
/// Throws std::invalid_argument on non-finite input.
std::vector<double> sensor_dynamics(std::span<const double> dhf,
                                    const DynamicsConstants& c);

/// Exact sample-by-sample inversion of the discretized sensor (zero initial
/// state both ways). Marginally stable poles make this noise-amplifying on
/// its own; callers regularize with low_pass_zero_phase.
std::vector<double> invert_dynamics(std::span<const double> voltage,
                                    const DynamicsConstants& c);

/// First-order low-pass (bilinear, cutoff in Hz) applied forward then
/// backward so the pass band keeps zero phase.
std::vector<double> low_pass_zero_phase(std::span<const double> x,
                                        double cutoff_hz, double sample_rate);

std::vector<double> low_pass_forward(std::span<const double> x,
                                     double cutoff_hz, double sample_rate);

}  // namespace pirdfl
