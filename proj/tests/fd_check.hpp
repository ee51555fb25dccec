#pragma once
// Central finite-difference gradient checking against the analytic backward
// pass, shared by the unit tests and the acceptance suite. Probes reuse the
// pristine forward cache and recompute only the stages a parameter feeds.

#include <string>
#include <vector>

#include "pirdfl/net.hpp"

namespace fd {

struct Report {
  double max_rel = 0.0;
  std::string worst_param;
  long worst_index = -1;
  long checked = 0;
};

/// `floor` guards the denominator: gradients far below the loss's own scale
/// sit at the finite-difference noise level (eps * |loss| / h) and can only
/// be compared absolutely.
inline double rel_err(double analytic, double numeric, double floor = 1e-6) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

/// Checks every `stride`-th scalar of every parameter tensor. A probe whose
/// h-step difference disagrees is retried at smaller steps before it counts:
/// a ReLU kink inside the probe interval or plain truncation error shrinks
/// away, a wrong analytic gradient does not.
inline Report check_net(pirdfl::PirNet& net, const std::vector<pirdfl::Tensor>& segs,
                        const pirdfl::NetLabel& label, double h, long stride = 1,
                        double tol = 1e-4) {
  using namespace pirdfl;
  net.params().zero_grads();
  NetCache base;
  const double base_loss = net.loss_backward(segs, label, base);
  const double floor = 1e-5 * std::max(1.0, std::abs(base_loss));

  Report report;
  NetCache scratch;
  for (int id = 0; id < net.params().count(); ++id) {
    const NetStage stage = net.stage_of_param(id);
    Tensor& value = net.params().value(id);
    const Tensor& grad = net.params().grad(id);
    for (long j = 0; j < value.size(); j += stride) {
      const double keep = value.v[j];
      auto central = [&](double step) {
        value.v[j] = keep + step;
        const double up = net.loss_resume(segs, label, base, scratch, stage);
        value.v[j] = keep - step;
        const double down = net.loss_resume(segs, label, base, scratch, stage);
        value.v[j] = keep;
        return (up - down) / (2.0 * step);
      };
      double rel = rel_err(grad.v[j], central(h), floor);
      for (double step = h / 4; rel > tol && step > h / 300; step /= 4)
        rel = std::min(rel, rel_err(grad.v[j], central(step), floor));
      ++report.checked;
      if (rel > report.max_rel) {
        report.max_rel = rel;
        report.worst_param = net.params().name(id);
        report.worst_index = j;
      }
    }
  }
  return report;
}

}  // namespace fd
