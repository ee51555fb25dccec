#include "pirdfl/net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pirdfl/kernels.hpp"

namespace pirdfl {

NetSpec NetSpec::counting(int n_sensors, Preset) {
  NetSpec s;
  s.n_sensors = n_sensors;
  s.seg_len = 30;
  s.segments = 5;
  s.conv_channels = 8;
  s.s1_width = 64;
  s.n_components = 3;
  s.comp_width = 4;
  s.s2_width = 16;
  s.head = Head::kDetector;
  return s;
}

NetSpec NetSpec::localization(int n_sensors, int m, Preset preset) {
  if (m < 1 || m > kMaxPersons)
    throw std::invalid_argument("localization nets exist for M = 1..3");
  NetSpec s;
  s.n_sensors = n_sensors;
  s.seg_len = 30;
  s.segments = 5;
  s.conv_channels = 32;
  s.s1_width = preset == Preset::kPaper ? 512 : 48;
  s.n_components = m;
  s.comp_width = 32;
  s.s2_width = preset == Preset::kPaper ? 64 : 32;
  s.head = Head::kLocator;
  return s;
}

void NetSpec::validate() const {
  if (n_sensors < 1 || seg_len < 1 || segments < 1 || conv_channels < 1 ||
      s1_width < 1 || n_components < 1 || comp_width < 1 || s2_width < 1)
    throw std::invalid_argument("invalid network spec");
}

PirNet::PirNet(const NetSpec& spec, std::uint64_t init_seed) : spec_(spec) {
  spec_.validate();
  auto tag = [&](int, NetStage st) { param_stage_.resize(params_.count(), st); };

  int mark = 0;
  gp_ = add_gated_proj(params_, "stage1.gp", spec_.n_sensors, spec_.seg_len,
                       spec_.conv_channels);
  tag(mark, NetStage::kGatedProj);

  mark = params_.count();
  s1_input_ = params_.add("stage1.input", {spec_.s1_width, spec_.flat_width()});
  tag(mark, NetStage::kS1Input);

  mark = params_.count();
  s1_l1f_ = add_lstm_cell(params_, "stage1.l1f", spec_.s1_width, spec_.s1_width);
  tag(mark, NetStage::kS1L1Fwd);
  mark = params_.count();
  s1_l1b_ = add_lstm_cell(params_, "stage1.l1b", spec_.s1_width, spec_.s1_width);
  tag(mark, NetStage::kS1L1Bwd);
  mark = params_.count();
  s1_l2f_ = add_lstm_cell(params_, "stage1.l2f", spec_.s1_width, spec_.s1_width);
  tag(mark, NetStage::kS1L2Fwd);
  mark = params_.count();
  s1_l2b_ = add_lstm_cell(params_, "stage1.l2b", spec_.s1_width, spec_.s1_width);
  tag(mark, NetStage::kS1L2Bwd);

  mark = params_.count();
  fc1_w_ = params_.add("stage1.fc.w", {spec_.fc1_width(), spec_.s1_width});
  fc1_b_ = params_.add("stage1.fc.b", {spec_.fc1_width()});
  tag(mark, NetStage::kS1Fc);

  mark = params_.count();
  s2_input_ = params_.add("stage2.input", {spec_.s2_width, spec_.comp_width});
  tag(mark, NetStage::kS2Input);

  mark = params_.count();
  s2_l1f_ = add_lstm_cell(params_, "stage2.l1f", spec_.s2_width, spec_.s2_width);
  tag(mark, NetStage::kS2L1Fwd);
  mark = params_.count();
  s2_l1b_ = add_lstm_cell(params_, "stage2.l1b", spec_.s2_width, spec_.s2_width);
  tag(mark, NetStage::kS2L1Bwd);
  mark = params_.count();
  s2_l2f_ = add_lstm_cell(params_, "stage2.l2f", spec_.s2_width, spec_.s2_width);
  tag(mark, NetStage::kS2L2Fwd);
  mark = params_.count();
  s2_l2b_ = add_lstm_cell(params_, "stage2.l2b", spec_.s2_width, spec_.s2_width);
  tag(mark, NetStage::kS2L2Bwd);

  mark = params_.count();
  if (spec_.head == NetSpec::Head::kDetector) {
    head_w_ = params_.add("head.w", {1, spec_.segments * spec_.s2_width});
    head_b_ = params_.add("head.b", {1});
  } else {
    head_w_ = params_.add("head.w", {2, spec_.s2_width});
    head_b_ = params_.add("head.b", {2});
  }
  tag(mark, NetStage::kHead);

  init_params(params_, init_seed);
}

namespace {

void reverse_steps(const std::vector<double>& fwd, std::vector<double>& rev,
                   int steps, int width) {
  rev.resize(fwd.size());
  for (int k = 0; k < steps; ++k)
    std::copy(fwd.begin() + static_cast<std::size_t>(k) * width,
              fwd.begin() + static_cast<std::size_t>(k + 1) * width,
              rev.begin() + static_cast<std::size_t>(steps - 1 - k) * width);
}

void sum_scans(const LstmScan& f, const LstmScan& b, std::vector<double>& out) {
  out.resize(f.h.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.h[i] + b.h[i];
}

}  // namespace

void PirNet::forward_impl(const std::vector<Tensor>& segs, const NetCache* base,
                          NetCache& out, NetStage dirty) const {
  const int k_steps = spec_.segments;
  const int s1w = spec_.s1_width;
  const int s2w = spec_.s2_width;
  const int fcw = spec_.fc1_width();
  const int d = static_cast<int>(dirty);
  if (static_cast<int>(segs.size()) != k_steps)
    throw std::invalid_argument("expected K segments");

  const bool redo_gp = d <= 0;
  const bool redo_s1in = d <= 1;
  const bool redo_l1f = d <= 2;
  const bool redo_l1b = d <= 1 || d == 3;
  const bool redo_l1s = d <= 3;
  const bool redo_l2f = d <= 4;
  const bool redo_l2b = d <= 3 || d == 5;
  const bool redo_l2s = d <= 5;
  const bool redo_fc = d <= 6;
  const bool redo_s2in = d <= 7;
  const bool redo_s2l1f = d <= 8;
  const bool redo_s2l1b = d <= 7 || d == 9;
  const bool redo_s2l1s = d <= 9;
  const bool redo_s2l2f = d <= 10;
  const bool redo_s2l2b = d <= 9 || d == 11;
  const bool redo_s2l2s = d <= 11;

  if (redo_gp) {
    out.gp.resize(k_steps);
    for (int k = 0; k < k_steps; ++k)
      gated_proj_forward(params_, gp_, segs[k], out.gp[k]);
  }
  const auto& gp = redo_gp ? out.gp : base->gp;

  if (redo_s1in) {
    out.s1_in.resize(static_cast<std::size_t>(k_steps) * s1w);
    const double* i1 = params_.value(s1_input_).data();
    for (int k = 0; k < k_steps; ++k)
      kernels::matvec(i1, gp[k].out.data(),
                      out.s1_in.data() + static_cast<std::size_t>(k) * s1w, s1w,
                      spec_.flat_width());
    reverse_steps(out.s1_in, out.s1_in_rev, k_steps, s1w);
  }
  const auto& s1_in = redo_s1in ? out.s1_in : base->s1_in;
  const auto& s1_in_rev = redo_s1in ? out.s1_in_rev : base->s1_in_rev;

  if (redo_l1f) lstm_forward(params_, s1_l1f_, s1_in.data(), k_steps, out.l1f);
  if (redo_l1b) lstm_forward(params_, s1_l1b_, s1_in_rev.data(), k_steps, out.l1b);
  if (redo_l1s) {
    sum_scans(redo_l1f ? out.l1f : base->l1f, redo_l1b ? out.l1b : base->l1b,
              out.l1_sum);
    reverse_steps(out.l1_sum, out.l1_sum_rev, k_steps, s1w);
  }
  const auto& l1_sum = redo_l1s ? out.l1_sum : base->l1_sum;
  const auto& l1_sum_rev = redo_l1s ? out.l1_sum_rev : base->l1_sum_rev;

  if (redo_l2f) lstm_forward(params_, s1_l2f_, l1_sum.data(), k_steps, out.l2f);
  if (redo_l2b) lstm_forward(params_, s1_l2b_, l1_sum_rev.data(), k_steps, out.l2b);
  if (redo_l2s)
    sum_scans(redo_l2f ? out.l2f : base->l2f, redo_l2b ? out.l2b : base->l2b,
              out.l2_sum);
  const auto& l2_sum = redo_l2s ? out.l2_sum : base->l2_sum;

  if (redo_fc) {
    out.fc1_pre.resize(static_cast<std::size_t>(k_steps) * fcw);
    out.comps.resize(static_cast<std::size_t>(k_steps) * fcw);
    for (int k = 0; k < k_steps; ++k)
      fc_forward(params_, fc1_w_, fc1_b_, Act::kRelu, /*bias_outside=*/true,
                 l2_sum.data() + static_cast<std::size_t>(k) * s1w,
                 out.fc1_pre.data() + static_cast<std::size_t>(k) * fcw,
                 out.comps.data() + static_cast<std::size_t>(k) * fcw);
  }
  const auto& comps = redo_fc ? out.comps : base->comps;

  out.comp.resize(spec_.n_components);
  for (int p = 0; p < spec_.n_components; ++p) {
    auto& cc = out.comp[p];
    const auto* bc = base ? &base->comp[p] : nullptr;

    if (redo_s2in) {
      cc.s2_in.resize(static_cast<std::size_t>(k_steps) * s2w);
      const double* i2 = params_.value(s2_input_).data();
      for (int k = 0; k < k_steps; ++k)
        kernels::matvec(i2,
                        comps.data() + static_cast<std::size_t>(k) * fcw +
                            static_cast<std::size_t>(p) * spec_.comp_width,
                        cc.s2_in.data() + static_cast<std::size_t>(k) * s2w, s2w,
                        spec_.comp_width);
      reverse_steps(cc.s2_in, cc.s2_in_rev, k_steps, s2w);
    }
    const auto& s2_in = redo_s2in ? cc.s2_in : bc->s2_in;
    const auto& s2_in_rev = redo_s2in ? cc.s2_in_rev : bc->s2_in_rev;

    if (redo_s2l1f) lstm_forward(params_, s2_l1f_, s2_in.data(), k_steps, cc.l1f);
    if (redo_s2l1b)
      lstm_forward(params_, s2_l1b_, s2_in_rev.data(), k_steps, cc.l1b);
    if (redo_s2l1s) {
      sum_scans(redo_s2l1f ? cc.l1f : bc->l1f, redo_s2l1b ? cc.l1b : bc->l1b,
                cc.l1_sum);
      reverse_steps(cc.l1_sum, cc.l1_sum_rev, k_steps, s2w);
    }
    const auto& c_l1_sum = redo_s2l1s ? cc.l1_sum : bc->l1_sum;
    const auto& c_l1_sum_rev = redo_s2l1s ? cc.l1_sum_rev : bc->l1_sum_rev;

    if (redo_s2l2f) lstm_forward(params_, s2_l2f_, c_l1_sum.data(), k_steps, cc.l2f);
    if (redo_s2l2b)
      lstm_forward(params_, s2_l2b_, c_l1_sum_rev.data(), k_steps, cc.l2b);
    if (redo_s2l2s)
      sum_scans(redo_s2l2f ? cc.l2f : bc->l2f, redo_s2l2b ? cc.l2b : bc->l2b,
                cc.l2_sum);
    else
      cc.l2_sum = bc->l2_sum;  // head always recomputes and reads scratch
  }

  head_forward(out);
}

void PirNet::head_forward(NetCache& cache) const {
  const int k_steps = spec_.segments;
  const int s2w = spec_.s2_width;
  if (spec_.head == NetSpec::Head::kDetector) {
    cache.probs.assign(spec_.n_components, 0.0);
    for (int p = 0; p < spec_.n_components; ++p) {
      auto& cc = cache.comp[p];
      double prob = 0.0;
      fc_forward(params_, head_w_, head_b_, Act::kSigmoid, false,
                 cc.l2_sum.data(), &cc.logit_pre, &prob);
      cache.probs[p] = prob;
    }
  } else {
    cache.positions.assign(spec_.n_components, std::vector<Vec2>(k_steps));
    for (int p = 0; p < spec_.n_components; ++p) {
      auto& cc = cache.comp[p];
      cc.head_pre.resize(static_cast<std::size_t>(k_steps) * 2);
      for (int k = 0; k < k_steps; ++k) {
        double xy[2];
        fc_forward(params_, head_w_, head_b_, Act::kNone, false,
                   cc.l2_sum.data() + static_cast<std::size_t>(k) * s2w,
                   cc.head_pre.data() + static_cast<std::size_t>(k) * 2, xy);
        cache.positions[p][k] = {xy[0], xy[1]};
      }
    }
  }
}

void PirNet::forward(const std::vector<Tensor>& segs, NetCache& cache) const {
  forward_impl(segs, nullptr, cache, NetStage::kGatedProj);
}

void PirNet::run_stage2(const std::vector<double>& comps, NetCache& cache) const {
  NetCache base;
  base.comps = comps;
  // reuse the resume path with only stage-2 dirty; stage-1 activations of
  // `base` are never touched beyond comps
  base.comp.resize(spec_.n_components);
  forward_impl(std::vector<Tensor>(spec_.segments,
                                   Tensor({spec_.n_sensors, spec_.seg_len})),
               &base, cache, NetStage::kS2Input);
}

double PirNet::loss(const NetCache& cache, const NetLabel& label) const {
  if (spec_.head == NetSpec::Head::kDetector)
    return counting_loss(cache.probs, label.count, label_smoothing).loss;
  return localization_loss(cache.positions, label.positions).loss;
}

double PirNet::loss_resume(const std::vector<Tensor>& segs,
                           const NetLabel& label, const NetCache& base,
                           NetCache& scratch, NetStage dirty) const {
  forward_impl(segs, &base, scratch, dirty);
  return loss(scratch, label);
}

CountingPit counting_loss(const std::vector<double>& probs, int true_count,
                          double smoothing) {
  const int p = static_cast<int>(probs.size());
  if (true_count < 0 || true_count > p)
    throw std::invalid_argument("true_count out of range");
  const double hi = 1.0 - smoothing, lo = smoothing;
  CountingPit best;
  best.loss = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    if (std::popcount(mask) != true_count) continue;
    double l = 0.0;
    for (int i = 0; i < p; ++i)
      l += std::abs(probs[i] - ((mask >> i) & 1u ? hi : lo));
    if (l < best.loss) {
      best.loss = l;
      best.labeling.assign(p, 0);
      for (int i = 0; i < p; ++i) best.labeling[i] = (mask >> i) & 1u ? 1 : 0;
    }
  }
  return best;
}

LocalizationPit localization_loss(
    const std::vector<std::vector<Vec2>>& predictions,
    const std::vector<std::vector<Vec2>>& labels) {
  const int m = static_cast<int>(predictions.size());
  if (static_cast<int>(labels.size()) != m)
    throw std::invalid_argument("prediction/label person counts differ");
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  LocalizationPit best;
  best.loss = std::numeric_limits<double>::infinity();
  do {
    double l = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto& pred = predictions[i];
      const auto& lab = labels[perm[i]];
      if (pred.size() != lab.size())
        throw std::invalid_argument("segment counts differ");
      for (std::size_t k = 0; k < pred.size(); ++k)
        l += (pred[k] - lab[k]).norm();
    }
    if (l < best.loss) {
      best.loss = l;
      best.perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

int predict_count(const std::vector<double>& probs) {
  int n = 0;
  for (double p : probs)
    if (p > 0.5) ++n;
  return n;
}

double PirNet::loss_backward(const std::vector<Tensor>& segs,
                             const NetLabel& label, NetCache& cache) {
  forward(segs, cache);
  const int k_steps = spec_.segments;
  const int s1w = spec_.s1_width;
  const int s2w = spec_.s2_width;
  const int fcw = spec_.fc1_width();

  double loss_value = 0.0;
  std::vector<std::vector<double>> d_l2_sum_comp(
      spec_.n_components,
      std::vector<double>(static_cast<std::size_t>(k_steps) * s2w, 0.0));

  if (spec_.head == NetSpec::Head::kDetector) {
    const CountingPit pit = counting_loss(cache.probs, label.count, label_smoothing);
    loss_value = pit.loss;
    const double hi = 1.0 - label_smoothing, lo = label_smoothing;
    for (int p = 0; p < spec_.n_components; ++p) {
      const double diff = cache.probs[p] - (pit.labeling[p] ? hi : lo);
      const double dprob = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      if (dprob == 0.0) continue;
      fc_backward(params_, head_w_, head_b_, Act::kSigmoid, false,
                  cache.comp[p].l2_sum.data(), &cache.comp[p].logit_pre, &dprob,
                  d_l2_sum_comp[p].data());
    }
  } else {
    const LocalizationPit pit = localization_loss(cache.positions, label.positions);
    loss_value = pit.loss;
    for (int p = 0; p < spec_.n_components; ++p) {
      for (int k = 0; k < k_steps; ++k) {
        const Vec2 diff = cache.positions[p][k] - label.positions[pit.perm[p]][k];
        const double n = diff.norm();
        if (n == 0.0) continue;
        const double dxy[2] = {diff.x / n, diff.y / n};
        fc_backward(params_, head_w_, head_b_, Act::kNone, false,
                    cache.comp[p].l2_sum.data() + static_cast<std::size_t>(k) * s2w,
                    cache.comp[p].head_pre.data() + static_cast<std::size_t>(k) * 2,
                    dxy, d_l2_sum_comp[p].data() + static_cast<std::size_t>(k) * s2w);
      }
    }
  }

  // stage 2 backward, shared weights accumulate over components
  std::vector<double> d_comps(static_cast<std::size_t>(k_steps) * fcw, 0.0);
  std::vector<double> d_rev(static_cast<std::size_t>(k_steps) * s2w);
  for (int p = 0; p < spec_.n_components; ++p) {
    auto& cc = cache.comp[p];
    std::vector<double> d_l1_sum(static_cast<std::size_t>(k_steps) * s2w, 0.0);
    lstm_backward(params_, s2_l2f_, cc.l1_sum.data(), cc.l2f,
                  d_l2_sum_comp[p].data(), d_l1_sum.data());
    std::fill(d_rev.begin(), d_rev.end(), 0.0);
    lstm_backward(params_, s2_l2b_, cc.l1_sum_rev.data(), cc.l2b,
                  d_l2_sum_comp[p].data(), d_rev.data());
    for (int k = 0; k < k_steps; ++k)
      for (int j = 0; j < s2w; ++j)
        d_l1_sum[static_cast<std::size_t>(k) * s2w + j] +=
            d_rev[static_cast<std::size_t>(k_steps - 1 - k) * s2w + j];

    std::vector<double> d_s2_in(static_cast<std::size_t>(k_steps) * s2w, 0.0);
    lstm_backward(params_, s2_l1f_, cc.s2_in.data(), cc.l1f, d_l1_sum.data(),
                  d_s2_in.data());
    std::fill(d_rev.begin(), d_rev.end(), 0.0);
    lstm_backward(params_, s2_l1b_, cc.s2_in_rev.data(), cc.l1b, d_l1_sum.data(),
                  d_rev.data());
    for (int k = 0; k < k_steps; ++k)
      for (int j = 0; j < s2w; ++j)
        d_s2_in[static_cast<std::size_t>(k) * s2w + j] +=
            d_rev[static_cast<std::size_t>(k_steps - 1 - k) * s2w + j];

    // through I2 into the component slice
    double* di2 = params_.grad(s2_input_).data();
    const double* i2 = params_.value(s2_input_).data();
    for (int k = 0; k < k_steps; ++k) {
      const double* dk = d_s2_in.data() + static_cast<std::size_t>(k) * s2w;
      const double* xk = cache.comps.data() + static_cast<std::size_t>(k) * fcw +
                         static_cast<std::size_t>(p) * spec_.comp_width;
      kernels::outer_acc(dk, xk, di2, s2w, spec_.comp_width);
      kernels::matvec_t_acc(i2, dk,
                            d_comps.data() + static_cast<std::size_t>(k) * fcw +
                                static_cast<std::size_t>(p) * spec_.comp_width,
                            s2w, spec_.comp_width);
    }
  }

  // separation FC backward
  std::vector<double> d_l2_sum(static_cast<std::size_t>(k_steps) * s1w, 0.0);
  for (int k = 0; k < k_steps; ++k)
    fc_backward(params_, fc1_w_, fc1_b_, Act::kRelu, true,
                cache.l2_sum.data() + static_cast<std::size_t>(k) * s1w,
                cache.fc1_pre.data() + static_cast<std::size_t>(k) * fcw,
                d_comps.data() + static_cast<std::size_t>(k) * fcw,
                d_l2_sum.data() + static_cast<std::size_t>(k) * s1w);

  // stage 1 BiLSTMs
  std::vector<double> d_l1_sum(static_cast<std::size_t>(k_steps) * s1w, 0.0);
  std::vector<double> d_rev1(static_cast<std::size_t>(k_steps) * s1w, 0.0);
  lstm_backward(params_, s1_l2f_, cache.l1_sum.data(), cache.l2f, d_l2_sum.data(),
                d_l1_sum.data());
  lstm_backward(params_, s1_l2b_, cache.l1_sum_rev.data(), cache.l2b,
                d_l2_sum.data(), d_rev1.data());
  for (int k = 0; k < k_steps; ++k)
    for (int j = 0; j < s1w; ++j)
      d_l1_sum[static_cast<std::size_t>(k) * s1w + j] +=
          d_rev1[static_cast<std::size_t>(k_steps - 1 - k) * s1w + j];

  std::vector<double> d_s1_in(static_cast<std::size_t>(k_steps) * s1w, 0.0);
  std::fill(d_rev1.begin(), d_rev1.end(), 0.0);
  lstm_backward(params_, s1_l1f_, cache.s1_in.data(), cache.l1f, d_l1_sum.data(),
                d_s1_in.data());
  lstm_backward(params_, s1_l1b_, cache.s1_in_rev.data(), cache.l1b,
                d_l1_sum.data(), d_rev1.data());
  for (int k = 0; k < k_steps; ++k)
    for (int j = 0; j < s1w; ++j)
      d_s1_in[static_cast<std::size_t>(k) * s1w + j] +=
          d_rev1[static_cast<std::size_t>(k_steps - 1 - k) * s1w + j];

  // through I1 into the gated projection
  const int flat = spec_.flat_width();
  double* di1 = params_.grad(s1_input_).data();
  const double* i1 = params_.value(s1_input_).data();
  Tensor d_gp({spec_.n_sensors, spec_.conv_channels});
  for (int k = 0; k < k_steps; ++k) {
    const double* dk = d_s1_in.data() + static_cast<std::size_t>(k) * s1w;
    kernels::outer_acc(dk, cache.gp[k].out.data(), di1, s1w, flat);
    d_gp.fill(0.0);
    kernels::matvec_t_acc(i1, dk, d_gp.data(), s1w, flat);
    gated_proj_backward(params_, gp_, segs[k], cache.gp[k], d_gp);
  }

  return loss_value;
}

std::vector<Tensor> window_features(const InferencePolicy& policy,
                                    const WindowSignal& win, bool* silent) {
  if (silent) *silent = false;
  const int n = win.n_sensors, d = win.n_samples;
  Tensor x({n, d});
  if (policy.preprocess) {
    if (!win.dhf.empty()) {
      std::copy(win.dhf.begin(), win.dhf.end(), x.v.begin());
    } else {
      Tensor volt({n, d}, win.voltages);
      x = inverse_filter(volt, policy.dynamics, policy.pipeline);
    }
    // remove the per-row constant: background flux and the inverse filter's
    // initial-state offset carry no position information
    for (int r = 0; r < n; ++r) {
      double mean = 0.0;
      for (int c = 0; c < d; ++c) mean += x(r, c);
      mean /= d;
      for (int c = 0; c < d; ++c) x(r, c) -= mean;
    }
    try {
      x = normalize(x);
    } catch (const std::runtime_error&) {
      if (silent) *silent = true;
      return {};
    }
  } else {
    const std::vector<double>& src = win.voltages.empty() ? win.dhf : win.voltages;
    for (int i = 0; i < n * d; ++i) x.v[i] = src[i] * policy.raw_scale;
  }
  return segment(x, policy.pipeline.segments);
}

InferenceResult infer(const InferencePolicy& policy, const WindowSignal& win) {
  InferenceResult res;
  bool silent = false;
  const auto segs = window_features(policy, win, &silent);
  if (silent) {
    res.silent = true;
    return res;
  }
  NetCache cache;
  policy.counter->forward(segs, cache);
  res.probs = cache.probs;
  res.count = predict_count(cache.probs);
  if (res.count == 0) return res;
  const PirNet* loc = policy.localizers[res.count - 1];
  if (!loc) throw std::runtime_error("no localization net for predicted count");
  NetCache loc_cache;
  loc->forward(segs, loc_cache);
  res.positions = loc_cache.positions;
  return res;
}

}  // namespace pirdfl
