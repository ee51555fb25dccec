// Timing comparison of the serial reference kernels against the OpenMP
// variants, plus the end-to-end hot paths (batch gradients, scene
// simulation). Run: pirdfl_bench [repeats]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "pirdfl/dataset.hpp"
#include "pirdfl/kernels.hpp"
#include "pirdfl/parallel.hpp"
#include "pirdfl/rng.hpp"
#include "pirdfl/train.hpp"

using namespace pirdfl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
double time_best(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

void bench_matvec(int repeats) {
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "openmp", "speedup");
  Rng rng(1);
  for (auto [rows, cols] : {std::pair{256, 128}, {512, 512}, {2048, 2048}}) {
    std::vector<double> w(static_cast<long>(rows) * cols), x(cols), y(rows);
    for (double& v : w) v = rng.gaussian();
    for (double& v : x) v = rng.gaussian();
    const int inner = 40000000 / (rows * cols) + 1;
    const double ts = time_best(repeats, [&] {
      for (int i = 0; i < inner; ++i)
        kernels::matvec_serial(w.data(), x.data(), y.data(), rows, cols);
    });
    const double tp = time_best(repeats, [&] {
      for (int i = 0; i < inner; ++i)
        kernels::matvec_omp(w.data(), x.data(), y.data(), rows, cols);
    });
    char label[64];
    std::snprintf(label, sizeof label, "matvec %dx%d (x%d)", rows, cols, inner);
    std::printf("%-28s %9.4fs %9.4fs %7.2fx\n", label, ts, tp, ts / tp);
  }
  const int matmul_dims[2][3] = {{64, 64, 64}, {256, 256, 256}};
  for (const auto& dims : matmul_dims) {
    const int m = dims[0], k = dims[1], n = dims[2];
    std::vector<double> a(static_cast<long>(m) * k), b(static_cast<long>(k) * n),
        c(static_cast<long>(m) * n);
    for (double& v : a) v = rng.gaussian();
    for (double& v : b) v = rng.gaussian();
    const int inner = 60000000 / (m * k * n) + 1;
    const double ts = time_best(repeats, [&] {
      for (int i = 0; i < inner; ++i)
        kernels::matmul_serial(a.data(), b.data(), c.data(), m, k, n);
    });
    const double tp = time_best(repeats, [&] {
      for (int i = 0; i < inner; ++i)
        kernels::matmul_omp(a.data(), b.data(), c.data(), m, k, n);
    });
    char label[64];
    std::snprintf(label, sizeof label, "matmul %dx%dx%d (x%d)", m, k, n, inner);
    std::printf("%-28s %9.4fs %9.4fs %7.2fx\n", label, ts, tp, ts / tp);
  }
}

void bench_scene(int repeats) {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.scene_seconds = 30.0;
  const double t = time_best(repeats, [&] {
    for (int i = 0; i < 4; ++i) {
      const Scene scene = make_scene(cfg, Split::kTrain, 3, i);
      simulate_scene(scene);
    }
  });
  std::printf("%-28s %9.4fs (4 scenes x 30 s, %d threads)\n", "scene simulation",
              t, max_threads());
}

void bench_training_step(int repeats) {
  const NetSpec spec = NetSpec::counting(4);
  PirNet net(spec, 7);
  Rng rng(9);
  std::vector<TrainSample> batch;
  for (int i = 0; i < 32; ++i) {
    TrainSample s;
    for (int k = 0; k < spec.segments; ++k) {
      Tensor seg({spec.n_sensors, spec.seg_len});
      for (long j = 0; j < seg.size(); ++j) seg[j] = 0.3 * rng.gaussian();
      s.segs.push_back(std::move(seg));
    }
    s.label.count = i % 4;
    batch.push_back(std::move(s));
  }
  NetCache cache;
  const double t = time_best(repeats, [&] {
    net.params().zero_grads();
    for (const auto& s : batch) net.loss_backward(s.segs, s.label, cache);
  });
  std::printf("%-28s %9.4fs (32 samples fwd+bwd)\n", "counting batch gradient", t);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  bench_matvec(repeats);
  bench_scene(repeats);
  bench_training_step(repeats);
  return 0;
}
