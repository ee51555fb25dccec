#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "pirdfl/harness.hpp"
#include "pirdfl/rng.hpp"
#include "pirdfl/scica.hpp"

using namespace pirdfl;

TEST_SUITE_BEGIN("scica");

TEST_CASE("delay embedding layout") {
  const auto e = delay_embed({1, 2, 3, 4}, 2);
  REQUIRE(e.lags == 2);
  REQUIRE(e.cols() == 3);
  // columns are (2,1), (3,2), (4,3)
  CHECK(e.rows[0] == std::vector<double>{2, 3, 4});
  CHECK(e.rows[1] == std::vector<double>{1, 2, 3});

  const auto one = delay_embed({5, 6, 7}, 1);
  CHECK(one.rows[0] == std::vector<double>{5, 6, 7});
  CHECK_THROWS_AS(delay_embed({1, 2}, 2), std::invalid_argument);
}

TEST_CASE("hankel structure holds on random series") {
  Rng rng(5);
  std::vector<double> x(80);
  for (double& v : x) v = rng.gaussian();
  const auto e = delay_embed(x, 12);
  for (int i = 0; i < e.lags; ++i)
    for (int j = 0; j < e.cols(); ++j) CHECK(e.rows[i][j] == x[j + e.lags - 1 - i]);
  // overlapping entries along anti-diagonals agree: exact invertibility
  for (int i = 0; i + 1 < e.lags; ++i)
    for (int j = 0; j + 1 < e.cols(); ++j) CHECK(e.rows[i][j] == e.rows[i + 1][j + 1]);
}

TEST_CASE("whitening gives identity covariance") {
  Rng rng(7);
  std::vector<double> x(500);
  double state = 0.0;
  for (double& v : x) {
    state = 0.9 * state + rng.gaussian();  // correlated series
    v = state;
  }
  const auto w = whiten(delay_embed(x, 16));
  REQUIRE(w.rank >= 2);
  const int cols = static_cast<int>(w.data[0].size());
  for (int i = 0; i < w.rank; ++i)
    for (int j = i; j < w.rank; ++j) {
      double s = 0.0;
      for (int k = 0; k < cols; ++k) s += w.data[i][k] * w.data[j][k];
      s /= (cols - 1);
      CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
}

TEST_CASE("whitening an already-white signal is nearly orthogonal") {
  Rng rng(8);
  DelayEmbedding e;
  e.lags = 6;
  e.rows.assign(6, std::vector<double>(4000));
  for (auto& row : e.rows)
    for (double& v : row) v = rng.gaussian();  // independent rows
  const auto w = whiten(e);
  REQUIRE(w.rank == 6);
  // transform = diag(1/scale) basis^T; with unit covariance the combined map
  // is close to orthogonal: scales near 1
  for (double s : w.scale) CHECK(std::abs(s - 1.0) < 0.1);
}

TEST_CASE("rank-deficient input is reduced to the retained rank") {
  Rng rng(9);
  DelayEmbedding e;
  e.lags = 4;
  e.rows.assign(4, std::vector<double>(300));
  for (double& v : e.rows[0]) v = rng.gaussian();
  for (double& v : e.rows[1]) v = rng.gaussian();
  e.rows[2] = e.rows[0];  // duplicates collapse the rank
  e.rows[3] = e.rows[1];
  const auto w = whiten(e);
  CHECK(w.rank == 2);
}

TEST_CASE("fast_ica recovers two independent uniform sources") {
  Rng rng(11);
  const int n = 3000;
  std::vector<double> s1(n), s2(n);
  for (int i = 0; i < n; ++i) {
    s1[i] = rng.uniform(-1.7320508, 1.7320508);
    s2[i] = rng.uniform(-1.7320508, 1.7320508);
  }
  // random invertible mixing
  DelayEmbedding mixed;
  mixed.lags = 2;
  mixed.rows.assign(2, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    mixed.rows[0][i] = 0.8 * s1[i] + 0.6 * s2[i];
    mixed.rows[1][i] = -0.3 * s1[i] + 1.1 * s2[i];
  }
  const auto w = whiten(mixed);
  const auto ica = fast_ica(w, 2, 42);
  // each source matches one component up to sign
  double best1 = 0.0, best2 = 0.0;
  for (int c = 0; c < 2; ++c) {
    best1 = std::max(best1, std::abs(pearson(ica.components[c], s1)));
    best2 = std::max(best2, std::abs(pearson(ica.components[c], s2)));
  }
  CHECK(best1 >= 0.95);
  CHECK(best2 >= 0.95);

  // determinism under the seed
  const auto again = fast_ica(w, 2, 42);
  CHECK(again.components == ica.components);
  CHECK(again.iterations == ica.iterations);
}

TEST_CASE("fast_ica components are uncorrelated with unit variance") {
  Rng rng(13);
  std::vector<double> x(900);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2 * M_PI * i / 40.0) + 0.7 * rng.gaussian();
  const auto w = whiten(delay_embed(x, 10));
  const auto ica = fast_ica(w, std::min(4, w.rank), 7);
  const int cols = static_cast<int>(ica.components[0].size());
  for (std::size_t i = 0; i < ica.components.size(); ++i)
    for (std::size_t j = i; j < ica.components.size(); ++j) {
      double s = 0.0;
      for (int k = 0; k < cols; ++k) s += ica.components[i][k] * ica.components[j][k];
      s /= (cols - 1);
      CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-6);
    }
}

TEST_CASE("single source recovery") {
  Rng rng(15);
  std::vector<double> src(2000);
  for (double& v : src) v = rng.uniform(-1, 1);
  DelayEmbedding e;
  e.lags = 1;
  e.rows = {src};
  const auto w = whiten(e);
  const auto ica = fast_ica(w, 1, 3);
  CHECK(std::abs(pearson(ica.components[0], src)) >= 0.99);
}

TEST_CASE("grouping: lagged copies fuse, disjoint tones split, singletons") {
  Rng rng(17);
  std::vector<double> base(400);
  for (std::size_t i = 0; i < base.size(); ++i)
    base[i] = std::sin(2 * M_PI * 1.3 * i / 60.0) + 0.05 * rng.gaussian();
  std::vector<std::vector<double>> lagged;
  for (int lag = 0; lag < 3; ++lag)
    lagged.push_back(std::vector<double>(base.begin() + lag, base.begin() + 300 + lag));
  const auto one = group_components(lagged, 1);
  for (int g : one) CHECK(g == 0);

  // 0.5 Hz and 3 Hz tones with lagged copies each
  std::vector<std::vector<double>> tones;
  for (int lag : {0, 7}) {
    std::vector<double> t(300);
    for (int i = 0; i < 300; ++i) t[i] = std::sin(2 * M_PI * 0.5 * (i + lag) / 60.0);
    tones.push_back(t);
  }
  for (int lag : {0, 3}) {
    std::vector<double> t(300);
    for (int i = 0; i < 300; ++i) t[i] = std::sin(2 * M_PI * 3.0 * (i + lag) / 60.0);
    tones.push_back(t);
  }
  const auto two = group_components(tones, 2);
  CHECK(two[0] == two[1]);
  CHECK(two[2] == two[3]);
  CHECK(two[0] != two[2]);

  const auto singles = group_components(tones, 4);
  std::set<int> distinct(singles.begin(), singles.end());
  CHECK(distinct.size() == 4);

  CHECK_THROWS_AS(group_components(tones, 5), std::invalid_argument);
  CHECK_THROWS_AS(group_components(tones, 0), std::invalid_argument);
}

TEST_CASE("reconstruction: all components in one group is the identity") {
  Rng rng(19);
  std::vector<double> x(400);
  double state = 0.0;
  for (double& v : x) {
    // sub-gaussian innovations keep the fixed point well defined
    state = 0.8 * state + rng.uniform(-1.0, 1.0);
    v = state;
  }
  const auto e = delay_embed(x, 8);
  const auto w = whiten(e);
  REQUIRE(w.rank == 8);  // full rank
  const auto ica = fast_ica(w, 8, 5);
  const std::vector<int> all_zero(8, 0);
  const auto rec = reconstruct_sources(e, w, ica, all_zero, 2);
  // group 0 carries everything, group 1 is identically zero
  double rms = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rms += (rec.sources[0][i] - x[i]) * (rec.sources[0][i] - x[i]);
    CHECK(rec.sources[1][i] == 0.0);
  }
  CHECK(std::sqrt(rms / x.size()) < 1e-6);
  CHECK(rec.residual_rms < 1e-6);
}

TEST_CASE("independent noise reconstructions stay uncorrelated") {
  // null distribution: |rho| between a reconstruction and unrelated noise
  Rng rng(21);
  double mean_abs = 0.0;
  const int trials = 8;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(150), unrelated(150);
    for (double& v : x) v = rng.gaussian();
    for (double& v : unrelated) v = rng.gaussian();
    ScicaConfig cfg;
    cfg.lags = 30;
    cfg.n_components = 4;
    cfg.seed = 100 + t;
    const auto rec = scica_channel(x, 1, cfg);
    mean_abs += std::abs(pearson(rec.sources[0], unrelated));
  }
  CHECK(mean_abs / trials < 0.2);
}

TEST_CASE("two-person disjoint-spectra case separates above 0.8") {
  const ExperimentConfig cfg = ExperimentConfig::defaults();
  ScicaConfig ica;
  ica.n_components = 20;
  ica.seed = 1;
  const SeparationCase c = make_separation_case(cfg, 1, 0.6, 1.4, 24.0);
  const SeparationScore s = evaluate_separation_case(c, 2, ica);
  CHECK(s.mean_correlation >= 0.8);
  REQUIRE(s.per_person.size() == 2);

  // determinism of the whole evaluation
  const SeparationScore again =
      evaluate_separation_case(make_separation_case(cfg, 1, 0.6, 1.4, 24.0), 2, ica);
  CHECK(again.mean_correlation == s.mean_correlation);
}

TEST_CASE("non-convergent configurations raise with the iteration count") {
  Rng rng(23);
  std::vector<double> x(200);
  for (double& v : x) v = rng.gaussian();
  const auto w = whiten(delay_embed(x, 12));
  CHECK_THROWS_AS(fast_ica(w, std::min(6, w.rank), 1, 1e-16, 3), std::runtime_error);
}

TEST_SUITE_END();
