#include "pirdfl/scica.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pirdfl/rng.hpp"

namespace pirdfl {

DelayEmbedding delay_embed(const std::vector<double>& series, int lags,
                           int channel) {
  const int d = static_cast<int>(series.size());
  if (lags < 1 || lags >= d)
    throw std::invalid_argument("lag count must be in [1, series length)");
  DelayEmbedding e;
  e.channel = channel;
  e.lags = lags;
  const int cols = d - lags + 1;
  e.rows.assign(lags, std::vector<double>(cols));
  for (int i = 0; i < lags; ++i)
    for (int j = 0; j < cols; ++j) e.rows[i][j] = series[j + lags - 1 - i];
  return e;
}

void jacobi_eigen(std::vector<std::vector<double>> m, std::vector<double>& values,
                  std::vector<std::vector<double>>& vectors) {
  const int n = static_cast<int>(m.size());
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) vectors[i][i] = 1.0;

  double norm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) norm += m[i][j] * m[i][j];
  norm = std::sqrt(norm);
  const double tol = 1e-14 * (norm > 0 ? norm : 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += m[i][j] * m[i][j];
    if (std::sqrt(2.0 * off) < tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m[p][q]) < tol / (n * n)) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  values.resize(n);
  for (int i = 0; i < n; ++i) values[i] = m[i][i];
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  std::vector<double> sv(n);
  std::vector<std::vector<double>> svec(n, std::vector<double>(n));
  for (int j = 0; j < n; ++j) {
    sv[j] = values[idx[j]];
    for (int i = 0; i < n; ++i) svec[i][j] = vectors[i][idx[j]];
  }
  values = std::move(sv);
  vectors = std::move(svec);
}

Whitening whiten(const DelayEmbedding& embedding, double eig_floor_rel) {
  const int l = embedding.lags;
  const int cols = embedding.cols();
  if (cols < 2) throw std::invalid_argument("not enough columns to whiten");

  Whitening w;
  w.row_means.assign(l, 0.0);
  std::vector<std::vector<double>> centered(l, std::vector<double>(cols));
  for (int i = 0; i < l; ++i) {
    double mean = 0.0;
    for (double v : embedding.rows[i]) mean += v;
    mean /= cols;
    w.row_means[i] = mean;
    for (int j = 0; j < cols; ++j) centered[i][j] = embedding.rows[i][j] - mean;
  }

  std::vector<std::vector<double>> cov(l, std::vector<double>(l, 0.0));
  for (int i = 0; i < l; ++i)
    for (int j = i; j < l; ++j) {
      double s = 0.0;
      for (int k = 0; k < cols; ++k) s += centered[i][k] * centered[j][k];
      cov[i][j] = cov[j][i] = s / (cols - 1);
    }

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  jacobi_eigen(cov, values, vectors);
  if (values.empty() || values[0] <= 0.0)
    throw std::invalid_argument("whiten: rows have zero variance");
  const double floor = eig_floor_rel * values[0];

  int rank = 0;
  while (rank < l && values[rank] > floor) ++rank;
  w.rank = rank;
  w.scale.resize(rank);
  w.basis.assign(l, std::vector<double>(rank));
  for (int r = 0; r < rank; ++r) {
    w.scale[r] = std::sqrt(values[r]);
    for (int i = 0; i < l; ++i) w.basis[i][r] = vectors[i][r];
  }

  w.data.assign(rank, std::vector<double>(cols, 0.0));
  for (int r = 0; r < rank; ++r) {
    const double inv = 1.0 / w.scale[r];
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < l; ++i) s += w.basis[i][r] * centered[i][j];
      w.data[r][j] = s * inv;
    }
  }
  return w;
}

namespace {

// W <- (W W^T)^{-1/2} W, making the rows orthonormal
void symmetric_orthogonalize(std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(w.size());
  const int m = static_cast<int>(w[0].size());
  std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += w[i][k] * w[j][k];
      gram[i][j] = gram[j][i] = s;
    }
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  jacobi_eigen(gram, values, vectors);
  std::vector<std::vector<double>> inv_sqrt(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const double lam = std::max(values[k], 1e-12 * values[0]);
        s += vectors[i][k] * vectors[j][k] / std::sqrt(lam);
      }
      inv_sqrt[i][j] = s;
    }
  std::vector<std::vector<double>> out(n, std::vector<double>(m, 0.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double f = inv_sqrt[i][k];
      if (f == 0.0) continue;
      for (int j = 0; j < m; ++j) out[i][j] += f * w[k][j];
    }
  w = std::move(out);
}

}  // namespace

IcaResult fast_ica(const Whitening& white, int n_components, std::uint64_t seed,
                   double tolerance, int max_iterations) {
  const int rank = white.rank;
  const int cols = static_cast<int>(white.data[0].size());
  if (n_components < 1 || n_components > rank)
    throw std::invalid_argument("n_components must be in [1, rank]");

  Rng rng(Rng::mix(seed, 0x1ca));
  std::vector<std::vector<double>> w(n_components, std::vector<double>(rank));
  for (auto& row : w)
    for (double& v : row) v = rng.gaussian();
  symmetric_orthogonalize(w);

  std::vector<std::vector<double>> w_new(n_components, std::vector<double>(rank));
  std::vector<double> proj(cols);
  int iter = 0;
  bool converged = false;
  for (; iter < max_iterations && !converged; ++iter) {
    for (int i = 0; i < n_components; ++i) {
      for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int r = 0; r < rank; ++r) s += w[i][r] * white.data[r][j];
        proj[j] = s;
      }
      double mean_gprime = 0.0;
      for (int j = 0; j < cols; ++j) {
        const double t = std::tanh(proj[j]);
        proj[j] = t;
        mean_gprime += 1.0 - t * t;
      }
      mean_gprime /= cols;
      for (int r = 0; r < rank; ++r) {
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += white.data[r][j] * proj[j];
        w_new[i][r] = s / cols - mean_gprime * w[i][r];
      }
    }
    symmetric_orthogonalize(w_new);
    double delta = 0.0;
    for (int i = 0; i < n_components; ++i) {
      double d = 0.0;
      for (int r = 0; r < rank; ++r) d += w_new[i][r] * w[i][r];
      delta = std::max(delta, std::abs(1.0 - std::abs(d)));
    }
    w = w_new;
    converged = delta < tolerance;
  }
  if (!converged)
    throw std::runtime_error("fast_ica failed to converge after " +
                             std::to_string(max_iterations) + " iterations");

  IcaResult res;
  res.iterations = iter;
  res.unmixing = w;
  res.components.assign(n_components, std::vector<double>(cols, 0.0));
  for (int i = 0; i < n_components; ++i)
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int r = 0; r < rank; ++r) s += w[i][r] * white.data[r][j];
      res.components[i][j] = s;
    }
  return res;
}

namespace {

std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int bins = n / 2;
  std::vector<double> mag(bins);
  for (int k = 1; k <= bins; ++k) {
    double re = 0.0, im = 0.0;
    const double wk = -2.0 * M_PI * k / n;
    for (int t = 0; t < n; ++t) {
      re += x[t] * std::cos(wk * t);
      im += x[t] * std::sin(wk * t);
    }
    mag[k - 1] = std::hypot(re, im);
  }
  return mag;
}

double cosine_sim(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

}  // namespace

std::vector<int> group_components(
    const std::vector<std::vector<double>>& components, int n_sources) {
  const int n = static_cast<int>(components.size());
  if (n_sources < 1) throw std::invalid_argument("n_sources must be >= 1");
  if (n_sources > n)
    throw std::invalid_argument("more sources requested than components");

  std::vector<std::vector<double>> spectra;
  spectra.reserve(n);
  for (const auto& c : components) spectra.push_back(magnitude_spectrum(c));

  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) clusters.push_back({i});
  while (static_cast<int>(clusters.size()) > n_sources) {
    double best = -2.0;
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double s = 0.0;
        for (int a : clusters[i])
          for (int b : clusters[j]) s += cosine_sim(spectra[a], spectra[b]);
        s /= static_cast<double>(clusters[i].size() * clusters[j].size());
        if (s > best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(),
                        clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<long>(bj));
  }

  std::vector<int> grouping(n, 0);
  for (std::size_t g = 0; g < clusters.size(); ++g)
    for (int c : clusters[g]) grouping[c] = static_cast<int>(g);
  return grouping;
}

SourceReconstruction reconstruct_sources(const DelayEmbedding& embedding,
                                         const Whitening& white,
                                         const IcaResult& ica,
                                         const std::vector<int>& grouping,
                                         int n_sources) {
  const int l = embedding.lags;
  const int cols = embedding.cols();
  const int d = cols + l - 1;
  const int n_comp = static_cast<int>(ica.components.size());
  if (static_cast<int>(grouping.size()) != n_comp)
    throw std::invalid_argument("grouping size mismatch");

  SourceReconstruction rec;
  rec.sources.assign(n_sources, std::vector<double>(d, 0.0));

  std::vector<std::vector<double>> total(l, std::vector<double>(cols, 0.0));
  for (int g = 0; g < n_sources; ++g) {
    std::vector<std::vector<double>> y(white.rank, std::vector<double>(cols, 0.0));
    int members = 0;
    for (int c = 0; c < n_comp; ++c) {
      if (grouping[c] != g) continue;
      ++members;
      for (int r = 0; r < white.rank; ++r) {
        const double f = ica.unmixing[c][r];
        if (f == 0.0) continue;
        for (int j = 0; j < cols; ++j) y[r][j] += f * ica.components[c][j];
      }
    }
    const double mean_share = static_cast<double>(members) / n_comp;
    std::vector<std::vector<double>> x(l, std::vector<double>(cols, 0.0));
    for (int i = 0; i < l; ++i) {
      for (int r = 0; r < white.rank; ++r) {
        const double f = white.basis[i][r] * white.scale[r];
        if (f == 0.0) continue;
        for (int j = 0; j < cols; ++j) x[i][j] += f * y[r][j];
      }
      const double m = mean_share * white.row_means[i];
      for (int j = 0; j < cols; ++j) {
        x[i][j] += m;
        total[i][j] += x[i][j];
      }
    }
    // Hankel averaging: row i of column j holds sample j + l - 1 - i, so all
    // entries with j + l - 1 - i == t estimate the same sample
    std::vector<int> counts(d, 0);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < cols; ++j) {
        const int t = j + l - 1 - i;
        rec.sources[g][t] += x[i][j];
        ++counts[t];
      }
    for (int t = 0; t < d; ++t)
      if (counts[t] > 0) rec.sources[g][t] /= counts[t];
  }

  double res = 0.0;
  long cnt = 0;
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < cols; ++j) {
      const double diff = embedding.rows[i][j] - total[i][j];
      res += diff * diff;
      ++cnt;
    }
  rec.residual_rms = std::sqrt(res / static_cast<double>(cnt));
  return rec;
}

SourceReconstruction scica_channel(const std::vector<double>& series,
                                   int n_sources, const ScicaConfig& cfg) {
  const auto emb = delay_embed(series, cfg.lags);
  const auto wh = whiten(emb, cfg.eig_floor_rel);
  const int n_comp = std::min(cfg.n_components, wh.rank);
  const auto ica =
      fast_ica(wh, n_comp, cfg.seed, cfg.tolerance, cfg.max_iterations);
  const int n_groups = std::min(n_sources, n_comp);
  const auto grouping = group_components(ica.components, n_groups);
  auto rec = reconstruct_sources(emb, wh, ica, grouping, n_groups);
  while (static_cast<int>(rec.sources.size()) < n_sources)
    rec.sources.emplace_back(series.size(), 0.0);  // degenerate-rank fallback
  return rec;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (b.size() != n || n < 2) throw std::invalid_argument("pearson: bad input");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

SeparationScore evaluate_separation_case(const SeparationCase& c, int n_sources,
                                         const ScicaConfig& cfg) {
  const int n_ch = static_cast<int>(c.mixture.size());
  const int n_persons = static_cast<int>(c.truth.size());
  if (n_ch < 1 || n_persons < 1)
    throw std::invalid_argument("empty separation case");

  std::vector<SourceReconstruction> recs;
  recs.reserve(n_ch);
  double residual = 0.0;
  for (int ch = 0; ch < n_ch; ++ch) {
    recs.push_back(scica_channel(c.mixture[ch], n_sources, cfg));
    residual += recs.back().residual_rms;
  }

  // align channels 1..n-1 to channel 0's source identities by correlation
  for (int ch = 1; ch < n_ch; ++ch) {
    std::vector<int> order(n_sources);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> best = order;
    double best_score = -1e300;
    do {
      double s = 0.0;
      for (int g = 0; g < n_sources; ++g)
        s += std::abs(pearson(recs[0].sources[g], recs[ch].sources[order[g]]));
      if (s > best_score) {
        best_score = s;
        best = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    std::vector<std::vector<double>> aligned(n_sources);
    for (int g = 0; g < n_sources; ++g) aligned[g] = recs[ch].sources[best[g]];
    recs[ch].sources = std::move(aligned);
  }

  const int m = std::min(n_sources, n_persons);
  std::vector<int> assign(n_sources);
  std::iota(assign.begin(), assign.end(), 0);
  SeparationScore score;
  score.mean_correlation = -1e300;
  do {
    double total = 0.0;
    std::vector<double> per_person(m, 0.0);
    for (int p = 0; p < m; ++p) {
      double s = 0.0;
      for (int ch = 0; ch < n_ch; ++ch)
        s += std::abs(pearson(recs[ch].sources[assign[p]], c.truth[p][ch]));
      per_person[p] = s / n_ch;
      total += per_person[p];
    }
    if (total / m > score.mean_correlation) {
      score.mean_correlation = total / m;
      score.per_person = per_person;
    }
  } while (std::next_permutation(assign.begin(), assign.end()));
  score.residual_rms = residual / n_ch;
  return score;
}

}  // namespace pirdfl
