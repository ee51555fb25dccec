#pragma once
#include <cstdint>
#include <vector>

namespace pirdfl {

/// Lagged observation matrix of one channel: entry (i, j) = x[j + L - 1 - i],
/// i.e. column j stacks the L most recent samples ending at time j + L - 1.
struct DelayEmbedding {
  int channel = 0;
  int lags = 0;                           ///< L
  std::vector<std::vector<double>> rows;  ///< L x (D - L + 1)

  int cols() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
};

DelayEmbedding delay_embed(const std::vector<double>& series, int lags,
                           int channel = 0);

/// PCA whitening with an eigenvalue floor; keeps the transform so sources can
/// be mapped back to the embedding space.
struct Whitening {
  std::vector<std::vector<double>> data;  ///< rank x cols, identity covariance
  std::vector<std::vector<double>> basis; ///< L x rank, retained eigenvectors
  std::vector<double> scale;              ///< rank, sqrt(eigenvalue)
  std::vector<double> row_means;          ///< L
  int rank = 0;
};

Whitening whiten(const DelayEmbedding& embedding, double eig_floor_rel = 1e-10);

struct ScicaConfig {
  int lags = 60;
  int n_components = 8;
  double tolerance = 1e-6;
  int max_iterations = 500;
  double eig_floor_rel = 1e-10;
  std::uint64_t seed = 0;
};

/// Symmetric fixed-point ICA with tanh contrast on whitened data. Rows of the
/// result are the unmixed components (unit variance, mutually uncorrelated).
/// Throws std::runtime_error naming the iteration count on non-convergence.
struct IcaResult {
  std::vector<std::vector<double>> components;  ///< n x cols
  std::vector<std::vector<double>> unmixing;    ///< n x rank, orthonormal rows
  int iterations = 0;
};

IcaResult fast_ica(const Whitening& white, int n_components, std::uint64_t seed,
                   double tolerance = 1e-6, int max_iterations = 500);

/// Groups components into exactly n_sources clusters by average-linkage
/// agglomeration on the cosine similarity of their magnitude spectra.
std::vector<int> group_components(
    const std::vector<std::vector<double>>& components, int n_sources);

/// Projects each group back through the unmixing basis and the whitening
/// transform, then averages the Hankel anti-diagonals into one series per
/// source. The group's share of the row means is restored pro rata.
struct SourceReconstruction {
  std::vector<std::vector<double>> sources;  ///< [n_sources][D]
  double residual_rms = 0.0;                 ///< discarded-rank residual
};

SourceReconstruction reconstruct_sources(const DelayEmbedding& embedding,
                                         const Whitening& white,
                                         const IcaResult& ica,
                                         const std::vector<int>& grouping,
                                         int n_sources);

/// One SCICA pass over a single channel.
SourceReconstruction scica_channel(const std::vector<double>& series,
                                   int n_sources, const ScicaConfig& cfg);

/// A separation problem: the per-sensor mixtures and the per-person clean
/// DHFs the reconstruction is scored against.
struct SeparationCase {
  std::vector<std::vector<double>> mixture;              ///< [sensor][D]
  std::vector<std::vector<std::vector<double>>> truth;   ///< [person][sensor][D]
};

struct SeparationScore {
  double mean_correlation = 0.0;           ///< best-permutation, channel mean
  std::vector<double> per_person;          ///< matched |rho| per person
  double residual_rms = 0.0;
};

/// Runs SCICA per channel, aligns sources across channels by correlation,
/// then scores the best person assignment against the ground truth.
SeparationScore evaluate_separation_case(const SeparationCase& c, int n_sources,
                                         const ScicaConfig& cfg);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenvalues
/// descending, eigenvectors as columns of `vectors`.
void jacobi_eigen(std::vector<std::vector<double>> m,
                  std::vector<double>& values,
                  std::vector<std::vector<double>>& vectors);

}  // namespace pirdfl
