#pragma once

// Seed-space density model: spatial PCA, k-means, per-cluster ICA and
// cumulative histogram matching against N(0, 1), plus the inverse chain used
// to draw new seeds from white Gaussian noise.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "genhop/rng.hpp"
#include "genhop/tensor.hpp"

namespace genhop {

// ---------------------------------------------------------------- spatial PCA

struct ChannelPCA {
  Vector mean;         // one entry per spatial position
  Matrix components;   // retained x positions, orthonormal rows
  Vector eigenvalues;  // raw eigenvalues of the retained components
  Vector normalized;   // eigenvalues divided by the channel's total
};

/// PCA over the flattened spatial map of each channel. Components whose
/// normalized eigenvalue (share of the channel's variance) is below gamma are
/// dropped. Scores keep their natural scale.
struct SpatialPCA {
  double gamma = 0.0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<ChannelPCA> channels;

  std::size_t positions() const { return height * width; }
  std::size_t reduced_dim() const;
  Vector project(const ImageTensor& t) const;
  ImageTensor unproject(const Vector& v) const;
};

SpatialPCA fit_spatial_pca(std::span<const ImageTensor> samples, double gamma);

// ----------------------------------------------------------------- k-means

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  friend bool operator==(const KMeansOptions&, const KMeansOptions&) = default;
};

struct KMeansResult {
  Matrix centroids;                 // k x D
  Vector priors;                    // cluster size / M
  std::vector<std::size_t> labels;  // one per input row
  double inertia = 0.0;
};

/// Euclidean k-means with k-means++ seeding; the restart with the lowest
/// inertia wins. Clusters that remain empty (only possible with duplicate
/// points) are dropped, so the result may have fewer than k clusters.
KMeansResult fit_clusters(const Matrix& vectors, std::size_t k,
                          std::uint64_t seed, const KMeansOptions& options = {});

// ------------------------------------------------------ histogram matching

/// Sorted sample values of one component; the i-th value (0-based) sits at
/// CDF level (i + 0.5) / n.
struct CdfTable {
  std::vector<double> values;
};

CdfTable make_cdf_table(std::vector<double> samples);

/// Phi^-1 of the interpolated empirical CDF, clamped to [1/(2n), 1 - 1/(2n)].
double gaussianize(double v, const CdfTable& table);
/// Monotone inverse of gaussianize.
double degaussianize(double g, const CdfTable& table);

double standard_normal_cdf(double x);
double standard_normal_quantile(double p);

// ---------------------------------------------------------------------- ICA

struct IcaOptions {
  double tolerance = 1e-4;
  std::size_t max_iterations = 500;
  std::uint64_t seed = 0;
};

enum class UnmixingKind : std::uint8_t {
  kIca = 0,        // FastICA converged
  kWhitening = 1,  // FastICA did not converge; PCA whitening only
  kIdentity = 2,   // too few members for a fit
};

/// Density of one cluster: s = unmixing (v - mean) has independent
/// components, each mapped to N(0, 1) through its CDF table.
struct ClusterDensity {
  Vector mean;
  Matrix unmixing;
  Matrix mixing;  // inverse of unmixing
  std::vector<CdfTable> tables;
  UnmixingKind kind = UnmixingKind::kIdentity;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  /// Training direction: ICA then histogram matching.
  Vector to_gaussian(const Vector& v) const;
  /// Generation direction: inverse matching then inverse ICA.
  Vector from_gaussian(const Vector& g) const;
};

/// FastICA (log-cosh contrast, symmetric decorrelation) on mean-removed
/// members, then one CDF table per independent component.
ClusterDensity fit_ica_and_cdf(const Matrix& members,
                               const IcaOptions& options = {});

// -------------------------------------------------------------- seed model

struct ClusterModel {
  Matrix centroids;  // k x D
  Vector priors;
  std::vector<ClusterDensity> densities;

  std::size_t size() const { return static_cast<std::size_t>(priors.size()); }
  std::size_t nearest(const Vector& v) const;
};

struct SeedOptions {
  double gamma = 0.01;
  std::size_t clusters = 10;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
  double ica_tolerance = 1e-4;
  std::size_t ica_max_iterations = 500;
};

struct SeedModel {
  SpatialPCA pca;
  ClusterModel clusters;
};

/// Throws DegenerateDataError when no spatial component survives gamma.
SeedModel fit_seed_model(std::span<const ImageTensor> s4,
                         const SeedOptions& options);

std::size_t sample_cluster(const ClusterModel& clusters, Rng& rng);
/// Reduced-space seed vector (before the inverse spatial PCA).
Vector sample_seed_vector(const ClusterModel& clusters, Rng& rng);
ImageTensor sample_seed(const SeedModel& model, Rng& rng);

}  // namespace genhop
