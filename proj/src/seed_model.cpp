#include <random>
#include <string>

#include "genhop/errors.hpp"
#include "genhop/parallel.hpp"
#include "genhop/seed.hpp"

namespace genhop {

std::size_t ClusterModel::nearest(const Vector& v) const {
  Eigen::Index best = 0;
  (centroids.rowwise() - v.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<std::size_t>(best);
}

SeedModel fit_seed_model(std::span<const ImageTensor> s4,
                         const SeedOptions& options) {
  SeedModel model;
  model.pca = fit_spatial_pca(s4, options.gamma);
  const std::size_t dim = model.pca.reduced_dim();
  if (dim == 0) {
    throw DegenerateDataError(
        "seed space is empty: no spatial component reaches gamma = " +
        std::to_string(options.gamma));
  }

  Matrix vectors(static_cast<Eigen::Index>(s4.size()),
                 static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < s4.size(); ++i) {
    vectors.row(static_cast<Eigen::Index>(i)) = model.pca.project(s4[i]).transpose();
  }

  const KMeansResult km =
      fit_clusters(vectors, options.clusters, options.seed, options.kmeans);
  auto& clusters = model.clusters;
  clusters.centroids = km.centroids;
  clusters.priors = km.priors;
  clusters.densities.resize(clusters.size());

  std::vector<std::vector<Eigen::Index>> members(clusters.size());
  for (std::size_t i = 0; i < km.labels.size(); ++i) {
    members[km.labels[i]].push_back(static_cast<Eigen::Index>(i));
  }
  parallel_for(clusters.size(), [&](std::size_t c) {
    const Matrix rows = vectors(members[c], Eigen::all);
    IcaOptions ica;
    ica.tolerance = options.ica_tolerance;
    ica.max_iterations = options.ica_max_iterations;
    ica.seed = options.seed + 1 + c;
    clusters.densities[c] = fit_ica_and_cdf(rows, ica);
  });
  return model;
}

std::size_t sample_cluster(const ClusterModel& clusters, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(clusters.priors.begin(),
                                               clusters.priors.end());
  return pick(rng);
}

Vector sample_seed_vector(const ClusterModel& clusters, Rng& rng) {
  const auto& density = clusters.densities[sample_cluster(clusters, rng)];
  std::normal_distribution<double> normal;
  Vector g(static_cast<Eigen::Index>(density.dim()));
  for (auto& x : g) x = normal(rng);
  return density.from_gaussian(g);
}

ImageTensor sample_seed(const SeedModel& model, Rng& rng) {
  return model.pca.unproject(sample_seed_vector(model.clusters, rng));
}

}  // namespace genhop
