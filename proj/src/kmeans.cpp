#include <limits>
#include <random>
#include <string>

#include "genhop/errors.hpp"
#include "genhop/seed.hpp"

namespace genhop {

namespace {

struct Run {
  Matrix centroids;
  std::vector<std::size_t> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

// k-means++: each new centroid is drawn with probability proportional to the
// squared distance to the nearest centroid chosen so far.
Matrix seed_centroids(const Matrix& x, std::size_t k, Rng& rng) {
  const Eigen::Index m = x.rows();
  Matrix c(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
  c.row(0) = x.row(pick(rng));
  Vector d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (std::size_t j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      chosen = m - 1;
      for (Eigen::Index i = 0; i < m; ++i) {
        acc += d2[i];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    c.row(static_cast<Eigen::Index>(j)) = x.row(chosen);
    d2 = d2.cwiseMin((x.rowwise() - x.row(chosen)).rowwise().squaredNorm());
  }
  return c;
}

double assign(const Matrix& x, const Matrix& c, std::vector<std::size_t>& labels,
              Vector& dist2) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    (c.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    dist2[i] = (x.row(i) - c.row(best)).squaredNorm();
    inertia += dist2[i];
  }
  return inertia;
}

Run lloyd(const Matrix& x, std::size_t k, Rng& rng,
          const KMeansOptions& options) {
  Run run;
  run.centroids = seed_centroids(x, k, rng);
  run.labels.assign(static_cast<std::size_t>(x.rows()), 0);
  Vector dist2(x.rows());
  const auto kk = static_cast<Eigen::Index>(k);

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const std::vector<std::size_t> previous = run.labels;
    assign(x, run.centroids, run.labels, dist2);

    Matrix sums = Matrix::Zero(kk, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto l = run.labels[static_cast<std::size_t>(i)];
      sums.row(static_cast<Eigen::Index>(l)) += x.row(i);
      ++counts[l];
    }
    bool reseeded = false;
    for (std::size_t j = 0; j < k; ++j) {
      const auto row = static_cast<Eigen::Index>(j);
      if (counts[j] > 0) {
        run.centroids.row(row) = sums.row(row) / static_cast<double>(counts[j]);
        continue;
      }
      // Empty cluster: move its centroid to the point farthest from its own
      // centroid, and make sure that point is not picked twice.
      Eigen::Index far = 0;
      if (dist2.maxCoeff(&far) > 0.0) {
        run.centroids.row(row) = x.row(far);
        dist2[far] = 0.0;
        reseeded = true;
      }
    }
    if (!reseeded && iter > 0 && previous == run.labels) break;
  }
  run.inertia = assign(x, run.centroids, run.labels, dist2);
  return run;
}

}  // namespace

KMeansResult fit_clusters(const Matrix& vectors, std::size_t k,
                          std::uint64_t seed, const KMeansOptions& options) {
  const auto m = static_cast<std::size_t>(vectors.rows());
  if (k == 0) throw ConfigError("fit_clusters: k must be positive");
  if (m < k) {
    throw InsufficientSamplesError("fit_clusters: " + std::to_string(m) +
                                   " vectors for k = " + std::to_string(k));
  }
  Rng rng = make_rng(seed, 0x6b6d65616e73ULL);
  Run best;
  for (std::size_t r = 0; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    Run run = lloyd(vectors, k, rng, options);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  std::vector<std::size_t> counts(k, 0);
  for (auto l : best.labels) ++counts[l];
  std::vector<std::size_t> remap(k, 0);
  std::size_t kept = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) remap[j] = kept++;
  }

  KMeansResult out;
  out.centroids.resize(static_cast<Eigen::Index>(kept), vectors.cols());
  out.priors.resize(static_cast<Eigen::Index>(kept));
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    const auto row = static_cast<Eigen::Index>(remap[j]);
    out.centroids.row(row) = best.centroids.row(static_cast<Eigen::Index>(j));
    out.priors[row] = static_cast<double>(counts[j]) / static_cast<double>(m);
  }
  out.labels.reserve(m);
  for (auto l : best.labels) out.labels.push_back(remap[l]);
  out.inertia = best.inertia;
  return out;
}

}  // namespace genhop
