#include <iostream>
#include <random>

#include "genhop/errors.hpp"
#include "genhop/seed.hpp"
#include "linalg.hpp"

namespace genhop {

namespace {

// W <- (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(w * w.transpose());
  const Vector inv_sqrt = solver.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return solver.eigenvectors() * inv_sqrt.asDiagonal() *
         solver.eigenvectors().transpose() * w;
}

// Fixed-point FastICA on whitened data z (dim x n). Returns false when the
// iteration cap is hit before convergence.
bool fast_ica(const Matrix& z, const IcaOptions& options, Matrix& w) {
  const Eigen::Index d = z.rows();
  const auto n = static_cast<double>(z.cols());
  Rng rng = make_rng(options.seed, 0x696361ULL);
  std::normal_distribution<double> normal;
  w.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = normal(rng);
  }
  w = symmetric_decorrelation(w);

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const Matrix g = (w * z).array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).rowwise().mean();
    Matrix next = (g * z.transpose()) / n - g_prime_mean.asDiagonal() * w;
    next = symmetric_decorrelation(next);
    const double change =
        ((next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = std::move(next);
    if (change < options.tolerance) return true;
  }
  return false;
}

}  // namespace

Vector ClusterDensity::to_gaussian(const Vector& v) const {
  Vector s = unmixing * (v - mean);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s[i] = gaussianize(s[i], tables[static_cast<std::size_t>(i)]);
  }
  return s;
}

Vector ClusterDensity::from_gaussian(const Vector& g) const {
  Vector s(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    s[i] = degaussianize(g[i], tables[static_cast<std::size_t>(i)]);
  }
  return mixing * s + mean;
}

ClusterDensity fit_ica_and_cdf(const Matrix& members, const IcaOptions& options) {
  const Eigen::Index n = members.rows();
  const Eigen::Index d = members.cols();
  if (n == 0) throw InsufficientSamplesError("fit_ica_and_cdf: empty cluster");

  ClusterDensity density;
  density.mean = members.colwise().mean().transpose();
  const Matrix centered = members.rowwise() - density.mean.transpose();

  density.unmixing = Matrix::Identity(d, d);
  density.kind = UnmixingKind::kIdentity;
  if (n >= d + 1 && d > 0) {
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);
    auto eig = detail::symmetric_eigen_descending(cov);
    const double top = eig.values[0];
    if (top > 0.0) {
      // Floor tiny variances so the unmixing stays invertible (cond <= 1e6).
      const Vector scale =
          eig.values.cwiseMax(top * 1e-12).cwiseSqrt().cwiseInverse();
      const Matrix whitening = scale.asDiagonal() * eig.vectors.transpose();
      Matrix w;
      if (fast_ica(whitening * centered.transpose(), options, w)) {
        density.unmixing = w * whitening;
        density.kind = UnmixingKind::kIca;
      } else {
        std::clog << "genhop: warning: FastICA did not converge in "
                  << options.max_iterations
                  << " iterations; using PCA whitening for this cluster\n";
        density.unmixing = whitening;
        density.kind = UnmixingKind::kWhitening;
      }
    }
  }
  density.mixing = density.unmixing.inverse();

  const Matrix sources = centered * density.unmixing.transpose();
  density.tables.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> col(sources.col(j).data(), sources.col(j).data() + n);
    density.tables.push_back(make_cdf_table(std::move(col)));
  }
  return density;
}

}  // namespace genhop
