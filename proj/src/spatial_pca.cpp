#include <string>

#include "genhop/errors.hpp"
#include "genhop/seed.hpp"
#include "linalg.hpp"

namespace genhop {

std::size_t SpatialPCA::reduced_dim() const {
  std::size_t d = 0;
  for (const auto& c : channels) d += static_cast<std::size_t>(c.components.rows());
  return d;
}

Vector SpatialPCA::project(const ImageTensor& t) const {
  if (t.height() != height || t.width() != width ||
      t.channels() != channels.size()) {
    throw DimensionError("SpatialPCA::project: tensor shape mismatch");
  }
  Vector out(static_cast<Eigen::Index>(reduced_dim()));
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& pc = channels[c];
    const Eigen::Index r = pc.components.rows();
    out.segment(at, r) = pc.components * (t.channel_vector(c) - pc.mean);
    at += r;
  }
  return out;
}

ImageTensor SpatialPCA::unproject(const Vector& v) const {
  if (v.size() != static_cast<Eigen::Index>(reduced_dim())) {
    throw DimensionError("SpatialPCA::unproject: got " +
                         std::to_string(v.size()) + " values, expected " +
                         std::to_string(reduced_dim()));
  }
  ImageTensor t(height, width, channels.size());
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& pc = channels[c];
    const Eigen::Index r = pc.components.rows();
    t.set_channel(c, pc.mean + pc.components.transpose() * v.segment(at, r));
    at += r;
  }
  return t;
}

SpatialPCA fit_spatial_pca(std::span<const ImageTensor> samples, double gamma) {
  if (samples.size() < 2) {
    throw InsufficientSamplesError("fit_spatial_pca: need at least 2 samples");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("fit_spatial_pca: gamma must lie in (0, 1)");
  }
  const auto& first = samples.front();
  for (const auto& s : samples) {
    if (!s.same_shape(first)) {
      throw DimensionError("fit_spatial_pca: samples differ in shape");
    }
  }

  SpatialPCA pca;
  pca.gamma = gamma;
  pca.height = first.height();
  pca.width = first.width();
  const auto m = static_cast<Eigen::Index>(samples.size());
  const auto p = static_cast<Eigen::Index>(pca.positions());

  for (std::size_t c = 0; c < first.channels(); ++c) {
    Matrix x(m, p);
    for (Eigen::Index i = 0; i < m; ++i) {
      x.row(i) = samples[static_cast<std::size_t>(i)].channel_vector(c).transpose();
    }
    ChannelPCA pc;
    pc.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - pc.mean.transpose();
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(m);
    auto eig = detail::symmetric_eigen_descending(cov);
    detail::clamp_small_eigenvalues(eig.values);

    const double total = eig.values.sum();
    Eigen::Index keep = 0;
    if (total > 0.0) {
      while (keep < p && eig.values[keep] / total >= gamma) ++keep;
    }
    pc.components = eig.vectors.leftCols(keep).transpose();
    for (Eigen::Index r = 0; r < keep; ++r) detail::fix_sign(pc.components.row(r));
    pc.eigenvalues = eig.values.head(keep);
    pc.normalized = keep > 0 ? Vector(pc.eigenvalues / total) : Vector(0);
    pca.channels.push_back(std::move(pc));
  }
  return pca;
}

}  // namespace genhop
