#include "genhop/color.hpp"

#include "genhop/errors.hpp"
#include "linalg.hpp"

namespace genhop {

ColorModel fit_pixel_pca(std::span<const ImageTensor> rgb) {
  if (rgb.empty()) throw InsufficientSamplesError("fit_pixel_pca: no images");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d moment = Eigen::Matrix3d::Zero();
  double count = 0.0;
  for (const auto& img : rgb) {
    if (img.channels() != 3) throw DimensionError("fit_pixel_pca: expected RGB");
    const Matrix px = rows_from_grid(img);
    sum += px.colwise().sum().transpose();
    moment += px.transpose() * px;
    count += static_cast<double>(px.rows());
  }
  ColorModel model;
  model.mean = sum / count;
  const Matrix cov = moment / count - model.mean * model.mean.transpose();
  auto eig = detail::symmetric_eigen_descending(0.5 * (cov + cov.transpose()));
  detail::clamp_small_eigenvalues(eig.values);
  model.basis = eig.vectors.transpose();
  for (Eigen::Index r = 0; r < 3; ++r) detail::fix_sign(model.basis.row(r));
  model.eigenvalues = eig.values;
  return model;
}

ImageTensor rgb_to_pq(const ImageTensor& rgb, const ColorModel& model) {
  if (rgb.channels() != 3) throw DimensionError("rgb_to_pq: expected RGB");
  const Matrix px = rows_from_grid(rgb).rowwise() - model.mean.transpose();
  const Matrix pq = px * model.basis.topRows(ColorModel::kKeptChannels).transpose();
  return grid_from_rows(pq, rgb.height(), rgb.width());
}

ImageTensor pq_to_rgb_linear(const ImageTensor& pq, const ColorModel& model) {
  if (pq.channels() != ColorModel::kKeptChannels) {
    throw DimensionError("pq_to_rgb_linear: expected 2 channels");
  }
  const Matrix px = (rows_from_grid(pq) *
                     model.basis.topRows(ColorModel::kKeptChannels))
                        .rowwise() +
                    model.mean.transpose();
  return grid_from_rows(px, pq.height(), pq.width());
}

ImageTensor pq_to_rgb(const ImageTensor& pq, const ColorModel& model) {
  return recover_field(pq, model.rgb_stage).hf;
}

}  // namespace genhop
