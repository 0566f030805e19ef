#pragma once

#include <span>

#include "genhop/lle.hpp"
#include "genhop/tensor.hpp"

namespace genhop {

/// Pixel-wise PCA of RGB into P, Q, R. Only P and Q enter the cascade; RGB is
/// recovered per pixel location by LLE conditioned on (P, Q).
struct ColorModel {
  Vector mean;         // RGB mean
  Matrix basis;        // 3 x 3, rows P, Q, R (descending eigenvalue)
  Vector eigenvalues;  // 3 entries, descending
  LLEStage rgb_stage;  // (P, Q) -> RGB, one codebook per pixel location

  static constexpr std::size_t kKeptChannels = 2;
};

/// Fits the pixel PCA on every pixel of every image (without the codebooks).
ColorModel fit_pixel_pca(std::span<const ImageTensor> rgb);

ImageTensor rgb_to_pq(const ImageTensor& rgb, const ColorModel& model);
/// Linear inverse with the R channel set to zero.
ImageTensor pq_to_rgb_linear(const ImageTensor& pq, const ColorModel& model);
/// LLE recovery through model.rgb_stage.
ImageTensor pq_to_rgb(const ImageTensor& pq, const ColorModel& model);

}  // namespace genhop
