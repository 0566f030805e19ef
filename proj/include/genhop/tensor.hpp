#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace genhop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense H x W x C grid of real responses stored row-major in (h, w, c)
/// order. Every subspace of the pipeline (pixels, hop outputs, seeds) is
/// carried in this type.
class ImageTensor {
public:
  ImageTensor() = default;
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels);
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  bool all_finite() const;

  /// Copy of channels [first, first + count).
  ImageTensor channel_slice(std::size_t first, std::size_t count) const;

  /// Spatial map of one channel flattened in raster order.
  Vector channel_vector(std::size_t c) const;
  void set_channel(std::size_t c, const Vector& values);

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Non-overlapping block geometry: stride always equals the block size.
struct BlockSpec {
  std::size_t block_h = 2;
  std::size_t block_w = 2;

  std::size_t stride_h() const { return block_h; }
  std::size_t stride_w() const { return block_w; }
  std::size_t area() const { return block_h * block_w; }

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// Gathers every block into one row: rows follow block raster order, columns
/// follow (dy, dx, c) order inside the block.
Matrix blocks_to_rows(const ImageTensor& t, const BlockSpec& spec);

/// Scatters rows produced by blocks_to_rows back into an out_h x out_w x out_c
/// tensor.
ImageTensor rows_to_blocks(const Matrix& rows, const BlockSpec& spec,
                           std::size_t out_h, std::size_t out_w,
                           std::size_t out_c);

/// Stacks the channels of a (rows = positions) response matrix into a tensor:
/// row r of `responses` becomes cell r of an h x w grid.
ImageTensor grid_from_rows(const Matrix& responses, std::size_t h,
                           std::size_t w);
/// Inverse of grid_from_rows: one row per grid cell, one column per channel.
Matrix rows_from_grid(const ImageTensor& t);

}  // namespace genhop
