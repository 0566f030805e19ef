#include "genhop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "genhop/errors.hpp"

namespace genhop {

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels)
    : height_(height), width_(width), channels_(channels),
      data_(height * width * channels, 0.0) {}

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
  if (data_.size() != height * width * channels) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(height) + "x" +
                         std::to_string(width) + "x" +
                         std::to_string(channels));
  }
}

bool ImageTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

ImageTensor ImageTensor::channel_slice(std::size_t first,
                                       std::size_t count) const {
  if (first + count > channels_) {
    throw DimensionError("channel slice out of range");
  }
  ImageTensor out(height_, width_, count);
  for (std::size_t p = 0; p < height_ * width_; ++p) {
    for (std::size_t c = 0; c < count; ++c) {
      out.data_[p * count + c] = data_[p * channels_ + first + c];
    }
  }
  return out;
}

Vector ImageTensor::channel_vector(std::size_t c) const {
  Vector v(static_cast<Eigen::Index>(height_ * width_));
  for (std::size_t p = 0; p < height_ * width_; ++p) {
    v[static_cast<Eigen::Index>(p)] = data_[p * channels_ + c];
  }
  return v;
}

void ImageTensor::set_channel(std::size_t c, const Vector& values) {
  if (c >= channels_ ||
      values.size() != static_cast<Eigen::Index>(height_ * width_)) {
    throw DimensionError("set_channel: shape mismatch");
  }
  for (std::size_t p = 0; p < height_ * width_; ++p) {
    data_[p * channels_ + c] = values[static_cast<Eigen::Index>(p)];
  }
}

namespace {

void check_divisible(std::size_t h, std::size_t w, const BlockSpec& spec) {
  if (spec.block_h == 0 || spec.block_w == 0) {
    throw DimensionError("block size must be positive");
  }
  if (h % spec.block_h != 0 || w % spec.block_w != 0) {
    throw DimensionError(std::to_string(h) + "x" + std::to_string(w) +
                         " grid is not divisible into " +
                         std::to_string(spec.block_h) + "x" +
                         std::to_string(spec.block_w) + " blocks");
  }
}

}  // namespace

Matrix blocks_to_rows(const ImageTensor& t, const BlockSpec& spec) {
  check_divisible(t.height(), t.width(), spec);
  const std::size_t bh = t.height() / spec.block_h;
  const std::size_t bw = t.width() / spec.block_w;
  const std::size_t cols = spec.area() * t.channels();
  Matrix rows(static_cast<Eigen::Index>(bh * bw),
              static_cast<Eigen::Index>(cols));
  for (std::size_t by = 0; by < bh; ++by) {
    for (std::size_t bx = 0; bx < bw; ++bx) {
      const auto r = static_cast<Eigen::Index>(by * bw + bx);
      Eigen::Index col = 0;
      for (std::size_t dy = 0; dy < spec.block_h; ++dy) {
        for (std::size_t dx = 0; dx < spec.block_w; ++dx) {
          for (std::size_t c = 0; c < t.channels(); ++c) {
            rows(r, col++) =
                t.at(by * spec.block_h + dy, bx * spec.block_w + dx, c);
          }
        }
      }
    }
  }
  return rows;
}

ImageTensor rows_to_blocks(const Matrix& rows, const BlockSpec& spec,
                           std::size_t out_h, std::size_t out_w,
                           std::size_t out_c) {
  check_divisible(out_h, out_w, spec);
  const std::size_t bh = out_h / spec.block_h;
  const std::size_t bw = out_w / spec.block_w;
  if (static_cast<std::size_t>(rows.rows()) != bh * bw ||
      static_cast<std::size_t>(rows.cols()) != spec.area() * out_c) {
    throw DimensionError("rows_to_blocks: matrix is " +
                         std::to_string(rows.rows()) + "x" +
                         std::to_string(rows.cols()) + ", expected " +
                         std::to_string(bh * bw) + "x" +
                         std::to_string(spec.area() * out_c));
  }
  ImageTensor t(out_h, out_w, out_c);
  for (std::size_t by = 0; by < bh; ++by) {
    for (std::size_t bx = 0; bx < bw; ++bx) {
      const auto r = static_cast<Eigen::Index>(by * bw + bx);
      Eigen::Index col = 0;
      for (std::size_t dy = 0; dy < spec.block_h; ++dy) {
        for (std::size_t dx = 0; dx < spec.block_w; ++dx) {
          for (std::size_t c = 0; c < out_c; ++c) {
            t.at(by * spec.block_h + dy, bx * spec.block_w + dx, c) =
                rows(r, col++);
          }
        }
      }
    }
  }
  return t;
}

ImageTensor grid_from_rows(const Matrix& responses, std::size_t h,
                           std::size_t w) {
  if (static_cast<std::size_t>(responses.rows()) != h * w) {
    throw DimensionError("grid_from_rows: row count mismatch");
  }
  const auto c = static_cast<std::size_t>(responses.cols());
  ImageTensor t(h, w, c);
  auto out = t.data();
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t k = 0; k < c; ++k) {
      out[p * c + k] = responses(static_cast<Eigen::Index>(p),
                                 static_cast<Eigen::Index>(k));
    }
  }
  return t;
}

Matrix rows_from_grid(const ImageTensor& t) {
  const std::size_t positions = t.height() * t.width();
  Matrix m(static_cast<Eigen::Index>(positions),
           static_cast<Eigen::Index>(t.channels()));
  auto in = t.data();
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t k = 0; k < t.channels(); ++k) {
      m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) =
          in[p * t.channels() + k];
    }
  }
  return m;
}

}  // namespace genhop
