#pragma once

#include <cstddef>
#include <filesystem>
#include <span>

#include "genhop/tensor.hpp"

namespace genhop {

/// Reads a PNG or JPEG (detected from the file signature) as a tensor with
/// the requested channel count (1 = luminance, 3 = RGB), scaled to [0, 1].
ImageTensor read_image(const std::filesystem::path& path, std::size_t channels);

/// 8-bit grayscale or RGB PNG; each value is clamped to [0, 1] and stored as
/// round(v * 255).
void write_png(const std::filesystem::path& path, const ImageTensor& image);

/// Tiles equally shaped images into a montage with `columns` per row and a
/// `padding`-pixel black border between tiles.
ImageTensor tile_grid(std::span<const ImageTensor> images, std::size_t columns,
                      std::size_t padding = 2);

/// Largest centered square crop, then area-average resampling to out_h x out_w.
ImageTensor center_crop_resize(const ImageTensor& image, std::size_t out_h,
                               std::size_t out_w);

}  // namespace genhop
