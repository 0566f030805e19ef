#pragma once

// Dataset ingestion: IDX files (optionally gzip-wrapped) and directories of
// PNG/JPEG images. Pixel values are scaled to [0, 1].

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "genhop/tensor.hpp"

namespace genhop {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, image-major
};

/// Whole file contents, transparently gunzipped when gzip-wrapped.
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path);

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// First `limit` images (all when limit is 0) as 1-channel tensors.
std::vector<ImageTensor> idx_to_tensors(const IdxImages& idx, std::size_t limit = 0);

enum class DatasetKind { kIdx, kImageDirectory };

struct DatasetSource {
  DatasetKind kind = DatasetKind::kIdx;
  std::filesystem::path path;  // IDX file, or the image directory
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
};

/// A regular file is read as IDX. A directory holding an IDX image file
/// (train-images-idx3-ubyte[.gz] preferred) resolves to that file; any other
/// directory is an image directory. Throws IoError when the path is missing.
DatasetSource resolve_source(const std::filesystem::path& path, std::size_t height,
                             std::size_t width, std::size_t channels);

/// Loads up to `limit` images (0 = all). IDX images must match the expected
/// shape; directory images (sorted by file name) are center-cropped and
/// resized to it.
std::vector<ImageTensor> load_dataset(const DatasetSource& source, std::size_t limit = 0);

}  // namespace genhop
