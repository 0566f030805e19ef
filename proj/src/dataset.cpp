#include "genhop/dataset.hpp"

#include <algorithm>
#include <string>

#include <zlib.h>

#include "genhop/errors.hpp"
#include "genhop/image_io.hpp"

namespace genhop {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_maybe_gzip(const fs::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 16);
  for (;;) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int code = 0;
      const std::string msg = gzerror(f, &code);
      gzclose(f);
      throw IoError("cannot read '" + path.string() + "': " + msg);
    }
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(f);
  return out;
}

namespace {

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

}  // namespace

IdxImages read_idx_images(const fs::path& path) {
  auto bytes = read_maybe_gzip(path);
  if (bytes.size() < 16 || be32(bytes, 0) != kIdxImageMagic) {
    throw FormatError("'" + path.string() + "' is not an IDX image file");
  }
  IdxImages idx;
  idx.count = be32(bytes, 4);
  idx.rows = be32(bytes, 8);
  idx.cols = be32(bytes, 12);
  const std::size_t expected = idx.count * idx.rows * idx.cols;
  if (bytes.size() - 16 != expected) {
    throw FormatError("IDX image file '" + path.string() + "' has " +
                      std::to_string(bytes.size() - 16) + " pixel bytes, header says " +
                      std::to_string(expected));
  }
  idx.pixels.assign(bytes.begin() + 16, bytes.end());
  return idx;
}

std::vector<std::uint8_t> read_idx_labels(const fs::path& path) {
  auto bytes = read_maybe_gzip(path);
  if (bytes.size() < 8 || be32(bytes, 0) != kIdxLabelMagic) {
    throw FormatError("'" + path.string() + "' is not an IDX label file");
  }
  if (bytes.size() - 8 != be32(bytes, 4)) {
    throw FormatError("IDX label file '" + path.string() + "' is truncated");
  }
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<ImageTensor> idx_to_tensors(const IdxImages& idx, std::size_t limit) {
  const std::size_t n = limit == 0 ? idx.count : std::min(limit, idx.count);
  const std::size_t stride = idx.rows * idx.cols;
  std::vector<ImageTensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> data(stride);
    for (std::size_t p = 0; p < stride; ++p) {
      data[p] = static_cast<double>(idx.pixels[i * stride + p]) / 255.0;
    }
    out.emplace_back(idx.rows, idx.cols, 1, std::move(data));
  }
  return out;
}

DatasetSource resolve_source(const fs::path& path, std::size_t height,
                             std::size_t width, std::size_t channels) {
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw IoError("dataset path '" + path.string() + "' does not exist");
  }
  DatasetSource src{DatasetKind::kIdx, path, height, width, channels};
  if (fs::is_regular_file(path, ec)) return src;
  if (!fs::is_directory(path, ec)) {
    throw IoError("dataset path '" + path.string() + "' is not a file or directory");
  }

  std::vector<fs::path> idx_files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() &&
        e.path().filename().string().find("idx3-ubyte") != std::string::npos) {
      idx_files.push_back(e.path());
    }
  }
  std::sort(idx_files.begin(), idx_files.end());
  if (!idx_files.empty()) {
    const auto train = std::find_if(idx_files.begin(), idx_files.end(), [](const fs::path& p) {
      return p.filename().string().starts_with("train");
    });
    src.path = train != idx_files.end() ? *train : idx_files.front();
    return src;
  }
  src.kind = DatasetKind::kImageDirectory;
  return src;
}

std::vector<ImageTensor> load_dataset(const DatasetSource& source, std::size_t limit) {
  if (source.kind == DatasetKind::kIdx) {
    if (source.channels != 1) {
      throw ConfigError("IDX datasets are single-channel");
    }
    const IdxImages idx = read_idx_images(source.path);
    if (idx.rows != source.height || idx.cols != source.width) {
      throw DimensionError("IDX images are " + std::to_string(idx.rows) + "x" +
                           std::to_string(idx.cols) + ", expected " +
                           std::to_string(source.height) + "x" +
                           std::to_string(source.width));
    }
    return idx_to_tensors(idx, limit);
  }

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(source.path)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (limit != 0 && files.size() > limit) files.resize(limit);
  if (files.empty()) {
    throw IoError("no PNG/JPEG images in '" + source.path.string() + "'");
  }
  std::vector<ImageTensor> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    ImageTensor img = read_image(f, source.channels);
    if (img.height() != source.height || img.width() != source.width) {
      img = center_crop_resize(img, source.height, source.width);
    }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace genhop
