#include "genhop/image_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "genhop/errors.hpp"

namespace genhop {

namespace {

ImageTensor from_bytes(const std::vector<std::uint8_t>& px, std::size_t h,
                       std::size_t w, std::size_t c) {
  std::vector<double> data(px.size());
  std::transform(px.begin(), px.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return ImageTensor(h, w, c, std::move(data));
}

ImageTensor read_png(const std::filesystem::path& path, std::size_t channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  return from_bytes(px, image.height, image.width, channels);
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_jpeg_error(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegError*>(info->err);
  info->err->format_message(info, err->message);
  std::longjmp(err->jump, 1);
}

ImageTensor read_jpeg(const std::filesystem::path& path, std::size_t channels) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"),
                                                       &std::fclose);
  if (!file) throw IoError("cannot open '" + path.string() + "'");

  jpeg_decompress_struct info{};
  JpegError err{};
  info.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = on_jpeg_error;
  std::vector<std::uint8_t> px;
  std::size_t h = 0, w = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw IoError("cannot decode JPEG '" + path.string() + "': " + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_stdio_src(&info, file.get());
  jpeg_read_header(&info, TRUE);
  info.out_color_space = channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&info);
  h = info.output_height;
  w = info.output_width;
  const std::size_t stride = w * channels;
  px.resize(h * stride);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = px.data() + info.output_scanline * stride;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return from_bytes(px, h, w, channels);
}

}  // namespace

ImageTensor read_image(const std::filesystem::path& path, std::size_t channels) {
  if (channels != 1 && channels != 3) {
    throw ConfigError("images can be read with 1 or 3 channels");
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::array<unsigned char, 8> sig{};
  f.read(reinterpret_cast<char*>(sig.data()), sig.size());
  if (f.gcount() >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0) {
    return read_png(path, channels);
  }
  if (f.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) {
    return read_jpeg(path, channels);
  }
  throw FormatError("'" + path.string() + "' is neither PNG nor JPEG");
}

void write_png(const std::filesystem::path& path, const ImageTensor& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError("PNG output needs 1 or 3 channels");
  }
  std::vector<std::uint8_t> px(image.size());
  std::transform(image.data().begin(), image.data().end(), px.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width());
  out.height = static_cast<png_uint_32>(image.height());
  out.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&out, path.c_str(), 0, px.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + out.message);
  }
}

ImageTensor tile_grid(std::span<const ImageTensor> images, std::size_t columns,
                      std::size_t padding) {
  if (images.empty()) return {};
  columns = std::max<std::size_t>(1, std::min(columns, images.size()));
  const auto& first = images.front();
  const std::size_t rows = (images.size() + columns - 1) / columns;
  const std::size_t th = first.height() + padding;
  const std::size_t tw = first.width() + padding;
  ImageTensor grid(rows * th + padding, columns * tw + padding, first.channels());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(first)) throw DimensionError("tile_grid: mixed shapes");
    const std::size_t oy = (i / columns) * th + padding;
    const std::size_t ox = (i % columns) * tw + padding;
    for (std::size_t y = 0; y < first.height(); ++y) {
      for (std::size_t x = 0; x < first.width(); ++x) {
        for (std::size_t c = 0; c < first.channels(); ++c) {
          grid.at(oy + y, ox + x, c) = images[i].at(y, x, c);
        }
      }
    }
  }
  return grid;
}

ImageTensor center_crop_resize(const ImageTensor& image, std::size_t out_h,
                               std::size_t out_w) {
  if (image.empty() || out_h == 0 || out_w == 0) {
    throw DimensionError("center_crop_resize: empty image or target");
  }
  const std::size_t side = std::min(image.height(), image.width());
  const std::size_t y0 = (image.height() - side) / 2;
  const std::size_t x0 = (image.width() - side) / 2;
  const double sy = static_cast<double>(side) / static_cast<double>(out_h);
  const double sx = static_cast<double>(side) / static_cast<double>(out_w);

  // Overlap of source cell [i, i+1) with the target footprint [a, b).
  auto overlap = [](double a, double b, std::size_t i) {
    return std::max(0.0, std::min(b, i + 1.0) - std::max(a, static_cast<double>(i)));
  };

  ImageTensor out(out_h, out_w, image.channels());
  for (std::size_t y = 0; y < out_h; ++y) {
    const double ya = y * sy, yb = (y + 1) * sy;
    for (std::size_t x = 0; x < out_w; ++x) {
      const double xa = x * sx, xb = (x + 1) * sx;
      for (std::size_t c = 0; c < image.channels(); ++c) {
        double acc = 0.0, weight = 0.0;
        for (auto iy = static_cast<std::size_t>(ya); iy < side && iy < yb; ++iy) {
          const double wy = overlap(ya, yb, iy);
          for (auto ix = static_cast<std::size_t>(xa); ix < side && ix < xb; ++ix) {
            const double wgt = wy * overlap(xa, xb, ix);
            acc += wgt * image.at(y0 + iy, x0 + ix, c);
            weight += wgt;
          }
        }
        out.at(y, x, c) = acc / weight;
      }
    }
  }
  return out;
}

}  // namespace genhop
