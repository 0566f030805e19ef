#include "genhop/model_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "genhop/errors.hpp"

namespace genhop {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'G', 'H', 'O', 'P',
                                                'M', 'O', 'D', 0x1a};
constexpr std::uint8_t kMatrixSection = 0;
constexpr std::uint8_t kTextSection = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}

void put_name(std::vector<std::uint8_t>& out, std::uint8_t kind,
              const std::string& name) {
  out.push_back(kind);
  put_le(out, static_cast<std::uint32_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
}

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t at = 0;
  while (at < data.size()) {
    const auto chunk = static_cast<uInt>(
        std::min<std::size_t>(data.size() - at, 1u << 30));
    crc = crc32(crc, data.data() + at, chunk);
    at += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Cursor {
public:
  explicit Cursor(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(data_[at_ + i]) << (8 * i));
    }
    at_ += sizeof(T);
    return value;
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + at_), n);
    at_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - at_; }

private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("model payload ends unexpectedly");
  }
  std::span<const std::uint8_t> data_;
  std::size_t at_ = 0;
};

}  // namespace

void ModelWriter::add_matrix(const std::string& name, const Matrix& m) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw FormatError("duplicate model section '" + name + "'");
  }
  names_.push_back(name);
  put_name(payload_, kMatrixSection, name);
  put_le(payload_, static_cast<std::uint64_t>(m.rows()));
  put_le(payload_, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(payload_, m(r, c));
  }
  ++sections_;
}

void ModelWriter::add_vector(const std::string& name, const Vector& v) {
  add_matrix(name, Matrix(v));
}

void ModelWriter::add_text(const std::string& name, const std::string& text) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw FormatError("duplicate model section '" + name + "'");
  }
  names_.push_back(name);
  put_name(payload_, kTextSection, name);
  put_le(payload_, static_cast<std::uint64_t>(text.size()));
  payload_.insert(payload_.end(), text.begin(), text.end());
  ++sections_;
}

std::vector<std::uint8_t> ModelWriter::bytes() const {
  std::vector<std::uint8_t> body;
  body.reserve(payload_.size() + 4);
  put_le(body, sections_);
  body.insert(body.end(), payload_.begin(), payload_.end());

  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_le(out, kFormatVersion);
  put_le(out, static_cast<std::uint64_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  put_le(out, crc32_of(body));
  return out;
}

void ModelWriter::write(const std::filesystem::path& path) const {
  write_bytes(path, bytes());
}

void ModelWriter::write_bytes(const std::filesystem::path& path,
                              std::span<const std::uint8_t> data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

ModelReader ModelReader::from_bytes(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t header = kMagic.size() + 4 + 8;
  const std::size_t probe = std::min(bytes.size(), kMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + probe, kMagic.begin())) {
    throw FormatError("not a GenHop model file");
  }
  if (bytes.size() < header) throw ChecksumError("model file is truncated");
  Cursor head(bytes.subspan(kMagic.size(), 12));
  ModelReader reader;
  reader.version_ = head.get<std::uint32_t>();
  if (reader.version_ != kFormatVersion) {
    throw VersionMismatchError("model format version " +
                               std::to_string(reader.version_) +
                               " is not supported (expected " +
                               std::to_string(kFormatVersion) + ")");
  }
  const auto length = head.get<std::uint64_t>();
  if (bytes.size() - header < 4 || length != bytes.size() - header - 4) {
    throw ChecksumError("model file is truncated or has trailing bytes");
  }
  const auto body = bytes.subspan(header, length);
  Cursor tail(bytes.subspan(header + length, 4));
  if (tail.get<std::uint32_t>() != crc32_of(body)) {
    throw ChecksumError("model checksum mismatch");
  }

  Cursor in(body);
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t s = 0; s < count; ++s) {
    const auto kind = in.get<std::uint8_t>();
    const auto name = in.get_string(in.get<std::uint32_t>());
    if (reader.has(name)) throw FormatError("duplicate section '" + name + "'");
    if (kind == kMatrixSection) {
      const auto rows = in.get<std::uint64_t>();
      const auto cols = in.get<std::uint64_t>();
      if (cols != 0 && rows > in.remaining() / 8 / cols) {
        throw FormatError("section '" + name + "' overruns the payload");
      }
      Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.get_f64();
      }
      reader.matrices_.emplace(name, std::move(m));
    } else if (kind == kTextSection) {
      reader.texts_.emplace(name, in.get_string(in.get<std::uint64_t>()));
    } else {
      throw FormatError("unknown section kind in '" + name + "'");
    }
    reader.order_.push_back(name);
  }
  if (in.remaining() != 0) throw FormatError("unparsed bytes after sections");
  return reader;
}

ModelReader ModelReader::open(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file '" + path.string() + "'");
  const std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)),
                                       std::istreambuf_iterator<char>());
  return from_bytes(data);
}

bool ModelReader::has(const std::string& name) const {
  return matrices_.contains(name) || texts_.contains(name);
}

const Matrix& ModelReader::matrix(const std::string& name) const {
  const auto it = matrices_.find(name);
  if (it == matrices_.end()) throw FormatError("missing model section '" + name + "'");
  return it->second;
}

Vector ModelReader::vector(const std::string& name) const {
  const Matrix& m = matrix(name);
  if (m.cols() != 1 && m.rows() != 0) {
    throw FormatError("section '" + name + "' is not a vector");
  }
  return m.rows() == 0 ? Vector(0) : Vector(m.col(0));
}

const std::string& ModelReader::text(const std::string& name) const {
  const auto it = texts_.find(name);
  if (it == texts_.end()) throw FormatError("missing model section '" + name + "'");
  return it->second;
}

}  // namespace genhop
