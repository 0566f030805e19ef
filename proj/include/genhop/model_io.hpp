#pragma once

// Single-file model container.
//
//   magic      8 bytes  "GHOPMOD\x1a"
//   version    u32
//   length     u64      payload byte count
//   payload    length bytes
//   checksum   u32      CRC-32 of the payload
//
// The payload is a section count (u32) followed by named sections. Each
// section is kind (u8: 0 matrix, 1 text), name length (u32), name bytes,
// then either rows (u64), cols (u64) and rows*cols IEEE-754 binary64 values
// in row-major order, or a byte length (u64) and UTF-8 text. All integers
// and floats are little-endian.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "genhop/tensor.hpp"

namespace genhop {

inline constexpr std::uint32_t kFormatVersion = 1;

class ModelWriter {
public:
  void add_matrix(const std::string& name, const Matrix& m);
  void add_vector(const std::string& name, const Vector& v);
  void add_text(const std::string& name, const std::string& text);

  std::vector<std::uint8_t> bytes() const;
  void write(const std::filesystem::path& path) const;
  static void write_bytes(const std::filesystem::path& path,
                          std::span<const std::uint8_t> bytes);

private:
  std::vector<std::uint8_t> payload_;
  std::uint32_t sections_ = 0;
  std::vector<std::string> names_;
};

class ModelReader {
public:
  static ModelReader from_bytes(std::span<const std::uint8_t> bytes);
  static ModelReader open(const std::filesystem::path& path);

  std::uint32_t version() const { return version_; }
  bool has(const std::string& name) const;
  const Matrix& matrix(const std::string& name) const;
  Vector vector(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  std::vector<std::string> section_names() const { return order_; }

private:
  std::uint32_t version_ = 0;
  std::map<std::string, Matrix> matrices_;
  std::map<std::string, std::string> texts_;
  std::vector<std::string> order_;
};

}  // namespace genhop
