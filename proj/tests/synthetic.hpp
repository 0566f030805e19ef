#pragma once

// Small synthetic image sets for pipeline tests: soft blobs and strokes on a
// dark background, values in [0, 1].

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "genhop/tensor.hpp"

inline std::vector<genhop::ImageTensor> synthetic_images(std::size_t n, std::size_t side,
                                                         std::size_t channels,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<genhop::ImageTensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cy = side * (0.3 + 0.4 * u(rng));
    const double cx = side * (0.3 + 0.4 * u(rng));
    const double r = side * (0.15 + 0.15 * u(rng));
    const double angle = 3.14159265358979 * u(rng);
    genhop::ImageTensor t(side, side, channels);
    std::vector<double> tint(channels);
    for (auto& c : tint) c = 0.5 + 0.5 * u(rng);
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
        const double along = dx * std::cos(angle) + dy * std::sin(angle);
        const double across = -dx * std::sin(angle) + dy * std::cos(angle);
        const double v = std::exp(-(along * along) / (2 * r * r) -
                                  (across * across) / (0.5 * r * r));
        for (std::size_t c = 0; c < channels; ++c) {
          t.at(y, x, c) = std::clamp(tint[c] * v + 0.05 * u(rng), 0.0, 1.0);
        }
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}
