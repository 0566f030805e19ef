#pragma once

// Locally linear embedding over small spatial regions: pulls a generated
// low-frequency region onto the manifold of training regions and transfers
// the paired high-frequency detail.

#include <cstddef>
#include <span>
#include <vector>

#include "genhop/tensor.hpp"

namespace genhop {

/// Neighbor count bound.
inline constexpr std::size_t kMaxNeighbors = 3;
/// A candidate neighbor is dropped when it is farther than this multiple of
/// the nearest distance.
inline constexpr double kNeighborDistanceRatio = 3.0;

/// Spatial window of a feature grid.
struct Region {
  std::size_t y = 0;
  std::size_t x = 0;
  std::size_t h = 1;
  std::size_t w = 1;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Window origins along one axis: regular tiling, with the last window pulled
/// back flush to the edge when `extent` is not a multiple of `size`.
std::vector<std::size_t> region_anchors(std::size_t extent, std::size_t size);
/// Raster-ordered tiling of an h x w grid into size x size regions.
std::vector<Region> tile_regions(std::size_t h, std::size_t w, std::size_t size);

/// Region cells flattened in (dy, dx, c) order.
Vector region_features(const ImageTensor& t, const Region& r);

/// Paired training features of one region.
struct LLECodebook {
  Region region;
  Matrix lf_bank;  // entries x d_lf
  Matrix hf_bank;  // entries x d_hf
  std::size_t k_max = kMaxNeighbors;

  std::size_t entries() const { return static_cast<std::size_t>(lf_bank.rows()); }
};

struct Neighbors {
  std::vector<std::size_t> index;  // bank rows, nearest first
  std::vector<double> distance;
};

/// Exact scan for the k_max nearest bank rows (ties broken by row index),
/// then the distance-ratio cut.
Neighbors find_neighbors(const Vector& query, const Matrix& bank,
                         std::size_t k_max);

/// Affine reconstruction weights: minimize |query - sum w_i n_i|^2 subject to
/// sum w_i = 1. When the minimizer is not unique the minimum-norm one is
/// returned. `neighbors` holds one neighbor per row.
Vector lle_weights(const Vector& query, const Matrix& neighbors);

struct Recovery {
  Vector adjusted_lf;
  Vector estimated_hf;
  Neighbors neighbors;
  Vector weights;
};

Recovery recover(const Vector& query_lf, const LLECodebook& book);

/// All codebooks of one expansion stage, one per region of the grid tiling.
struct LLEStage {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t lf_channels = 0;
  std::size_t hf_channels = 0;
  std::size_t region_size = 1;  // 1 means one codebook per location
  std::vector<LLECodebook> books;
};

/// lf[i] and hf[i] are the paired feature grids of training image i.
LLEStage build_codebooks(std::span<const ImageTensor> lf,
                         std::span<const ImageTensor> hf,
                         std::size_t region_size,
                         std::size_t k_max = kMaxNeighbors);

struct FieldRecovery {
  ImageTensor lf;
  ImageTensor hf;
};

/// Runs recover on every region of a generated LF grid. Cells covered by
/// more than one region receive the average of their estimates.
FieldRecovery recover_field(const ImageTensor& lf, const LLEStage& stage);

}  // namespace genhop
