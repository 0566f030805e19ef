#include "genhop/lle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "genhop/errors.hpp"

namespace genhop {

std::vector<std::size_t> region_anchors(std::size_t extent, std::size_t size) {
  if (size == 0 || size > extent) {
    throw DimensionError("region size " + std::to_string(size) +
                         " does not fit an extent of " + std::to_string(extent));
  }
  std::vector<std::size_t> anchors;
  for (std::size_t a = 0; a + size <= extent; a += size) anchors.push_back(a);
  if (anchors.back() + size < extent) anchors.push_back(extent - size);
  return anchors;
}

std::vector<Region> tile_regions(std::size_t h, std::size_t w, std::size_t size) {
  std::vector<Region> regions;
  for (auto y : region_anchors(h, size)) {
    for (auto x : region_anchors(w, size)) regions.push_back({y, x, size, size});
  }
  return regions;
}

Vector region_features(const ImageTensor& t, const Region& r) {
  if (r.y + r.h > t.height() || r.x + r.w > t.width()) {
    throw DimensionError("region lies outside the grid");
  }
  Vector f(static_cast<Eigen::Index>(r.h * r.w * t.channels()));
  Eigen::Index at = 0;
  for (std::size_t dy = 0; dy < r.h; ++dy) {
    for (std::size_t dx = 0; dx < r.w; ++dx) {
      for (std::size_t c = 0; c < t.channels(); ++c) f[at++] = t.at(r.y + dy, r.x + dx, c);
    }
  }
  return f;
}

Neighbors find_neighbors(const Vector& query, const Matrix& bank,
                         std::size_t k_max) {
  if (bank.rows() == 0) throw InsufficientSamplesError("empty LLE bank");
  if (query.size() != bank.cols()) {
    throw DimensionError("LLE query has dimension " + std::to_string(query.size()) +
                         ", bank has " + std::to_string(bank.cols()));
  }
  const std::size_t k = std::min<std::size_t>(std::max<std::size_t>(k_max, 1),
                                              static_cast<std::size_t>(bank.rows()));
  // Sorted (distance^2, row) of the best k so far.
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(k + 1);
  for (Eigen::Index i = 0; i < bank.rows(); ++i) {
    const double d2 = (bank.row(i).transpose() - query).squaredNorm();
    if (best.size() == k && d2 >= best.back().first) continue;
    const std::pair<double, std::size_t> item{d2, static_cast<std::size_t>(i)};
    best.insert(std::upper_bound(best.begin(), best.end(), item), item);
    if (best.size() > k) best.pop_back();
  }

  Neighbors out;
  const double cutoff = kNeighborDistanceRatio * std::sqrt(best.front().first);
  for (const auto& [d2, row] : best) {
    const double d = std::sqrt(d2);
    if (!out.index.empty() && d > cutoff) break;
    out.index.push_back(row);
    out.distance.push_back(d);
  }
  return out;
}

Vector lle_weights(const Vector& query, const Matrix& neighbors) {
  const Eigen::Index k = neighbors.rows();
  if (k == 0) throw InsufficientSamplesError("lle_weights: no neighbors");
  if (neighbors.cols() != query.size()) {
    throw DimensionError("lle_weights: neighbor dimension mismatch");
  }
  if (k == 1) return Vector::Ones(1);

  // With sum(w) = 1 the residual is D^T w, D_i = query - neighbor_i. Write
  // w = w0 + N t where w0 is uniform and N spans the sum-zero subspace, then
  // solve the unconstrained least-squares problem in t (minimum norm).
  const Matrix diffs = (-neighbors).rowwise() + query.transpose();
  Matrix basis = Matrix::Zero(k, k - 1);
  for (Eigen::Index j = 1; j < k; ++j) {
    const double s = 1.0 / std::sqrt(static_cast<double>(j * (j + 1)));
    basis.col(j - 1).head(j).setConstant(s);
    basis(j, j - 1) = -static_cast<double>(j) * s;
  }
  const Vector w0 = Vector::Constant(k, 1.0 / static_cast<double>(k));
  const Matrix a = diffs.transpose() * basis;
  const Vector b = -(diffs.transpose() * w0);

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-8);
  cod.compute(a);
  const Vector t = cod.solve(b);
  return w0 + basis * t;
}

Recovery recover(const Vector& query_lf, const LLECodebook& book) {
  Recovery out;
  out.neighbors = find_neighbors(query_lf, book.lf_bank, book.k_max);
  const auto& idx = out.neighbors.index;
  std::vector<Eigen::Index> rows(idx.begin(), idx.end());
  const Matrix lf = book.lf_bank(rows, Eigen::all);
  out.weights = lle_weights(query_lf, lf);
  out.adjusted_lf = lf.transpose() * out.weights;
  out.estimated_hf =
      book.hf_bank(rows, Eigen::all).transpose() * out.weights;
  return out;
}

LLEStage build_codebooks(std::span<const ImageTensor> lf,
                         std::span<const ImageTensor> hf,
                         std::size_t region_size, std::size_t k_max) {
  if (lf.empty()) throw InsufficientSamplesError("build_codebooks: empty dataset");
  if (lf.size() != hf.size()) {
    throw DimensionError("build_codebooks: LF and HF datasets differ in length");
  }
  if (k_max < 1 || k_max > kMaxNeighbors) {
    throw ConfigError("LLE neighbor bound must lie in [1, 3]");
  }
  LLEStage stage;
  stage.grid_h = lf.front().height();
  stage.grid_w = lf.front().width();
  stage.lf_channels = lf.front().channels();
  stage.hf_channels = hf.front().channels();
  stage.region_size = region_size;
  for (std::size_t i = 0; i < lf.size(); ++i) {
    if (!lf[i].same_shape(lf.front()) || hf[i].height() != stage.grid_h ||
        hf[i].width() != stage.grid_w || hf[i].channels() != stage.hf_channels) {
      throw DimensionError("build_codebooks: inconsistent feature grids");
    }
  }

  const auto n = static_cast<Eigen::Index>(lf.size());
  for (const Region& r : tile_regions(stage.grid_h, stage.grid_w, region_size)) {
    LLECodebook book;
    book.region = r;
    book.k_max = k_max;
    book.lf_bank.resize(n, static_cast<Eigen::Index>(r.h * r.w * stage.lf_channels));
    book.hf_bank.resize(n, static_cast<Eigen::Index>(r.h * r.w * stage.hf_channels));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(i);
      book.lf_bank.row(i) = region_features(lf[s], r).transpose();
      if (stage.hf_channels > 0) {
        book.hf_bank.row(i) = region_features(hf[s], r).transpose();
      }
    }
    stage.books.push_back(std::move(book));
  }
  return stage;
}

namespace {

void accumulate(ImageTensor& sum, const Region& r, const Vector& f) {
  Eigen::Index at = 0;
  for (std::size_t dy = 0; dy < r.h; ++dy) {
    for (std::size_t dx = 0; dx < r.w; ++dx) {
      for (std::size_t c = 0; c < sum.channels(); ++c) {
        sum.at(r.y + dy, r.x + dx, c) += f[at++];
      }
    }
  }
}

}  // namespace

FieldRecovery recover_field(const ImageTensor& lf, const LLEStage& stage) {
  if (lf.height() != stage.grid_h || lf.width() != stage.grid_w ||
      lf.channels() != stage.lf_channels) {
    throw DimensionError("recover_field: LF grid does not match the stage");
  }
  FieldRecovery out{ImageTensor(stage.grid_h, stage.grid_w, stage.lf_channels),
                    ImageTensor(stage.grid_h, stage.grid_w, stage.hf_channels)};
  std::vector<double> hits(stage.grid_h * stage.grid_w, 0.0);
  for (const auto& book : stage.books) {
    const Recovery rec = recover(region_features(lf, book.region), book);
    accumulate(out.lf, book.region, rec.adjusted_lf);
    if (stage.hf_channels > 0) accumulate(out.hf, book.region, rec.estimated_hf);
    for (std::size_t dy = 0; dy < book.region.h; ++dy) {
      for (std::size_t dx = 0; dx < book.region.w; ++dx) {
        hits[(book.region.y + dy) * stage.grid_w + book.region.x + dx] += 1.0;
      }
    }
  }
  auto normalize = [&](ImageTensor& t) {
    auto d = t.data();
    const std::size_t c = t.channels();
    for (std::size_t p = 0; p < hits.size(); ++p) {
      for (std::size_t k = 0; k < c; ++k) d[p * c + k] /= hits[p];
    }
  };
  normalize(out.lf);
  normalize(out.hf);
  return out;
}

}  // namespace genhop
