#include "genhop/saab.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "genhop/errors.hpp"
#include "linalg.hpp"

namespace genhop {

Matrix SaabBasis::kernels() const {
  const auto n = static_cast<Eigen::Index>(block_dim());
  Matrix k(n, n);
  k.row(0) = dc_kernel.transpose();
  if (n > 1) k.bottomRows(n - 1) = ac_kernels;
  return k;
}

Vector SaabBasis::normalized_energies() const {
  const double total = energies.sum();
  if (total <= 0.0) return Vector::Zero(energies.size());
  return energies / total;
}

namespace {

// Orthonormal rows spanning the complement of the all-ones direction
// (Helmert construction).
Matrix dc_complement(Eigen::Index n) {
  Matrix q = Matrix::Zero(n - 1, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(k * (k + 1)));
    q.row(k - 1).head(k).setConstant(scale);
    q(k - 1, k) = -static_cast<double>(k) * scale;
  }
  return q;
}

}  // namespace

SaabBasis fit_saab(const Matrix& blocks) {
  const Eigen::Index n = blocks.cols();
  const Eigen::Index m = blocks.rows();
  if (n < 1) throw DimensionError("fit_saab: empty block dimension");
  if (m < n) {
    throw InsufficientSamplesError("fit_saab: " + std::to_string(m) +
                                   " samples for block dimension " +
                                   std::to_string(n));
  }

  const Matrix moment =
      (blocks.transpose() * blocks) / static_cast<double>(m);

  SaabBasis basis;
  basis.dc_kernel = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  basis.energies = Vector::Zero(n);
  basis.energies[0] = basis.dc_kernel.dot(moment * basis.dc_kernel);

  if (n == 1) {
    basis.ac_kernels = Matrix(0, 1);
    return basis;
  }

  // Q x equals Q a for the DC-removed block a, so projecting the raw moment
  // gives the AC moment directly.
  const Matrix q = dc_complement(n);
  const Matrix reduced = q * moment * q.transpose();
  auto eig = detail::symmetric_eigen_descending(0.5 * (reduced + reduced.transpose()));
  detail::clamp_small_eigenvalues(eig.values);

  basis.ac_kernels = eig.vectors.transpose() * q;
  for (Eigen::Index r = 0; r < n - 1; ++r) {
    basis.ac_kernels.row(r).normalize();
    detail::fix_sign(basis.ac_kernels.row(r));
  }
  basis.energies.tail(n - 1) = eig.values;
  return basis;
}

ImageTensor saab_forward(const ImageTensor& t, const SaabBasis& basis,
                         const BlockSpec& spec) {
  const std::size_t n = spec.area() * t.channels();
  if (n != basis.block_dim()) {
    throw DimensionError("saab_forward: block dimension " + std::to_string(n) +
                         " does not match basis dimension " +
                         std::to_string(basis.block_dim()));
  }
  const Matrix rows = blocks_to_rows(t, spec);
  const Matrix responses = rows * basis.kernels().transpose();
  return grid_from_rows(responses, t.height() / spec.block_h,
                        t.width() / spec.block_w);
}

ImageTensor saab_inverse(const ImageTensor& t, const SaabBasis& basis,
                         const BlockSpec& spec) {
  if (t.channels() != basis.block_dim()) {
    throw DimensionError("saab_inverse: got " + std::to_string(t.channels()) +
                         " channels, basis has " +
                         std::to_string(basis.block_dim()));
  }
  if (basis.block_dim() % spec.area() != 0) {
    throw DimensionError("saab_inverse: basis does not match block spec");
  }
  const Matrix rows = rows_from_grid(t) * basis.kernels();
  return rows_to_blocks(rows, spec, t.height() * spec.block_h,
                        t.width() * spec.block_w,
                        basis.block_dim() / spec.area());
}

std::vector<double> CascadeModel::child_energies() const {
  const Vector parent = hop1.normalized_energies();
  std::vector<double> out;
  out.reserve(hop2_children());
  for (std::size_t p = 0; p < hop2.size(); ++p) {
    const Vector child = hop2[p].normalized_energies();
    for (Eigen::Index j = 0; j < child.size(); ++j) {
      out.push_back(parent[static_cast<Eigen::Index>(p)] * child[j]);
    }
  }
  return out;
}

void validate_cascade_config(std::size_t h, std::size_t w, std::size_t c,
                             const HopConfig& cfg1, const HopConfig& cfg2) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (h == 0 || w == 0 || c == 0) fail("input shape must be non-empty");
  if (cfg1.block.block_h == 0 || cfg1.block.block_w == 0 ||
      cfg2.block.block_h == 0 || cfg2.block.block_w == 0) {
    fail("block sizes must be positive");
  }
  if (h % cfg1.block.block_h || w % cfg1.block.block_w) {
    fail("input is not divisible by the hop-1 block");
  }
  const std::size_t h1 = h / cfg1.block.block_h;
  const std::size_t w1 = w / cfg1.block.block_w;
  if (h1 % cfg2.block.block_h || w1 % cfg2.block.block_w) {
    fail("hop-1 output is not divisible by the hop-2 block");
  }
  const std::size_t n1 = cfg1.block.area() * c;
  if (cfg1.keep_low < 1 || cfg1.keep_low + cfg1.keep_high > n1) {
    fail("hop-1 keeps " + std::to_string(cfg1.keep_low) + "+" +
         std::to_string(cfg1.keep_high) + " of " + std::to_string(n1) +
         " channels");
  }
  const std::size_t n2 = cfg2.block.area() * cfg1.keep_low;
  if (cfg2.keep_low < 1 || cfg2.keep_low + cfg2.keep_high > n2) {
    fail("hop-2 keeps " + std::to_string(cfg2.keep_low) + "+" +
         std::to_string(cfg2.keep_high) + " of " + std::to_string(n2) +
         " channels");
  }
}

namespace {

Matrix stack_rows(const std::vector<Matrix>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

void check_input(const ImageTensor& t, const CascadeModel& m) {
  if (t.height() != m.in_h || t.width() != m.in_w || t.channels() != m.in_c) {
    throw DimensionError("cascade: image shape does not match the model");
  }
}

void check_shape(const ImageTensor& t, std::size_t h, std::size_t w,
                 std::size_t c, const char* what) {
  // Zero-channel tensors may be passed as default-constructed.
  if (c == 0 && t.channels() == 0) return;
  if (t.height() != h || t.width() != w || t.channels() != c) {
    throw DimensionError(std::string("cascade: ") + what +
                         " shape does not match the model");
  }
}

}  // namespace

CascadeModel fit_cascade(std::span<const ImageTensor> images,
                         const HopConfig& cfg1, const HopConfig& cfg2) {
  if (images.empty()) throw InsufficientSamplesError("fit_cascade: no images");
  const auto& first = images.front();
  validate_cascade_config(first.height(), first.width(), first.channels(),
                          cfg1, cfg2);
  for (const auto& img : images) {
    if (!img.same_shape(first)) {
      throw DimensionError("fit_cascade: images differ in shape");
    }
  }

  CascadeModel m;
  m.in_h = first.height();
  m.in_w = first.width();
  m.in_c = first.channels();
  m.hop1_cfg = cfg1;
  m.hop2_cfg = cfg2;

  std::vector<Matrix> parts;
  parts.reserve(images.size());
  for (const auto& img : images) parts.push_back(blocks_to_rows(img, cfg1.block));
  m.hop1 = fit_saab(stack_rows(parts));

  std::vector<ImageTensor> s1;
  s1.reserve(images.size());
  for (const auto& img : images) s1.push_back(saab_forward(img, m.hop1, cfg1.block));

  m.hop2.reserve(cfg1.keep_low);
  for (std::size_t p = 0; p < cfg1.keep_low; ++p) {
    parts.clear();
    for (const auto& t : s1) {
      parts.push_back(blocks_to_rows(t.channel_slice(p, 1), cfg2.block));
    }
    m.hop2.push_back(fit_saab(stack_rows(parts)));
  }

  const auto energy = m.child_energies();
  m.channel_order.resize(energy.size());
  std::iota(m.channel_order.begin(), m.channel_order.end(), std::size_t{0});
  std::stable_sort(m.channel_order.begin(), m.channel_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return energy[a] > energy[b];
                   });
  return m;
}

ImageTensor hop1_forward(const ImageTensor& t, const CascadeModel& m) {
  check_input(t, m);
  return saab_forward(t, m.hop1, m.hop1_cfg.block);
}

CascadeOutput cascade_forward(const ImageTensor& t, const CascadeModel& m) {
  const ImageTensor s1 = hop1_forward(t, m);
  const std::size_t k1l = m.hop1_cfg.keep_low;
  const std::size_t n2 = m.hop2_block_dim();

  CascadeOutput out;
  out.hf1 = s1.channel_slice(k1l, m.hop1_cfg.keep_high);

  ImageTensor children(m.s4_h(), m.s4_w(), m.hop2_children());
  for (std::size_t p = 0; p < k1l; ++p) {
    const ImageTensor r =
        saab_forward(s1.channel_slice(p, 1), m.hop2[p], m.hop2_cfg.block);
    for (std::size_t j = 0; j < n2; ++j) {
      children.set_channel(p * n2 + j, r.channel_vector(j));
    }
  }

  const std::size_t k2l = m.hop2_cfg.keep_low;
  const std::size_t k2h = m.hop2_cfg.keep_high;
  out.s4 = ImageTensor(m.s4_h(), m.s4_w(), k2l);
  out.hf2 = ImageTensor(m.s4_h(), m.s4_w(), k2h);
  for (std::size_t i = 0; i < k2l; ++i) {
    out.s4.set_channel(i, children.channel_vector(m.channel_order[i]));
  }
  for (std::size_t i = 0; i < k2h; ++i) {
    out.hf2.set_channel(i, children.channel_vector(m.channel_order[k2l + i]));
  }
  return out;
}

ImageTensor hop2_inverse(const ImageTensor& s4, const ImageTensor& hf2,
                         const CascadeModel& m) {
  const std::size_t k2l = m.hop2_cfg.keep_low;
  const std::size_t k2h = m.hop2_cfg.keep_high;
  check_shape(s4, m.s4_h(), m.s4_w(), k2l, "s4");
  check_shape(hf2, m.s4_h(), m.s4_w(), k2h, "hf2");

  const std::size_t n2 = m.hop2_block_dim();
  ImageTensor children(m.s4_h(), m.s4_w(), m.hop2_children());
  for (std::size_t i = 0; i < k2l; ++i) {
    children.set_channel(m.channel_order[i], s4.channel_vector(i));
  }
  for (std::size_t i = 0; i < k2h; ++i) {
    children.set_channel(m.channel_order[k2l + i], hf2.channel_vector(i));
  }

  const std::size_t k1l = m.hop1_cfg.keep_low;
  ImageTensor lf1(m.s1_h(), m.s1_w(), k1l);
  for (std::size_t p = 0; p < k1l; ++p) {
    const ImageTensor parent = saab_inverse(children.channel_slice(p * n2, n2),
                                            m.hop2[p], m.hop2_cfg.block);
    lf1.set_channel(p, parent.channel_vector(0));
  }
  return lf1;
}

ImageTensor hop1_inverse(const ImageTensor& lf1, const ImageTensor& hf1,
                         const CascadeModel& m) {
  const std::size_t k1l = m.hop1_cfg.keep_low;
  const std::size_t k1h = m.hop1_cfg.keep_high;
  check_shape(lf1, m.s1_h(), m.s1_w(), k1l, "hop-1 LF");
  check_shape(hf1, m.s1_h(), m.s1_w(), k1h, "hf1");

  ImageTensor s1(m.s1_h(), m.s1_w(), m.s1_channels());
  for (std::size_t c = 0; c < k1l; ++c) s1.set_channel(c, lf1.channel_vector(c));
  for (std::size_t c = 0; c < k1h; ++c) {
    s1.set_channel(k1l + c, hf1.channel_vector(c));
  }
  return saab_inverse(s1, m.hop1, m.hop1_cfg.block);
}

ImageTensor cascade_inverse(const ImageTensor& s4, const ImageTensor& hf2,
                            const ImageTensor& hf1, const CascadeModel& m) {
  return hop1_inverse(hop2_inverse(s4, hf2, m), hf1, m);
}

}  // namespace genhop
