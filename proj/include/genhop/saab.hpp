#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "genhop/tensor.hpp"

namespace genhop {

/// One whitening unit: a constant DC kernel plus PCA-derived AC kernels of
/// the DC-removed block space. The kernel set is orthonormal, so the transform
/// is inverted by its transpose.
struct SaabBasis {
  Vector dc_kernel;   // length N, all entries 1/sqrt(N)
  Matrix ac_kernels;  // (N-1) x N, rows sorted by descending energy
  Vector energies;    // length N: DC energy, then AC eigenvalues

  std::size_t block_dim() const {
    return static_cast<std::size_t>(dc_kernel.size());
  }
  /// N x N matrix whose first row is the DC kernel followed by the AC rows.
  Matrix kernels() const;
  /// Energies divided by their sum (all zero when the sum is zero).
  Vector normalized_energies() const;
};

/// Fits a Saab basis on block rows (num_samples x N). Energies are second
/// moments: the DC energy is E[(dc . x)^2] and the AC energies are the
/// eigenvalues of E[a a^T] for the DC-removed block a. No further mean is
/// subtracted.
SaabBasis fit_saab(const Matrix& blocks);

/// Output is (H/bh) x (W/bw) x N with channels ordered [DC, AC1, ...].
ImageTensor saab_forward(const ImageTensor& t, const SaabBasis& basis,
                         const BlockSpec& spec);
ImageTensor saab_inverse(const ImageTensor& t, const SaabBasis& basis,
                         const BlockSpec& spec);

struct HopConfig {
  BlockSpec block;
  std::size_t keep_low = 1;   // channels forwarded to the next stage
  std::size_t keep_high = 0;  // channels discarded now and re-estimated later

  friend bool operator==(const HopConfig&, const HopConfig&) = default;
};

/// Two-hop cascade: a Saab unit on the input, followed by a channel-wise
/// Saab unit on each forwarded hop-1 channel.
struct CascadeModel {
  std::size_t in_h = 0;
  std::size_t in_w = 0;
  std::size_t in_c = 0;
  HopConfig hop1_cfg;
  SaabBasis hop1;
  HopConfig hop2_cfg;
  std::vector<SaabBasis> hop2;  // one per forwarded hop-1 channel
  /// Hop-2 children ranked by descending energy. Child index is
  /// parent * hop2_block_dim + j.
  std::vector<std::size_t> channel_order;

  std::size_t s1_h() const { return in_h / hop1_cfg.block.block_h; }
  std::size_t s1_w() const { return in_w / hop1_cfg.block.block_w; }
  std::size_t s1_channels() const { return hop1.block_dim(); }
  std::size_t s4_h() const { return s1_h() / hop2_cfg.block.block_h; }
  std::size_t s4_w() const { return s1_w() / hop2_cfg.block.block_w; }
  std::size_t hop2_block_dim() const { return hop2_cfg.block.area(); }
  std::size_t hop2_children() const {
    return hop1_cfg.keep_low * hop2_block_dim();
  }
  /// Energy of every hop-2 child: parent normalized energy times child
  /// normalized energy.
  std::vector<double> child_energies() const;
};

struct CascadeOutput {
  ImageTensor s4;   // s4_h x s4_w x hop2.keep_low
  ImageTensor hf1;  // s1_h x s1_w x hop1.keep_high
  ImageTensor hf2;  // s4_h x s4_w x hop2.keep_high
};

/// Throws ConfigError if the two hop configurations cannot be applied to
/// images of the given shape.
void validate_cascade_config(std::size_t h, std::size_t w, std::size_t c,
                             const HopConfig& cfg1, const HopConfig& cfg2);

CascadeModel fit_cascade(std::span<const ImageTensor> images,
                         const HopConfig& cfg1, const HopConfig& cfg2);

CascadeOutput cascade_forward(const ImageTensor& t, const CascadeModel& m);

/// Discarded channels are zero-filled before inversion.
ImageTensor cascade_inverse(const ImageTensor& s4, const ImageTensor& hf2,
                            const ImageTensor& hf1, const CascadeModel& m);

// Individual stages of the cascade, used by synthesis.

/// Full hop-1 response (S1 with every channel).
ImageTensor hop1_forward(const ImageTensor& t, const CascadeModel& m);
/// Hop-2 inverse: rebuilds the forwarded hop-1 channels (keep_low of them).
ImageTensor hop2_inverse(const ImageTensor& s4, const ImageTensor& hf2,
                         const CascadeModel& m);
/// Hop-1 inverse from the forwarded channels plus the hop-1 HF channels.
ImageTensor hop1_inverse(const ImageTensor& lf1, const ImageTensor& hf1,
                         const CascadeModel& m);

}  // namespace genhop
