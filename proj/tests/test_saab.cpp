#include <doctest.h>

#include <cmath>
#include <random>

#include "genhop/errors.hpp"
#include "genhop/saab.hpp"

using namespace genhop;

namespace {

ImageTensor random_image(std::size_t h, std::size_t w, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageTensor t(h, w, c);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

// Smooth random images so the bases have a clear energy ordering.
std::vector<ImageTensor> smooth_images(std::size_t n, std::size_t side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ImageTensor> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng), d = 0.1 * u(rng);
    ImageTensor t(side, side, 1);
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        t.at(y, x, 0) = 0.5 + 0.3 * std::sin(a * y + b * x + c) + d * u(rng);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

void check_orthonormal(const SaabBasis& b) {
  const Matrix k = b.kernels();
  CHECK((k * k.transpose() - Matrix::Identity(k.rows(), k.rows())).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i = 2; i < b.energies.size(); ++i) CHECK(b.energies[i] <= b.energies[i - 1]);
}

}  // namespace

TEST_CASE("fit_saab: toy two-sample set") {
  Matrix blocks(4, 4);
  // Repeat the two samples so there are at least N rows.
  blocks << 1, 0, 0, 0,
            0, 1, 0, 0,
            1, 0, 0, 0,
            0, 1, 0, 0;
  const SaabBasis b = fit_saab(blocks);
  check_orthonormal(b);
  CHECK(b.dc_kernel.isApprox(Vector::Constant(4, 0.5)));
  // Hand eigendecomposition: AC eigenvalues 1/2, 1/4, 0; DC energy 1/4.
  CHECK(b.energies[0] == doctest::Approx(0.25));
  CHECK(b.energies[1] == doctest::Approx(0.5));
  CHECK(b.energies[2] == doctest::Approx(0.25));
  CHECK(b.energies[3] == doctest::Approx(0.0));
  const Eigen::RowVector4d lead(1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0, 0);
  CHECK((b.ac_kernels.row(0) - lead).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit_saab: constant blocks have zero AC energy") {
  Matrix blocks(10, 4);
  for (int i = 0; i < 10; ++i) blocks.row(i).setConstant(0.1 * i);
  const SaabBasis b = fit_saab(blocks);
  check_orthonormal(b);
  CHECK(b.energies.tail(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b.energies[0] > 0.0);
}

TEST_CASE("fit_saab: i.i.d. Gaussian blocks are isotropic") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n;
  Matrix blocks(100000, 4);
  for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = n(rng);
  const SaabBasis b = fit_saab(blocks);
  check_orthonormal(b);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(b.energies[i] - 1.0) <= 0.05);
}

TEST_CASE("fit_saab: errors and sign convention") {
  CHECK_THROWS_AS(fit_saab(Matrix::Zero(3, 4)), InsufficientSamplesError);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Matrix blocks(200, 9);
  for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = n(rng);
  const SaabBasis b = fit_saab(blocks);
  check_orthonormal(b);
  for (Eigen::Index r = 0; r < b.ac_kernels.rows(); ++r) {
    Eigen::Index at = 0;
    b.ac_kernels.row(r).cwiseAbs().maxCoeff(&at);
    CHECK(b.ac_kernels(r, at) > 0.0);
    CHECK(std::abs(b.ac_kernels.row(r).sum()) < 1e-12);
  }
}

TEST_CASE("saab_forward / saab_inverse examples") {
  std::mt19937_64 rng(7);
  std::vector<ImageTensor> train = smooth_images(50, 4, rng);
  Matrix rows(0, 4);
  for (const auto& t : train) {
    const Matrix r = blocks_to_rows(t, {2, 2});
    rows.conservativeResize(rows.rows() + r.rows(), 4);
    rows.bottomRows(r.rows()) = r;
  }
  const SaabBasis b = fit_saab(rows);

  SUBCASE("constant image") {
    ImageTensor t(4, 4, 1);
    for (auto& v : t.data()) v = 0.3;
    const ImageTensor f = saab_forward(t, b, {2, 2});
    CHECK(f.height() == 2);
    CHECK(f.channels() == 4);
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t x = 0; x < 2; ++x) {
        CHECK(f.at(y, x, 0) == doctest::Approx(0.6));
        for (std::size_t c = 1; c < 4; ++c) CHECK(std::abs(f.at(y, x, c)) < 1e-14);
      }
    }
  }
  SUBCASE("zero image") {
    CHECK(saab_forward(ImageTensor(4, 4, 1), b, {2, 2}) == ImageTensor(2, 2, 4));
    CHECK(saab_inverse(ImageTensor(2, 2, 4), b, {2, 2}) == ImageTensor(4, 4, 1));
  }
  SUBCASE("DC-only tensor colors back to a constant image") {
    ImageTensor dc(2, 2, 4);
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 2; ++x) dc.at(y, x, 0) = 2 * 0.7;
    const ImageTensor img = saab_inverse(dc, b, {2, 2});
    for (double v : img.data()) CHECK(v == doctest::Approx(0.7));
  }
  SUBCASE("random round trip") {
    for (int i = 0; i < 20; ++i) {
      const ImageTensor t = random_image(4, 4, 1, rng);
      CHECK(max_abs_diff(saab_inverse(saab_forward(t, b, {2, 2}), b, {2, 2}), t) <= 1e-10);
    }
  }
  SUBCASE("dimension errors") {
    CHECK_THROWS_AS(saab_forward(ImageTensor(4, 4, 2), b, {2, 2}), DimensionError);
    CHECK_THROWS_AS(saab_inverse(ImageTensor(2, 2, 3), b, {2, 2}), DimensionError);
  }
}

TEST_CASE("cascade: MNIST configuration shapes") {
  std::mt19937_64 rng(11);
  const auto images = smooth_images(30, 28, rng);
  const CascadeModel m = fit_cascade(images, {{2, 2}, 2, 1}, {{2, 2}, 4, 3});
  CHECK(m.hop2.size() == 2);
  CHECK(m.channel_order.size() == 8);
  const CascadeOutput out = cascade_forward(images[0], m);
  CHECK(out.s4.height() == 7);
  CHECK(out.s4.width() == 7);
  CHECK(out.s4.channels() == 4);
  CHECK(out.hf1.height() == 14);
  CHECK(out.hf1.channels() == 1);
  CHECK(out.hf2.channels() == 3);
  CHECK(hop1_forward(images[0], m).channels() == 4);

  // Channel ranking follows parent x child normalized energy.
  const auto e = m.child_energies();
  for (std::size_t i = 1; i < m.channel_order.size(); ++i) {
    CHECK(e[m.channel_order[i - 1]] >= e[m.channel_order[i]]);
  }
  CHECK(m.channel_order[0] == 0);  // DC of the DC parent
}

TEST_CASE("cascade: identical images") {
  ImageTensor img(8, 8, 1);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) img.at(y, x, 0) = 0.1 * ((x + y) % 3);
  std::vector<ImageTensor> images(10, img);
  const CascadeModel m = fit_cascade(images, {{2, 2}, 2, 1}, {{2, 2}, 4, 3});
  std::vector<std::size_t> sorted = m.channel_order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);

  ImageTensor constant(8, 8, 1);
  for (auto& v : constant.data()) v = 0.5;
  std::vector<ImageTensor> flat(10, constant);
  const CascadeModel mf = fit_cascade(flat, {{2, 2}, 2, 1}, {{2, 2}, 4, 3});
  CHECK(mf.hop1.energies.tail(3).isZero(0.0));
  const CascadeOutput out = cascade_forward(constant, mf);
  // Only the DC lineage (channel 0 of s4) carries signal.
  for (std::size_t c = 0; c < out.s4.channels(); ++c) {
    const double norm = out.s4.channel_vector(c).cwiseAbs().maxCoeff();
    if (c == 0) CHECK(norm > 0.5);
    else CHECK(norm < 1e-12);
  }
}

TEST_CASE("cascade: lossless when nothing is discarded") {
  std::mt19937_64 rng(3);
  const auto images = smooth_images(20, 8, rng);
  // hop 1 forwards 2 channels and keeps the other 2 as HF; hop 2 keeps all 8.
  const CascadeModel m = fit_cascade(images, {{2, 2}, 2, 2}, {{2, 2}, 5, 3});
  for (int i = 0; i < 10; ++i) {
    const ImageTensor t = random_image(8, 8, 1, rng);
    const CascadeOutput out = cascade_forward(t, m);
    CHECK(max_abs_diff(cascade_inverse(out.s4, out.hf2, out.hf1, m), t) <= 1e-8);
  }
  const ImageTensor zero =
      cascade_inverse(ImageTensor(2, 2, 5), ImageTensor(2, 2, 3), ImageTensor(4, 4, 2), m);
  CHECK(zero == ImageTensor(8, 8, 1));
}

TEST_CASE("cascade: configuration and shape errors") {
  std::mt19937_64 rng(9);
  const auto images = smooth_images(5, 8, rng);
  CHECK_THROWS_AS(fit_cascade(images, {{2, 2}, 3, 2}, {{2, 2}, 4, 3}), ConfigError);
  CHECK_THROWS_AS(fit_cascade(images, {{2, 2}, 2, 1}, {{2, 2}, 6, 3}), ConfigError);
  CHECK_THROWS_AS(fit_cascade(images, {{2, 2}, 0, 1}, {{2, 2}, 4, 3}), ConfigError);
  CHECK_THROWS_AS(fit_cascade(images, {{3, 3}, 2, 1}, {{2, 2}, 4, 3}), ConfigError);
  const CascadeModel m = fit_cascade(images, {{2, 2}, 2, 1}, {{2, 2}, 4, 3});
  CHECK_THROWS_AS(cascade_forward(ImageTensor(4, 4, 1), m), DimensionError);
  CHECK_THROWS_AS(cascade_inverse(ImageTensor(2, 2, 3), ImageTensor(2, 2, 3),
                                  ImageTensor(4, 4, 1), m),
                  DimensionError);
}

TEST_CASE("hop-1 responses are decorrelated and energy-ordered on held-out data") {
  std::mt19937_64 rng(21);
  const auto train = smooth_images(400, 8, rng);
  const auto held = smooth_images(400, 8, rng);
  const CascadeModel m = fit_cascade(train, {{2, 2}, 2, 1}, {{2, 2}, 4, 3});

  auto ac_rows = [&](const std::vector<ImageTensor>& set) {
    Matrix rows(0, 3);
    for (const auto& t : set) {
      const Matrix r = rows_from_grid(hop1_forward(t, m)).rightCols(3);
      rows.conservativeResize(rows.rows() + r.rows(), 3);
      rows.bottomRows(r.rows()) = r;
    }
    return rows;
  };
  const Matrix fit_rows = ac_rows(train);
  const Matrix centered = fit_rows.rowwise() - fit_rows.colwise().mean();
  const Matrix cov = centered.transpose() * centered;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) {
      CHECK(std::abs(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j))) <= 0.02);
    }
  }
  const Matrix held_rows = ac_rows(held);
  const Matrix hc = held_rows.rowwise() - held_rows.colwise().mean();
  const Vector var = hc.colwise().squaredNorm() / static_cast<double>(hc.rows());
  for (int i = 1; i < 3; ++i) CHECK(var[i - 1] >= 0.95 * var[i]);
}
