#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "genhop/errors.hpp"
#include "genhop/seed.hpp"

using namespace genhop;

namespace {

double ks_normal(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = standard_normal_cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

std::vector<ImageTensor> gaussian_fields(std::size_t n, std::size_t side, std::size_t c,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<ImageTensor> out;
  for (std::size_t i = 0; i < n; ++i) {
    ImageTensor t(side, side, c);
    const double shift = (i % 3) * 4.0;  // three well separated modes
    for (auto& v : t.data()) v = shift + g(rng);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("spatial PCA: gamma keeps the dominant component only") {
  const double a = std::sqrt(19.0);
  std::vector<ImageTensor> s = {ImageTensor(1, 2, 1, {a, 0}), ImageTensor(1, 2, 1, {-a, 0}),
                                ImageTensor(1, 2, 1, {0, 1}), ImageTensor(1, 2, 1, {0, -1})};
  const SpatialPCA pca = fit_spatial_pca(s, 0.1);
  REQUIRE(pca.reduced_dim() == 1);
  CHECK(pca.channels[0].normalized[0] == doctest::Approx(0.95));
  CHECK(std::abs(pca.channels[0].components(0, 0)) == doctest::Approx(1.0));
  CHECK(fit_spatial_pca(s, 0.01).reduced_dim() == 2);
}

TEST_CASE("spatial PCA: identical samples leave nothing") {
  std::vector<ImageTensor> s(20, ImageTensor(2, 2, 3, std::vector<double>(12, 0.4)));
  CHECK(fit_spatial_pca(s, 0.01).reduced_dim() == 0);
  CHECK_THROWS_AS(fit_seed_model(s, SeedOptions{}), DegenerateDataError);
}

TEST_CASE("property: project / unproject round trip on the retained subspace") {
  const auto s = gaussian_fields(200, 3, 2, 17);
  const SpatialPCA pca = fit_spatial_pca(s, 1e-12);
  CHECK(pca.reduced_dim() == 18);
  for (std::size_t i = 0; i < 10; ++i) {
    const ImageTensor back = pca.unproject(pca.project(s[i]));
    for (std::size_t j = 0; j < back.size(); ++j) {
      CHECK(std::abs(back.data()[j] - s[i].data()[j]) <= 1e-10);
    }
  }
  const SpatialPCA reduced = fit_spatial_pca(s, 0.05);
  const Vector v = reduced.project(s[0]);
  CHECK((reduced.project(reduced.unproject(v)) - v).cwiseAbs().maxCoeff() <= 1e-10);

  // A zero-mean fit maps zero to zero both ways.
  std::vector<ImageTensor> sym;
  for (const auto& t : s) {
    ImageTensor neg = t;
    for (auto& x : neg.data()) x = -x;
    sym.push_back(t);
    sym.push_back(std::move(neg));
  }
  const SpatialPCA centered = fit_spatial_pca(sym, 1e-12);
  CHECK(centered.project(ImageTensor(3, 3, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  const ImageTensor z = centered.unproject(Vector::Zero(centered.reduced_dim()));
  for (double x : z.data()) CHECK(std::abs(x) <= 1e-10);
}

TEST_CASE("k-means basics") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.1);
  Matrix pts(200, 2);
  for (int i = 0; i < 200; ++i) {
    const double off = i < 100 ? -5.0 : 5.0;
    pts(i, 0) = off + g(rng);
    pts(i, 1) = g(rng);
  }
  SUBCASE("two blobs") {
    const KMeansResult r = fit_clusters(pts, 2, 1);
    REQUIRE(r.centroids.rows() == 2);
    for (int i = 1; i < 100; ++i) CHECK(r.labels[i] == r.labels[0]);
    for (int i = 100; i < 200; ++i) CHECK(r.labels[i] != r.labels[0]);
    CHECK(r.priors.sum() == doctest::Approx(1.0));
    CHECK(r.priors[0] == doctest::Approx(0.5));
  }
  SUBCASE("one cluster is the mean") {
    const KMeansResult r = fit_clusters(pts, 1, 1);
    CHECK((r.centroids.row(0) - pts.colwise().mean()).norm() < 1e-12);
    CHECK(r.priors[0] == 1.0);
  }
  SUBCASE("as many clusters as points") {
    const Matrix few = pts.topRows(5);
    const KMeansResult r = fit_clusters(few, 5, 3);
    CHECK(r.centroids.rows() == 5);
    CHECK(r.inertia == doctest::Approx(0.0));
  }
  SUBCASE("duplicate points drop clusters") {
    Matrix dup(10, 2);
    for (int i = 0; i < 10; ++i) dup.row(i) << (i % 2), 0.0;
    const KMeansResult r = fit_clusters(dup, 4, 3);
    CHECK(r.centroids.rows() == 2);
    CHECK(r.priors.sum() == doctest::Approx(1.0));
  }
  SUBCASE("deterministic") {
    const KMeansResult a = fit_clusters(pts, 3, 99);
    const KMeansResult b = fit_clusters(pts, 3, 99);
    CHECK(a.centroids == b.centroids);
    CHECK(a.labels == b.labels);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_clusters(pts, 0, 1), ConfigError);
    CHECK_THROWS_AS(fit_clusters(pts.topRows(3), 4, 1), InsufficientSamplesError);
  }
}

TEST_CASE("histogram matching examples") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> xs(5000);
  for (auto& x : xs) x = g(rng);
  const CdfTable t = make_cdf_table(xs);
  for (double v : {-2.0, -1.0, -0.3, 0.0, 0.4, 1.5, 2.2}) {
    CHECK(std::abs(gaussianize(v, t) - v) <= 0.1);
  }
  // g = 0 maps to the median.
  std::vector<double> sorted = t.values;
  const double median = 0.5 * (sorted[2499] + sorted[2500]);
  CHECK(degaussianize(0.0, t) == doctest::Approx(median));

  const CdfTable flat = make_cdf_table(std::vector<double>(50, 3.0));
  CHECK(gaussianize(3.0, flat) == doctest::Approx(0.0));
  CHECK(degaussianize(-1.0, flat) == 3.0);
  CHECK(degaussianize(2.5, flat) == 3.0);
  CHECK_THROWS_AS(make_cdf_table({}), InsufficientSamplesError);
}

TEST_CASE("property: histogram matching is monotone and invertible") {
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> e(1.5);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = e(rng);
  const CdfTable t = make_cdf_table(xs);
  double prev = -1e300;
  for (double v = -1.0; v < 8.0; v += 0.01) {
    const double gv = gaussianize(v, t);
    CHECK(gv >= prev);
    prev = gv;
  }
  double prev_d = -1e300;
  for (double gv = -5.0; gv < 5.0; gv += 0.01) {
    const double d = degaussianize(gv, t);
    CHECK(d >= prev_d);
    prev_d = d;
  }
  for (double x : xs) CHECK(std::abs(degaussianize(gaussianize(x, t), t) - x) <= 1e-9);
  CHECK(std::abs(standard_normal_quantile(standard_normal_cdf(1.3)) - 1.3) < 1e-12);
}

TEST_CASE("ICA: Gaussian input is mapped onto N(0, 1)") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Matrix m(2000, 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double a = g(rng), b = g(rng), c = g(rng);
    m.row(i) << a + 0.5 * b, b - c, 2.0 * c + 1.0;
  }
  const ClusterDensity d = fit_ica_and_cdf(m, IcaOptions{1e-4, 500, 3});
  std::vector<std::vector<double>> comps(3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Vector z = d.to_gaussian(m.row(i).transpose());
    for (int k = 0; k < 3; ++k) comps[k].push_back(z[k]);
    CHECK((d.from_gaussian(z) - m.row(i).transpose()).cwiseAbs().maxCoeff() <= 1e-6);
  }
  for (const auto& c : comps) CHECK(ks_normal(c) <= 0.05);
  CHECK((d.unmixing * d.mixing - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ICA: rotated uniform square is unmixed along its axes") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double theta = std::numbers::pi / 6.0;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  Matrix m(4000, 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) = (rot * Eigen::Vector2d(u(rng), 0.5 * u(rng))).transpose();
  }
  const ClusterDensity d = fit_ica_and_cdf(m, IcaOptions{1e-4, 500, 1});
  CHECK(d.kind == UnmixingKind::kIca);
  for (int r = 0; r < 2; ++r) {
    const double ang = std::atan2(d.unmixing(r, 1), d.unmixing(r, 0));
    double rel = std::fmod(ang - theta, std::numbers::pi / 2.0);
    if (rel < 0) rel += std::numbers::pi / 2.0;
    const double off = std::min(rel, std::numbers::pi / 2.0 - rel);
    CHECK(off * 180.0 / std::numbers::pi <= 5.0);
  }
}

TEST_CASE("ICA: too few members fall back to identity") {
  Matrix m(3, 4);
  m.setRandom();
  const ClusterDensity d = fit_ica_and_cdf(m);
  CHECK(d.kind == UnmixingKind::kIdentity);
  CHECK(d.unmixing == Matrix::Identity(4, 4));
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Vector v = m.row(i).transpose();
    CHECK((d.from_gaussian(d.to_gaussian(v)) - v).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("seed model: determinism, inversion and cluster selection") {
  const auto s4 = gaussian_fields(600, 3, 2, 23);
  SeedOptions opts;
  opts.gamma = 0.02;
  opts.clusters = 3;
  opts.seed = 5;
  const SeedModel a = fit_seed_model(s4, opts);
  const SeedModel b = fit_seed_model(s4, opts);
  REQUIRE(a.clusters.size() == 3);
  CHECK(a.clusters.centroids == b.clusters.centroids);
  CHECK(a.clusters.priors.sum() == doctest::Approx(1.0));

  Rng r1 = make_rng(77, 3);
  Rng r2 = make_rng(77, 3);
  CHECK(sample_seed(a, r1) == sample_seed(b, r2));
  Rng r3 = make_rng(77, 4);
  CHECK_FALSE(sample_seed(a, r1) == sample_seed(a, r3));
  const ImageTensor seed = sample_seed(a, r3);
  CHECK(seed.height() == 3);
  CHECK(seed.channels() == 2);
  CHECK(seed.all_finite());

  for (std::size_t i = 0; i < 100; ++i) {
    const Vector v = a.pca.project(s4[i]);
    const auto& dens = a.clusters.densities[a.clusters.nearest(v)];
    CHECK((dens.from_gaussian(dens.to_gaussian(v)) - v).cwiseAbs().maxCoeff() <= 1e-6);
  }

  // Pearson chi-squared goodness of fit of cluster draws against priors.
  const std::size_t draws = 100000;
  std::vector<double> counts(a.clusters.size(), 0.0);
  Rng rng = make_rng(123);
  for (std::size_t i = 0; i < draws; ++i) counts[sample_cluster(a.clusters, rng)] += 1.0;
  double stat = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double expected = a.clusters.priors[c] * draws;
    stat += (counts[c] - expected) * (counts[c] - expected) / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  CHECK(boost::math::cdf(boost::math::complement(dist, stat)) > 0.01);
}
