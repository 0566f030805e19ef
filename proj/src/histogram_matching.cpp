#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "genhop/errors.hpp"
#include "genhop/seed.hpp"

namespace genhop {

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double standard_normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

CdfTable make_cdf_table(std::vector<double> samples) {
  if (samples.empty()) throw InsufficientSamplesError("empty CDF table");
  std::sort(samples.begin(), samples.end());
  return CdfTable{std::move(samples)};
}

namespace {

double level(std::size_t i, std::size_t n) {
  return (static_cast<double>(i) + 0.5) / static_cast<double>(n);
}

}  // namespace

double gaussianize(double v, const CdfTable& table) {
  const auto& xs = table.values;
  const std::size_t n = xs.size();
  if (n == 0) throw InsufficientSamplesError("empty CDF table");

  double p = 0.0;
  const auto lo = std::lower_bound(xs.begin(), xs.end(), v);
  const auto hi = std::upper_bound(lo, xs.end(), v);
  if (lo != hi) {
    // v is a table entry; tied entries share the middle of their levels.
    const auto a = static_cast<std::size_t>(lo - xs.begin());
    const auto b = static_cast<std::size_t>(hi - xs.begin()) - 1;
    p = 0.5 * (level(a, n) + level(b, n));
  } else if (lo == xs.begin()) {
    p = level(0, n);
  } else if (lo == xs.end()) {
    p = level(n - 1, n);
  } else {
    const auto i = static_cast<std::size_t>(lo - xs.begin());
    const double t = (v - xs[i - 1]) / (xs[i] - xs[i - 1]);
    p = level(i - 1, n) + t * (level(i, n) - level(i - 1, n));
  }
  return standard_normal_quantile(p);
}

double degaussianize(double g, const CdfTable& table) {
  const auto& xs = table.values;
  const std::size_t n = xs.size();
  if (n == 0) throw InsufficientSamplesError("empty CDF table");

  const double p = std::clamp(standard_normal_cdf(g), level(0, n), level(n - 1, n));
  const double pos = std::clamp(p * static_cast<double>(n) - 0.5, 0.0,
                                static_cast<double>(n - 1));
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= n) return xs[n - 1];
  const double t = pos - static_cast<double>(i);
  if (t == 0.0) return xs[i];
  return xs[i] + t * (xs[i + 1] - xs[i]);
}

}  // namespace genhop
