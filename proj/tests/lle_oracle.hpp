#pragma once

// Reference LLE used by the tests: a full sort for the neighbor search and
// an eigendecomposition of the local Gram matrix for the weights. It shares
// no code with the library implementation.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Result {
  std::vector<std::size_t> index;
  Eigen::VectorXd weights;
  Eigen::VectorXd lf;
  Eigen::VectorXd hf;
};

inline std::vector<std::size_t> neighbors(const Eigen::VectorXd& q, const Eigen::MatrixXd& bank,
                                          std::size_t k_max, double ratio) {
  std::vector<std::size_t> order(static_cast<std::size_t>(bank.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    dist[i] = (bank.row(static_cast<Eigen::Index>(i)).transpose() - q).norm();
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  order.resize(std::min(k_max, order.size()));
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (!kept.empty() && dist[i] > ratio * dist[order.front()]) break;
    kept.push_back(i);
  }
  return kept;
}

// Minimum-norm minimizer of |D^T w| subject to sum(w) = 1, D_i = q - n_i.
// Computed in extended precision so the reference stays accurate when the
// neighbors are nearly affinely dependent.
inline Eigen::VectorXd weights(const Eigen::VectorXd& q, const Eigen::MatrixXd& nb) {
  using Real = long double;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  const Eigen::Index k = nb.rows();
  Mat d(k, nb.cols());
  for (Eigen::Index i = 0; i < k; ++i) d.row(i) = (q.transpose() - nb.row(i)).cast<Real>();
  const Mat g = d * d.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  const Real top = es.eigenvalues().cwiseAbs().maxCoeff();
  const Vec ones = Vec::Ones(k);
  Vec null_part = Vec::Zero(k);
  Vec pinv_part = Vec::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Vec v = es.eigenvectors().col(j);
    const Real lambda = es.eigenvalues()[j];
    const Real c = v.dot(ones);
    if (top == 0 || lambda <= Real(1e-14) * top) {
      null_part += c * v;
    } else {
      pinv_part += (c / lambda) * v;
    }
  }
  if (null_part.squaredNorm() > Real(1e-10)) return (null_part / null_part.sum()).cast<double>();
  return (pinv_part / pinv_part.sum()).cast<double>();
}

inline Result recover(const Eigen::VectorXd& q, const Eigen::MatrixXd& lf_bank,
                      const Eigen::MatrixXd& hf_bank, std::size_t k_max, double ratio) {
  Result r;
  r.index = neighbors(q, lf_bank, k_max, ratio);
  Eigen::MatrixXd nb(static_cast<Eigen::Index>(r.index.size()), lf_bank.cols());
  Eigen::MatrixXd hb(static_cast<Eigen::Index>(r.index.size()), hf_bank.cols());
  for (std::size_t i = 0; i < r.index.size(); ++i) {
    nb.row(static_cast<Eigen::Index>(i)) = lf_bank.row(static_cast<Eigen::Index>(r.index[i]));
    hb.row(static_cast<Eigen::Index>(i)) = hf_bank.row(static_cast<Eigen::Index>(r.index[i]));
  }
  r.weights = weights(q, nb);
  r.lf = nb.transpose() * r.weights;
  r.hf = hb.transpose() * r.weights;
  return r;
}

}  // namespace oracle
