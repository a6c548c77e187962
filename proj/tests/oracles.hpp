// Independent brute-force oracles used by the unit and acceptance suites.
// They deliberately avoid the library's Cholesky path: dense inverses and
// determinants only.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "mtbo/gp.hpp"

namespace oracles {

inline Eigen::MatrixXd dense_kernel(const std::vector<Eigen::VectorXd>& a,
                                    const std::vector<Eigen::VectorXd>& b,
                                    const mtbo::GpHyperparams& hp) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d2 =
          ((a[i] - b[j]).array() / hp.lengthscales.array()).square().sum();
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          hp.signal_variance * std::exp(-0.5 * d2);
    }
  return k;
}

// log N(y; mean_constant, K + nv I) via dense inverse and determinant
inline double dense_lml(const mtbo::GpHyperparams& hp,
                        const std::vector<Eigen::VectorXd>& x,
                        const Eigen::VectorXd& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n == 0) return 0.0;
  Eigen::MatrixXd k = dense_kernel(x, x, hp);
  k.diagonal().array() += hp.noise_variance;
  const Eigen::MatrixXd inv = k.inverse();
  const Eigen::VectorXd c = y.array() - hp.mean_constant;
  return -0.5 * c.dot(inv * c) - 0.5 * std::log(k.determinant()) -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// mu = m + K*^T (K + nv I)^-1 (y - m), Sigma = K** - K*^T (K + nv I)^-1 K*
inline DensePosterior dense_posterior(const mtbo::GpHyperparams& hp,
                                      const std::vector<Eigen::VectorXd>& x,
                                      const Eigen::VectorXd& y,
                                      const std::vector<Eigen::VectorXd>& q) {
  DensePosterior out;
  const Eigen::MatrixXd kqq = dense_kernel(q, q, hp);
  if (x.empty()) {
    out.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(q.size()),
                                         hp.mean_constant);
    out.cov = kqq;
    return out;
  }
  Eigen::MatrixXd k = dense_kernel(x, x, hp);
  k.diagonal().array() += hp.noise_variance;
  const Eigen::MatrixXd inv = k.inverse();
  const Eigen::MatrixXd ks = dense_kernel(x, q, hp);
  const Eigen::VectorXd c = y.array() - hp.mean_constant;
  out.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(q.size()),
                                       hp.mean_constant) +
             ks.transpose() * (inv * c);
  out.cov = kqq - ks.transpose() * inv * ks;
  return out;
}

// 0.5 log det(I + K / nv) via dense determinant
inline double dense_information_gain(const std::vector<Eigen::VectorXd>& x,
                                     const mtbo::GpHyperparams& hp) {
  if (x.empty()) return 0.0;
  Eigen::MatrixXd m = dense_kernel(x, x, hp) / hp.noise_variance;
  m.diagonal().array() += 1.0;
  return 0.5 * std::log(m.determinant());
}

}  // namespace oracles
