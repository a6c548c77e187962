#pragma once

#include <Eigen/Core>
#include <vector>

#include "mtbo/rng.hpp"

namespace mtbo {

struct GpHyperparams {
  Eigen::VectorXd lengthscales;   // per action dimension, > 0
  double signal_variance = 1.0;   // > 0
  double noise_variance = 1e-4;   // >= 0
  double mean_constant = 0.0;
};

/// signal_variance * exp(-0.5 * sum_d ((a_d - b_d) / l_d)^2)
double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const GpHyperparams& hp);

Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& rows,
                              const std::vector<Eigen::VectorXd>& cols,
                              const GpHyperparams& hp);

/// Symmetric Gram matrix of one point set.
Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& points,
                              const GpHyperparams& hp);

/// Lower Cholesky factor of a symmetric matrix, escalating a diagonal jitter
/// from 1e-8 * scale_hint by factors of 10 when plain factorization fails.
/// Throws std::runtime_error once the jitter cap is exceeded.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& mat,
                                     double scale_hint,
                                     double* jitter_used = nullptr);

/// Exact-GP log marginal likelihood with y centered by hp.mean_constant.
/// Empty data returns 0.
double log_marginal_likelihood(const GpHyperparams& hp,
                               const std::vector<Eigen::VectorXd>& actions,
                               const Eigen::VectorXd& rewards);

struct PosteriorSlice {
  std::vector<Eigen::VectorXd> candidates;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Immutable per-task GP: training data, optional per-task z-score
/// standardization of rewards, and a cached Cholesky factor of
/// K + noise_variance*I (+ jitter when needed). Posterior outputs are
/// un-standardized. Safe to query from multiple threads.
class GpModel {
 public:
  GpModel(GpHyperparams hp, std::vector<Eigen::VectorXd> actions,
          const Eigen::VectorXd& rewards, bool standardize = true);

  PosteriorSlice posterior(const std::vector<Eigen::VectorXd>& candidates) const;

  /// One joint posterior draw: mean + L*z with z standard normal from rng.
  Eigen::VectorXd sample_posterior(const std::vector<Eigen::VectorXd>& candidates,
                                   Rng& rng) const;

  const GpHyperparams& hyperparams() const { return hp_; }
  int train_size() const { return static_cast<int>(train_actions_.size()); }
  double shift() const { return shift_; }
  double scale() const { return scale_; }

 private:
  GpHyperparams hp_;
  std::vector<Eigen::VectorXd> train_actions_;
  Eigen::VectorXd y_std_;     // standardized, mean_constant-centered rewards
  double shift_ = 0.0;
  double scale_ = 1.0;
  Eigen::MatrixXd chol_;      // lower factor
  Eigen::VectorXd alpha_;     // (K + nv I)^-1 (y_std - mean_constant)
};

struct FitConfig {
  Eigen::VectorXd span;  // upper - lower per action dimension
  int n_starts = 5;      // one at defaults, rest log-uniform in bounds
  int max_iters = 250;   // Nelder-Mead iterations per start
};

/// l_d = 0.25 * span_d, sv = 1, noise 1e-4, zero mean.
GpHyperparams default_hyperparams(const Eigen::VectorXd& span);

/// Multi-start Nelder-Mead maximization of the log marginal likelihood over
/// log-space parameters. Bounds: l_d in [1e-2, 10]*span_d, sv in [1e-3, 1e3],
/// noise in [1e-6, 1]. Fewer than 2 observations returns the defaults.
GpHyperparams fit_hyperparameters(const std::vector<Eigen::VectorXd>& actions,
                                  const Eigen::VectorXd& rewards,
                                  const FitConfig& cfg, Rng& rng);

/// Standardizes rewards, fits hyperparameters on the standardized values, and
/// returns the resulting model.
GpModel fit_model(const std::vector<Eigen::VectorXd>& actions,
                  const Eigen::VectorXd& rewards, const FitConfig& cfg,
                  Rng& rng);

}  // namespace mtbo
