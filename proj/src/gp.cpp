#include "mtbo/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace mtbo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dims(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                const GpHyperparams& hp) {
  if (a.size() != b.size() || a.size() != hp.lengthscales.size())
    throw std::invalid_argument("rbf_kernel: dimension mismatch");
}

// Minimizes f starting from x; x is replaced by the best vertex found.
// The returned value never exceeds f at the starting point.
double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                   Eigen::VectorXd& x, double step, int max_iters) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> verts(n + 1, x);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) verts[i + 1][i] += step;
  for (int i = 0; i <= n; ++i) vals[i] = f(verts[i]);

  auto order = [&]() {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> v2;
    std::vector<double> f2;
    for (int i : idx) {
      v2.push_back(verts[i]);
      f2.push_back(vals[i]);
    }
    verts.swap(v2);
    vals.swap(f2);
  };

  for (int it = 0; it < max_iters; ++it) {
    order();
    if (std::abs(vals[n] - vals[0]) < 1e-10 * (1.0 + std::abs(vals[0]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += verts[i];
    centroid /= n;

    const Eigen::VectorXd refl = centroid + (centroid - verts[n]);
    const double frefl = f(refl);
    if (frefl < vals[0]) {
      const Eigen::VectorXd expd = centroid + 2.0 * (centroid - verts[n]);
      const double fexpd = f(expd);
      if (fexpd < frefl) {
        verts[n] = expd;
        vals[n] = fexpd;
      } else {
        verts[n] = refl;
        vals[n] = frefl;
      }
    } else if (frefl < vals[n - 1]) {
      verts[n] = refl;
      vals[n] = frefl;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (verts[n] - centroid);
      const double fcontr = f(contr);
      if (fcontr < vals[n]) {
        verts[n] = contr;
        vals[n] = fcontr;
      } else {
        for (int i = 1; i <= n; ++i) {
          verts[i] = verts[0] + 0.5 * (verts[i] - verts[0]);
          vals[i] = f(verts[i]);
        }
      }
    }
  }
  order();
  x = verts[0];
  return vals[0];
}

}  // namespace

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const GpHyperparams& hp) {
  check_dims(a, b, hp);
  const double d2 =
      ((a - b).array() / hp.lengthscales.array()).square().sum();
  return hp.signal_variance * std::exp(-0.5 * d2);
}

Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& rows,
                              const std::vector<Eigen::VectorXd>& cols,
                              const GpHyperparams& hp) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rbf_kernel(rows[i], cols[j], hp);
  return out;
}

Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::VectorXd>& points,
                              const GpHyperparams& hp) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = rbf_kernel(points[i], points[i], hp);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(points[i], points[j], hp);
      out(i, j) = k;
      out(j, i) = k;
    }
  }
  return out;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& mat,
                                     double scale_hint, double* jitter_used) {
  const double scale = scale_hint > 0.0 ? scale_hint : 1.0;
  const double cap = 1e-2 * std::max(scale, 1.0);
  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd shifted = mat;
    if (jitter > 0.0) shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
    if (jitter == 0.0)
      jitter = 1e-8 * scale;
    else
      jitter *= 10.0;
    if (jitter > cap)
      throw std::runtime_error(
          "cholesky_with_jitter: matrix not positive definite after jitter "
          "escalation");
  }
}

double log_marginal_likelihood(const GpHyperparams& hp,
                               const std::vector<Eigen::VectorXd>& actions,
                               const Eigen::VectorXd& rewards) {
  const auto n = static_cast<Eigen::Index>(actions.size());
  if (n != rewards.size())
    throw std::invalid_argument("log_marginal_likelihood: size mismatch");
  if (n == 0) return 0.0;
  Eigen::MatrixXd K = kernel_matrix(actions, hp);
  K.diagonal().array() += hp.noise_variance;
  const Eigen::MatrixXd L = cholesky_with_jitter(K, hp.signal_variance);
  const Eigen::VectorXd y = rewards.array() - hp.mean_constant;
  const Eigen::VectorXd alpha = L.transpose()
                                    .triangularView<Eigen::Upper>()
                                    .solve(L.triangularView<Eigen::Lower>().solve(y));
  const double logdet_half = L.diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - logdet_half -
         0.5 * static_cast<double>(n) * std::log(kTwoPi);
}

GpModel::GpModel(GpHyperparams hp, std::vector<Eigen::VectorXd> actions,
                 const Eigen::VectorXd& rewards, bool standardize)
    : hp_(std::move(hp)), train_actions_(std::move(actions)) {
  const auto n = static_cast<Eigen::Index>(train_actions_.size());
  if (n != rewards.size())
    throw std::invalid_argument("GpModel: actions/rewards size mismatch");
  if (hp_.signal_variance <= 0.0 ||
      (hp_.lengthscales.array() <= 0.0).any() || hp_.noise_variance < 0.0)
    throw std::invalid_argument("GpModel: invalid hyperparameters");

  if (standardize && n > 0) {
    shift_ = rewards.mean();
    const double var = (rewards.array() - shift_).square().mean();
    scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  y_std_ = (rewards.array() - shift_) / scale_;

  if (n > 0) {
    Eigen::MatrixXd K = kernel_matrix(train_actions_, hp_);
    K.diagonal().array() += hp_.noise_variance;
    chol_ = cholesky_with_jitter(K, hp_.signal_variance);
    const Eigen::VectorXd centered = y_std_.array() - hp_.mean_constant;
    alpha_ = chol_.transpose()
                 .triangularView<Eigen::Upper>()
                 .solve(chol_.triangularView<Eigen::Lower>().solve(centered));
  }
}

PosteriorSlice GpModel::posterior(
    const std::vector<Eigen::VectorXd>& candidates) const {
  if (candidates.empty())
    throw std::invalid_argument("posterior: empty candidate set");
  const auto m = static_cast<Eigen::Index>(candidates.size());
  PosteriorSlice slice;
  slice.candidates = candidates;

  Eigen::VectorXd mean_std;
  Eigen::MatrixXd cov_std;
  const Eigen::MatrixXd Kcc = kernel_matrix(candidates, hp_);
  if (train_size() == 0) {
    mean_std = Eigen::VectorXd::Constant(m, hp_.mean_constant);
    cov_std = Kcc;
  } else {
    const Eigen::MatrixXd Ks = kernel_matrix(train_actions_, candidates, hp_);
    mean_std = Eigen::VectorXd::Constant(m, hp_.mean_constant) +
               Ks.transpose() * alpha_;
    const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Ks);
    cov_std = Kcc - V.transpose() * V;
  }

  cov_std = 0.5 * (cov_std + cov_std.transpose()).eval();
  for (Eigen::Index i = 0; i < m; ++i)
    if (cov_std(i, i) < 0.0) cov_std(i, i) = 0.0;

  slice.mean = (shift_ + scale_ * mean_std.array()).matrix();
  slice.covariance = scale_ * scale_ * cov_std;
  return slice;
}

Eigen::VectorXd GpModel::sample_posterior(
    const std::vector<Eigen::VectorXd>& candidates, Rng& rng) const {
  const PosteriorSlice slice = posterior(candidates);
  const double hint = hp_.signal_variance * scale_ * scale_;
  const Eigen::MatrixXd L = cholesky_with_jitter(slice.covariance, hint);
  Eigen::VectorXd z(slice.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return slice.mean + L * z;
}

GpHyperparams default_hyperparams(const Eigen::VectorXd& span) {
  GpHyperparams hp;
  hp.lengthscales = 0.25 * span;
  hp.signal_variance = 1.0;
  hp.noise_variance = 1e-4;
  hp.mean_constant = 0.0;
  return hp;
}

GpHyperparams fit_hyperparameters(const std::vector<Eigen::VectorXd>& actions,
                                  const Eigen::VectorXd& rewards,
                                  const FitConfig& cfg, Rng& rng) {
  const int d = static_cast<int>(cfg.span.size());
  const GpHyperparams defaults = default_hyperparams(cfg.span);
  if (static_cast<int>(actions.size()) < 2) return defaults;

  const int np = d + 2;  // log lengthscales, log sv, log noise
  Eigen::VectorXd lo(np), hi(np);
  for (int i = 0; i < d; ++i) {
    lo[i] = std::log(1e-2 * cfg.span[i]);
    hi[i] = std::log(10.0 * cfg.span[i]);
  }
  lo[d] = std::log(1e-3);
  hi[d] = std::log(1e3);
  lo[d + 1] = std::log(1e-6);
  hi[d + 1] = std::log(1.0);

  auto clamp_box = [&](Eigen::VectorXd theta) {
    for (int i = 0; i < np; ++i) theta[i] = std::clamp(theta[i], lo[i], hi[i]);
    return theta;
  };
  auto to_hp = [&](const Eigen::VectorXd& theta) {
    GpHyperparams hp;
    hp.lengthscales = theta.head(d).array().exp().matrix();
    hp.signal_variance = std::exp(theta[d]);
    hp.noise_variance = std::exp(theta[d + 1]);
    hp.mean_constant = 0.0;
    return hp;
  };
  auto objective = [&](const Eigen::VectorXd& theta) -> double {
    try {
      const double lml =
          log_marginal_likelihood(to_hp(clamp_box(theta)), actions, rewards);
      return std::isfinite(lml) ? -lml : 1e30;
    } catch (const std::exception&) {
      return 1e30;
    }
  };

  Eigen::VectorXd theta0(np);
  for (int i = 0; i < d; ++i) theta0[i] = std::log(defaults.lengthscales[i]);
  theta0[d] = std::log(defaults.signal_variance);
  theta0[d + 1] = std::log(defaults.noise_variance);
  theta0 = clamp_box(theta0);

  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = theta0;
  for (int s = 0; s < cfg.n_starts; ++s) {
    Eigen::VectorXd start(np);
    if (s == 0) {
      start = theta0;
    } else {
      for (int i = 0; i < np; ++i) start[i] = rng.uniform(lo[i], hi[i]);
    }
    Eigen::VectorXd x = start;
    const double val = nelder_mead(objective, x, 0.4, cfg.max_iters);
    if (val < best_val) {
      best_val = val;
      best_theta = x;
    }
  }
  if (!std::isfinite(best_val) || best_val >= 1e30) return defaults;
  return to_hp(clamp_box(best_theta));
}

GpModel fit_model(const std::vector<Eigen::VectorXd>& actions,
                  const Eigen::VectorXd& rewards, const FitConfig& cfg,
                  Rng& rng) {
  const auto n = static_cast<Eigen::Index>(actions.size());
  if (n < 2) return GpModel(default_hyperparams(cfg.span), actions, rewards, true);
  const double shift = rewards.mean();
  const double var = (rewards.array() - shift).square().mean();
  const double scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd y_std = (rewards.array() - shift) / scale;
  const GpHyperparams hp = fit_hyperparameters(actions, y_std, cfg, rng);
  return GpModel(hp, actions, rewards, true);
}

}  // namespace mtbo
