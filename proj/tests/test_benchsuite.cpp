#include <doctest.h>

#include <cmath>

#include "mtbo/benchsuite.hpp"

using namespace mtbo;

namespace {

Action act2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Action act1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("reward is the advertised combination of pressure and stability") {
  const TokamakSurrogateParams p = default_tokamak_params();
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int task = rng.uniform_int(static_cast<int>(p.tasks.size()));
    const Action a = act2(rng.uniform(0.001, 1.0), rng.uniform(0.001, 1.0));
    const SurrogateOutput out = tokamak_surrogate(p, task, a);
    CHECK(out.reward ==
          doctest::Approx(p.w_beta * out.pressure + p.w_omega * out.stability));
  }
}

TEST_CASE("stability rises and pressure falls with beam power, every task") {
  const TokamakSurrogateParams p = default_tokamak_params();
  for (int task = 0; task < static_cast<int>(p.tasks.size()); ++task) {
    double prev_stab = -1e300;
    double prev_pres = 1e300;
    for (int i = 0; i <= 100; ++i) {
      // along the diagonal power grows with the coordinate
      const double c = 0.001 + (1.0 - 0.001) * i / 100.0;
      const SurrogateOutput out = tokamak_surrogate(p, task, act2(c, c));
      CHECK(out.stability > prev_stab);
      CHECK(out.pressure < prev_pres);
      prev_stab = out.stability;
      prev_pres = out.pressure;
    }
  }
}

TEST_CASE("frozen task-0 corner values") {
  const TokamakSurrogateParams p = default_tokamak_params();
  CHECK(tokamak_surrogate(p, 0, act2(0.001, 0.001)).reward ==
        doctest::Approx(2.3203289168));
  CHECK(tokamak_surrogate(p, 0, act2(1.0, 1.0)).reward ==
        doctest::Approx(2.2118655628));
}

TEST_CASE("surrogate input validation") {
  const TokamakSurrogateParams p = default_tokamak_params();
  CHECK_THROWS_AS(tokamak_surrogate(p, 0, act2(0.0, 0.5)), std::domain_error);
  CHECK_THROWS_AS(tokamak_surrogate(p, 0, act2(0.5, 1.5)), std::domain_error);
  CHECK_THROWS_AS(tokamak_surrogate(p, 0, act1(0.5)), std::domain_error);
  CHECK_THROWS_AS(tokamak_surrogate(p, 99, act2(0.5, 0.5)), std::out_of_range);
  TokamakSurrogateParams bad = p;
  bad.tasks[0].k_pres = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("constant task is flat everywhere at the requested level") {
  TokamakSurrogateParams p = default_tokamak_params();
  p.tasks.push_back(constant_task_params(7.0));
  const int task = static_cast<int>(p.tasks.size()) - 1;
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Action a = act2(rng.uniform(0.001, 1.0), rng.uniform(0.001, 1.0));
    CHECK(tokamak_surrogate(p, task, a).reward == doctest::Approx(7.0));
  }
}

TEST_CASE("tokamak_truth_table matches pointwise evaluation") {
  const TokamakSurrogateParams p = default_tokamak_params();
  std::vector<Action> grid = {act2(0.001, 0.001), act2(0.5, 0.5), act2(1.0, 1.0)};
  const GroundTruthTable t = tokamak_truth_table(p, grid);
  REQUIRE(t.n_tasks() == 8);
  REQUIRE(t.grid_size() == 3);
  for (int x = 0; x < 8; ++x)
    for (int i = 0; i < 3; ++i)
      CHECK(t.values(x, i) ==
            doctest::Approx(tokamak_surrogate(p, x, grid[i]).reward));
}

TEST_CASE("sample_prior_truth: tiny signal variance gives near-zero draws") {
  GpHyperparams hp;
  hp.lengthscales = Eigen::VectorXd::Constant(1, 0.3);
  hp.signal_variance = 1e-12;
  hp.noise_variance = 1e-6;
  std::vector<Action> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(act1(i / 9.0));
  const GroundTruthTable t = sample_prior_truth(3, grid, hp, 7);
  CHECK(t.values.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("sample_prior_truth is deterministic per seed and task") {
  GpHyperparams hp;
  hp.lengthscales = Eigen::VectorXd::Constant(1, 0.4);
  hp.signal_variance = 1.0;
  hp.noise_variance = 1e-4;
  std::vector<Action> grid;
  for (int i = 0; i < 8; ++i) grid.push_back(act1(i / 7.0));
  const GroundTruthTable a = sample_prior_truth(3, grid, hp, 11);
  const GroundTruthTable b = sample_prior_truth(3, grid, hp, 11);
  const GroundTruthTable c = sample_prior_truth(3, grid, hp, 12);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  // adding tasks must not disturb earlier tasks' draws
  const GroundTruthTable d = sample_prior_truth(5, grid, hp, 11);
  CHECK(d.values.topRows(3) == a.values);
}

TEST_CASE("sample_prior_truth draws have the prior's second moments") {
  GpHyperparams hp;
  hp.lengthscales = Eigen::VectorXd::Constant(1, 0.5);
  hp.signal_variance = 2.0;
  hp.noise_variance = 1e-4;
  std::vector<Action> grid = {act1(0.0), act1(0.1), act1(0.9)};
  const int n_seeds = 200;
  const int n_tasks = 4;
  const int n = n_seeds * n_tasks;
  Eigen::MatrixXd draws(n, 3);
  int row = 0;
  for (int s = 0; s < n_seeds; ++s) {
    const GroundTruthTable t = sample_prior_truth(n_tasks, grid, hp, 1000 + s);
    for (int x = 0; x < n_tasks; ++x) draws.row(row++) = t.values.row(x);
  }
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1);
  // marginal variance within 15% of the signal variance
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(cov(i, i) - hp.signal_variance) < 0.15 * hp.signal_variance);
  // nearby points stay correlated per the kernel (within 20%)
  const double k01 = rbf_kernel(grid[0], grid[1], hp);
  CHECK(std::abs(cov(0, 1) - k01) < 0.2 * k01);
  // far apart points decorrelate
  const double k02 = rbf_kernel(grid[0], grid[2], hp);
  CHECK(std::abs(cov(0, 2) - k02) < 0.2 * hp.signal_variance);
}

TEST_CASE("noisy_evaluate") {
  Rng rng(3);
  CHECK(noisy_evaluate(5.0, 0.0, rng) == 5.0);
  CHECK_THROWS_AS(noisy_evaluate(5.0, -1.0, rng), std::invalid_argument);

  const int n = 40000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = noisy_evaluate(2.0, 0.5, rng);
    sum += y;
    sq += (y - 2.0) * (y - 2.0);
  }
  CHECK(std::abs(sum / n - 2.0) < 0.02);
  CHECK(std::abs(std::sqrt(sq / n) - 0.5) < 0.05 * 0.5);

  Rng r1(9), r2(9);
  CHECK(noisy_evaluate(1.0, 0.3, r1) == noisy_evaluate(1.0, 0.3, r2));
}

TEST_CASE("truth table JSON round-trip") {
  const TokamakSurrogateParams p = default_tokamak_params();
  std::vector<Action> grid = {act2(0.001, 0.001), act2(0.25, 0.75), act2(1.0, 1.0)};
  const GroundTruthTable t = tokamak_truth_table(p, grid);
  const GroundTruthTable back = truth_table_from_json(truth_table_to_json(t));
  REQUIRE(back.n_tasks() == t.n_tasks());
  REQUIRE(back.grid_size() == t.grid_size());
  for (int i = 0; i < t.grid_size(); ++i) CHECK(back.grid[i] == t.grid[i]);
  CHECK((back.values - t.values).cwiseAbs().maxCoeff() < 1e-12);
}
