#include "mtbo/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mtbo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

int GroundTruthTable::find(const Action& a, double tol) const {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != a.size()) continue;
    if ((grid[i] - a).lpNorm<Eigen::Infinity>() <= tol)
      return static_cast<int>(i);
  }
  return -1;
}

double GroundTruthTable::value(int task, const Action& a) const {
  const int idx = find(a);
  if (idx < 0)
    throw std::domain_error("GroundTruthTable: action not on the truth grid");
  return values(task, idx);
}

int best_past_action(const History& history, const GroundTruthTable& truth,
                     int task, int t) {
  if (task < 0 || task >= truth.n_tasks())
    throw std::out_of_range("best_past_action: invalid task index");
  int best = -1;
  double best_f = 0.0;
  int seen = 0;
  for (const auto& o : history.observations()) {
    if (seen++ >= t) break;
    if (o.task != task) continue;
    const int idx = truth.find(o.action);
    if (idx < 0)
      throw std::domain_error("best_past_action: played action not in truth");
    const double f = truth.values(task, idx);
    if (best < 0 || f > best_f) {
      best = idx;
      best_f = f;
    }
  }
  if (best >= 0) return best;
  // No queries yet: the pessimistic argmin over the grid.
  int arg = 0;
  for (int i = 1; i < truth.grid_size(); ++i)
    if (truth.values(task, i) < truth.values(task, arg)) arg = i;
  return arg;
}

double normalized_simple_regret(const History& history,
                                const GroundTruthTable& truth,
                                const Eigen::VectorXd& weights, int t) {
  double num = 0.0;
  double den = 0.0;
  for (int x = 0; x < truth.n_tasks(); ++x) {
    const double fmax = truth.values.row(x).maxCoeff();
    const double fmin = truth.values.row(x).minCoeff();
    const int a_star = best_past_action(history, truth, x, t);
    num += weights[x] * (fmax - truth.values(x, a_star));
    den += weights[x] * (fmax - fmin);
  }
  return den == 0.0 ? 0.0 : num / den;
}

double approximate_regret(const History& history, int task, int t,
                          double epsilon, std::optional<double> optimum) {
  double run_max = -std::numeric_limits<double>::infinity();
  double run_min = std::numeric_limits<double>::infinity();
  double best_by_t = -std::numeric_limits<double>::infinity();
  bool seen_by_t = false;
  bool seen = false;
  int i = 0;
  for (const auto& o : history.observations()) {
    ++i;
    if (o.task != task) continue;
    seen = true;
    run_max = std::max(run_max, o.reward);
    run_min = std::min(run_min, o.reward);
    if (i <= t) {
      seen_by_t = true;
      best_by_t = std::max(best_by_t, o.reward);
    }
  }
  if (!seen && !optimum)
    throw std::domain_error("approximate_regret: task never observed");
  const double opt = optimum.value_or(run_max) + epsilon;
  if (!seen) return kNaN;
  return opt - (seen_by_t ? best_by_t : run_min);
}

double information_gain(const std::vector<Action>& actions,
                        const GpHyperparams& hp) {
  if (actions.empty()) return 0.0;
  if (hp.noise_variance <= 0.0)
    throw std::invalid_argument("information_gain: noise_variance must be > 0");
  Eigen::MatrixXd m = kernel_matrix(actions, hp) / hp.noise_variance;
  m.diagonal().array() += 1.0;
  const Eigen::MatrixXd L = cholesky_with_jitter(m, 1.0);
  return L.diagonal().array().log().sum();
}

double theorem_bound(int n_tasks, int n_actions, double gamma, int t) {
  if (t < 1) throw std::invalid_argument("theorem_bound: t must be >= 1");
  if (gamma < 0.0) throw std::invalid_argument("theorem_bound: gamma must be >= 0");
  const double tt = static_cast<double>(t);
  return n_tasks *
         (1.0 / tt + std::sqrt(n_tasks * n_actions * gamma / (2.0 * tt)));
}

RegretReport build_regret_report(
    const History& history, const TaskSpace& tasks,
    const std::optional<GroundTruthTable>& truth,
    const std::optional<GpHyperparams>& hp_for_bound, double epsilon,
    const std::optional<Eigen::VectorXd>& per_task_optimum) {
  const int T = history.size();
  const int n = tasks.size();
  RegretReport rep;
  rep.n_tasks = n;
  rep.capital = T;
  rep.epsilon = epsilon;
  rep.approx_regret = Eigen::MatrixXd::Constant(T, n, kNaN);
  rep.total_approx = Eigen::VectorXd::Zero(T);
  rep.query_counts = Eigen::MatrixXd::Zero(T, n);
  rep.has_truth = truth.has_value();

  std::vector<bool> ever_queried(n, false);
  for (const auto& o : history.observations()) ever_queried[o.task] = true;

  for (int t = 1; t <= T; ++t) {
    if (t > 1) rep.query_counts.row(t - 1) = rep.query_counts.row(t - 2);
    rep.query_counts(t - 1, history.observations()[t - 1].task) += 1.0;
    double total = 0.0;
    for (int x = 0; x < n; ++x) {
      std::optional<double> opt;
      if (per_task_optimum) opt = (*per_task_optimum)[x];
      if (!ever_queried[x] && !opt) continue;
      const double r = approximate_regret(history, x, t, epsilon, opt);
      if (std::isfinite(r)) {
        rep.approx_regret(t - 1, x) = r;
        total += r;
      }
    }
    rep.total_approx[t - 1] = total;
  }

  if (truth) {
    rep.norm_regret.resize(T);
    for (int t = 1; t <= T; ++t)
      rep.norm_regret[t - 1] =
          normalized_simple_regret(history, *truth, tasks.weights, t);
    if (hp_for_bound) {
      rep.info_gain.resize(T);
      rep.bound.resize(T);
      for (int t = 1; t <= T; ++t) {
        const History pre = history.prefix(t);
        double gain = 0.0;
        for (int x = 0; x < n; ++x) {
          std::vector<Action> xs;
          std::vector<double> ys;
          pre.training_data(x, &xs, &ys);
          gain += information_gain(xs, *hp_for_bound);
        }
        rep.info_gain[t - 1] = gain;
        rep.bound[t - 1] = theorem_bound(n, truth->grid_size(), gain, t);
      }
    }
  }
  return rep;
}

std::string regret_report_csv(const RegretReport& rep) {
  std::ostringstream out;
  out.precision(17);
  out << "round,total_norm_regret,bound,total_approx_regret";
  for (int x = 0; x < rep.n_tasks; ++x) out << ",approx_regret_task_" << x;
  for (int x = 0; x < rep.n_tasks; ++x) out << ",queries_task_" << x;
  out << "\n";
  for (int t = 1; t <= rep.capital; ++t) {
    out << t << ",";
    if (rep.norm_regret.size() > 0) out << rep.norm_regret[t - 1];
    out << ",";
    if (rep.bound.size() > 0) out << rep.bound[t - 1];
    out << "," << rep.total_approx[t - 1];
    for (int x = 0; x < rep.n_tasks; ++x) {
      out << ",";
      const double r = rep.approx_regret(t - 1, x);
      if (std::isfinite(r)) out << r;
    }
    for (int x = 0; x < rep.n_tasks; ++x)
      out << "," << static_cast<long long>(rep.query_counts(t - 1, x));
    out << "\n";
  }
  return out.str();
}

std::string regret_report_json(const RegretReport& rep) {
  nlohmann::json j;
  j["n_tasks"] = rep.n_tasks;
  j["capital"] = rep.capital;
  j["epsilon"] = rep.epsilon;
  auto vec = [](const Eigen::VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  j["total_approx_regret"] = vec(rep.total_approx);
  if (rep.norm_regret.size() > 0) j["norm_regret"] = vec(rep.norm_regret);
  if (rep.bound.size() > 0) {
    j["bound"] = vec(rep.bound);
    j["info_gain"] = vec(rep.info_gain);
  }
  nlohmann::json per_task = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  for (int x = 0; x < rep.n_tasks; ++x) {
    std::vector<double> r(rep.capital), c(rep.capital);
    for (int t = 0; t < rep.capital; ++t) {
      r[t] = rep.approx_regret(t, x);
      c[t] = rep.query_counts(t, x);
    }
    nlohmann::json jr = nlohmann::json::array();
    for (double v : r)
      jr.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json());
    per_task.push_back(jr);
    counts.push_back(c);
  }
  j["approx_regret_per_task"] = per_task;
  j["query_counts_per_task"] = counts;
  return j.dump(2);
}

}  // namespace mtbo
