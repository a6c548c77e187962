#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "mtbo/domain.hpp"
#include "mtbo/gp.hpp"

namespace mtbo {

/// True expected reward on a finite action grid shared by all tasks.
struct GroundTruthTable {
  std::vector<Action> grid;
  Eigen::MatrixXd values;  // n_tasks x |grid|

  int n_tasks() const { return static_cast<int>(values.rows()); }
  int grid_size() const { return static_cast<int>(values.cols()); }

  /// Grid index of an action (exact up to tol), or -1.
  int find(const Action& a, double tol = 1e-9) const;

  /// f(task, a); throws std::domain_error when the action is off-grid.
  double value(int task, const Action& a) const;
};

/// Grid index of the best past action: argmax of true reward over the actions
/// played for the task within the first t observations, or argmin over the
/// whole grid when none were played. Ties break to the earliest-played action
/// (lowest grid index for the argmin case).
int best_past_action(const History& history, const GroundTruthTable& truth,
                     int task, int t);

/// Weighted, range-normalized simple regret at time t; 0 when the
/// normalizing denominator vanishes.
double normalized_simple_regret(const History& history,
                                const GroundTruthTable& truth,
                                const Eigen::VectorXd& weights, int t);

/// (run-max reward for the task + epsilon) - best reward seen by time t.
/// Before the task's first observation the second term is the task's run-min.
/// `optimum` substitutes the run-max when an externally pooled optimum is
/// wanted (e.g. comparing algorithms on the same seed).
double approximate_regret(const History& history, int task, int t,
                          double epsilon = 1e-3,
                          std::optional<double> optimum = std::nullopt);

/// 0.5 * log det(I + K / noise_variance) for the task's evaluated actions.
double information_gain(const std::vector<Action>& actions,
                        const GpHyperparams& hp);

/// |X| * (1/T + sqrt(|X| |A| gamma / (2 T)))
double theorem_bound(int n_tasks, int n_actions, double gamma, int t);

struct RegretReport {
  int n_tasks = 0;
  int capital = 0;
  double epsilon = 1e-3;
  // Rows are rounds 1..T (history prefix lengths).
  Eigen::MatrixXd approx_regret;  // T x n_tasks; NaN for never-queried tasks
  Eigen::VectorXd total_approx;   // sum over queried tasks
  Eigen::MatrixXd query_counts;   // T x n_tasks, cumulative
  bool has_truth = false;
  Eigen::VectorXd norm_regret;  // empty unless has_truth
  Eigen::VectorXd info_gain;    // realized gain; empty unless bound computed
  Eigen::VectorXd bound;        // empty unless has_truth and hp given
};

RegretReport build_regret_report(
    const History& history, const TaskSpace& tasks,
    const std::optional<GroundTruthTable>& truth = std::nullopt,
    const std::optional<GpHyperparams>& hp_for_bound = std::nullopt,
    double epsilon = 1e-3,
    const std::optional<Eigen::VectorXd>& per_task_optimum = std::nullopt);

/// Columns: round, total_norm_regret, bound, total_approx_regret, per-task
/// approximate regret, per-task cumulative query counts. Missing values are
/// left empty.
std::string regret_report_csv(const RegretReport& report);

std::string regret_report_json(const RegretReport& report);

}  // namespace mtbo
