#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtbo/rng.hpp"

namespace mtbo {

using Action = Eigen::VectorXd;

/// Finite task set with nonnegative per-task weights.
struct TaskSpace {
  std::vector<std::string> ids;
  Eigen::VectorXd weights;

  TaskSpace(std::vector<std::string> task_ids, Eigen::VectorXd task_weights);

  /// n tasks named "task_0".."task_{n-1}", all weights 1.
  static TaskSpace uniform(int n);

  int size() const { return static_cast<int>(ids.size()); }
};

/// Box-bounded action space, optionally restricted to a finite grid.
struct ActionSpace {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<Action> grid;  // empty = continuous box

  ActionSpace(Eigen::VectorXd lo, Eigen::VectorXd hi,
              std::vector<Action> grid_actions = {});

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Action& a, double tol = 0.0) const;

  /// Uniform draw from the box, or a uniform grid pick when a grid is set.
  Action sample_uniform(Rng& rng) const;
};

struct Observation {
  int task = 0;
  Action action;
  double reward = 0.0;
  int round = 1;  // dispatch index + 1, unique per run
  std::optional<int> worker_id;
  std::optional<double> dispatched_at;
  std::optional<double> completed_at;
};

/// Append-only query log. Snapshots are value copies; derived views are
/// computed on demand from whatever prefix the caller holds.
class History {
 public:
  History() = default;

  void append(Observation obs);

  const std::vector<Observation>& observations() const { return obs_; }
  int size() const { return static_cast<int>(obs_.size()); }

  /// Best (action, reward) observed for the task; ties break to the earliest
  /// observation. Absent when the task has no observations.
  std::optional<std::pair<Action, double>> incumbent(int task) const;

  /// Distinct actions taken in the task, in first-seen order.
  std::vector<Action> actions_for(int task) const;

  /// Raw (action, reward) pairs for the task, in log order.
  void training_data(int task, std::vector<Action>* actions,
                     std::vector<double>* rewards) const;

  int count_for(int task) const;

  History prefix(int t) const;

 private:
  std::vector<Observation> obs_;
};

struct PolicyMap {
  enum class Provenance { incumbent, random_fallback };
  std::vector<Action> actions;          // one per task index
  std::vector<Provenance> provenance;   // parallel to actions
};

/// (â_t(x), ŷ_t(x)) for one task; throws std::out_of_range on a bad index.
std::optional<std::pair<Action, double>> incumbent(const History& history,
                                                   int task, int n_tasks);

/// Queried tasks map to their incumbent action; unqueried tasks get a uniform
/// draw from the action space and are marked random_fallback.
PolicyMap extract_policy(const History& history, const TaskSpace& tasks,
                         const ActionSpace& actions, Rng& rng);

}  // namespace mtbo
