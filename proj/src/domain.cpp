#include "mtbo/domain.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace mtbo {

TaskSpace::TaskSpace(std::vector<std::string> task_ids,
                     Eigen::VectorXd task_weights)
    : ids(std::move(task_ids)), weights(std::move(task_weights)) {
  if (ids.empty()) throw std::invalid_argument("TaskSpace: need at least one task");
  if (weights.size() != static_cast<Eigen::Index>(ids.size()))
    throw std::invalid_argument("TaskSpace: ids/weights size mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second)
      throw std::invalid_argument("TaskSpace: duplicate task id '" + id + "'");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("TaskSpace: negative weight");
  if (weights.maxCoeff() <= 0.0)
    throw std::invalid_argument("TaskSpace: all weights are zero");
}

TaskSpace TaskSpace::uniform(int n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (int i = 0; i < n; ++i) ids.push_back("task_" + std::to_string(i));
  return TaskSpace(std::move(ids), Eigen::VectorXd::Ones(n));
}

ActionSpace::ActionSpace(Eigen::VectorXd lo, Eigen::VectorXd hi,
                         std::vector<Action> grid_actions)
    : lower(std::move(lo)), upper(std::move(hi)), grid(std::move(grid_actions)) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw std::invalid_argument("ActionSpace: bad bounds dimensions");
  if ((lower.array() >= upper.array()).any())
    throw std::invalid_argument("ActionSpace: lower must be < upper per dimension");
  for (const auto& g : grid) {
    if (g.size() != lower.size())
      throw std::invalid_argument("ActionSpace: grid action dimension mismatch");
    if (!contains(g))
      throw std::invalid_argument("ActionSpace: grid action out of bounds");
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j)
      if (grid[i] == grid[j])
        throw std::invalid_argument("ActionSpace: duplicate grid action");
}

bool ActionSpace::contains(const Action& a, double tol) const {
  if (a.size() != lower.size()) return false;
  return (a.array() >= lower.array() - tol).all() &&
         (a.array() <= upper.array() + tol).all();
}

Action ActionSpace::sample_uniform(Rng& rng) const {
  if (!grid.empty()) return grid[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(grid.size())))];
  Action a(dim());
  for (int d = 0; d < dim(); ++d) a[d] = rng.uniform(lower[d], upper[d]);
  return a;
}

void History::append(Observation obs) { obs_.push_back(std::move(obs)); }

std::optional<std::pair<Action, double>> History::incumbent(int task) const {
  std::optional<std::pair<Action, double>> best;
  for (const auto& o : obs_) {
    if (o.task != task) continue;
    if (!best || o.reward > best->second) best = {o.action, o.reward};
  }
  return best;
}

std::vector<Action> History::actions_for(int task) const {
  std::vector<Action> out;
  for (const auto& o : obs_) {
    if (o.task != task) continue;
    bool dup = false;
    for (const auto& a : out)
      if (a == o.action) { dup = true; break; }
    if (!dup) out.push_back(o.action);
  }
  return out;
}

void History::training_data(int task, std::vector<Action>* actions,
                            std::vector<double>* rewards) const {
  actions->clear();
  rewards->clear();
  for (const auto& o : obs_) {
    if (o.task != task) continue;
    actions->push_back(o.action);
    rewards->push_back(o.reward);
  }
}

int History::count_for(int task) const {
  int n = 0;
  for (const auto& o : obs_)
    if (o.task == task) ++n;
  return n;
}

History History::prefix(int t) const {
  History h;
  const int n = std::min<int>(t, size());
  h.obs_.assign(obs_.begin(), obs_.begin() + n);
  return h;
}

std::optional<std::pair<Action, double>> incumbent(const History& history,
                                                   int task, int n_tasks) {
  if (task < 0 || task >= n_tasks)
    throw std::out_of_range("incumbent: invalid task index");
  return history.incumbent(task);
}

PolicyMap extract_policy(const History& history, const TaskSpace& tasks,
                         const ActionSpace& actions, Rng& rng) {
  PolicyMap policy;
  policy.actions.reserve(tasks.size());
  policy.provenance.reserve(tasks.size());
  for (int x = 0; x < tasks.size(); ++x) {
    if (auto inc = history.incumbent(x)) {
      policy.actions.push_back(inc->first);
      policy.provenance.push_back(PolicyMap::Provenance::incumbent);
    } else {
      policy.actions.push_back(actions.sample_uniform(rng));
      policy.provenance.push_back(PolicyMap::Provenance::random_fallback);
    }
  }
  return policy;
}

}  // namespace mtbo
