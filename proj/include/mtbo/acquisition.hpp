#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mtbo/domain.hpp"
#include "mtbo/gp.hpp"
#include "mtbo/rng.hpp"

namespace mtbo {

enum class Algorithm { mts, uniform_ts, random_search };

struct StrategyConfig {
  int capital = 1;               // T
  int init_capital = 0;          // round-robin random-search phase
  int candidates_per_round = 500;
  Algorithm algorithm = Algorithm::mts;
  std::uint64_t seed = 0;
  // When set, per-task GPs use these hyperparameters verbatim (no fitting,
  // no reward standardization).
  std::optional<GpHyperparams> fixed_hyperparams;

  void validate() const;
};

struct CandidateSet {
  std::vector<Action> points;
  int n_observed = 0;  // points[0..n_observed) are the task's observed actions
};

/// Observed actions of the task (deduplicated, first-seen order) followed by
/// M fresh uniform draws, or by the full grid when |grid| <= M.
CandidateSet candidate_set(int task, const History& history,
                           const ActionSpace& actions, int m, Rng& rng);

/// (max over sampled - max over sampled at incumbent positions) * weight.
/// With no incumbents the second term is the minimum over sampled, so the
/// score stays finite and nonnegative.
double improvement_score(const Eigen::VectorXd& sampled,
                         const std::vector<int>& incumbent_positions,
                         double weight);

struct RoundDecision {
  int task = 0;
  Action action;
  Eigen::VectorXd task_scores;          // weighted improvement per task
  std::vector<CandidateSet> candidates; // per task, as used this round
  std::vector<Eigen::VectorXd> sampled; // per task, joint posterior draws
};

/// Produces one joint sampled-value vector over a task's candidate set.
using TaskSampler =
    std::function<Eigen::VectorXd(int task, const CandidateSet&, Rng&)>;

/// One MTS round against an injectable sampler: per-task candidate sets and
/// draws in task index order, weighted-improvement task argmax, then sampled
/// argmax for the action. Ties break uniformly at random via rng.
RoundDecision mts_round(const TaskSampler& sampler, const History& history,
                        const TaskSpace& tasks, const ActionSpace& actions,
                        const StrategyConfig& cfg, Rng& rng);

/// Same, drawing from the given per-task GP posteriors.
RoundDecision mts_round(const std::vector<GpModel>& models,
                        const History& history, const TaskSpace& tasks,
                        const ActionSpace& actions, const StrategyConfig& cfg,
                        Rng& rng);

struct QueryChoice {
  int task = 0;
  Action action;
};

/// Builds the GP for one task from the history snapshot: fixed hyperparameters
/// when configured, marginal-likelihood fit otherwise.
GpModel build_task_model(int task, const History& history,
                         const ActionSpace& actions, const StrategyConfig& cfg,
                         Rng& rng);

/// Pure query selection for dispatch index i (0-based): round-robin random
/// search while i < init_capital, then the configured strategy. All
/// randomness comes from stream (cfg.seed, i), so replays and asynchronous
/// executors agree with the sequential loop.
QueryChoice select_query(const TaskSpace& tasks, const ActionSpace& actions,
                         const StrategyConfig& cfg, const History& history,
                         int dispatch_index);

/// reward = objective(task, action, round); round is 1-based.
using Objective = std::function<double(int, const Action&, int)>;

/// Sequential reference loop: runs all T evaluations in order and extracts
/// the final policy.
std::pair<History, PolicyMap> run_strategy(const Objective& objective,
                                           const TaskSpace& tasks,
                                           const ActionSpace& actions,
                                           const StrategyConfig& cfg);

}  // namespace mtbo
