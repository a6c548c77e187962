#include "mtbo/acquisition.hpp"

#include <algorithm>
#include <stdexcept>

namespace mtbo {

namespace {

// Index of the maximum entry; exact ties resolved uniformly at random.
// Consumes rng only when a tie exists.
int argmax_with_ties(const Eigen::VectorXd& values, Rng& rng) {
  const double best = values.maxCoeff();
  std::vector<int> ties;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] == best) ties.push_back(static_cast<int>(i));
  if (ties.size() == 1) return ties[0];
  return ties[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(ties.size())))];
}

}  // namespace

void StrategyConfig::validate() const {
  if (capital < 1) throw std::invalid_argument("StrategyConfig: capital must be >= 1");
  if (init_capital < 0 || init_capital > capital)
    throw std::invalid_argument("StrategyConfig: init_capital must be in [0, capital]");
  if (candidates_per_round < 1)
    throw std::invalid_argument("StrategyConfig: candidates_per_round must be >= 1");
}

CandidateSet candidate_set(int task, const History& history,
                           const ActionSpace& actions, int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("candidate_set: m must be >= 1");
  CandidateSet cs;
  cs.points = history.actions_for(task);
  cs.n_observed = static_cast<int>(cs.points.size());

  auto known = [&](const Action& a) {
    for (const auto& p : cs.points)
      if (p == a) return true;
    return false;
  };

  if (!actions.grid.empty()) {
    if (static_cast<int>(actions.grid.size()) <= m) {
      for (const auto& g : actions.grid)
        if (!known(g)) cs.points.push_back(g);
    } else {
      for (int i = 0; i < m; ++i) {
        const Action g = actions.grid[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(actions.grid.size())))];
        if (!known(g)) cs.points.push_back(g);
      }
    }
  } else {
    for (int i = 0; i < m; ++i) cs.points.push_back(actions.sample_uniform(rng));
  }
  return cs;
}

double improvement_score(const Eigen::VectorXd& sampled,
                         const std::vector<int>& incumbent_positions,
                         double weight) {
  if (sampled.size() == 0)
    throw std::invalid_argument("improvement_score: empty candidate values");
  const double best = sampled.maxCoeff();
  double incumbent;
  if (incumbent_positions.empty()) {
    incumbent = sampled.minCoeff();
  } else {
    incumbent = sampled[incumbent_positions.front()];
    for (int p : incumbent_positions)
      incumbent = std::max(incumbent, sampled[p]);
  }
  return (best - incumbent) * weight;
}

RoundDecision mts_round(const TaskSampler& sampler, const History& history,
                        const TaskSpace& tasks, const ActionSpace& actions,
                        const StrategyConfig& cfg, Rng& rng) {
  const int n = tasks.size();
  RoundDecision dec;
  dec.task_scores.resize(n);
  dec.candidates.reserve(n);
  dec.sampled.reserve(n);

  for (int x = 0; x < n; ++x) {
    CandidateSet cs =
        candidate_set(x, history, actions, cfg.candidates_per_round, rng);
    Eigen::VectorXd draw = sampler(x, cs, rng);
    if (draw.size() != static_cast<Eigen::Index>(cs.points.size()))
      throw std::invalid_argument("mts_round: sampler size mismatch");
    std::vector<int> incumbent_positions(cs.n_observed);
    for (int i = 0; i < cs.n_observed; ++i) incumbent_positions[i] = i;
    dec.task_scores[x] =
        improvement_score(draw, incumbent_positions, tasks.weights[x]);
    dec.candidates.push_back(std::move(cs));
    dec.sampled.push_back(std::move(draw));
  }

  dec.task = argmax_with_ties(dec.task_scores, rng);
  const int a = argmax_with_ties(dec.sampled[dec.task], rng);
  dec.action = dec.candidates[dec.task].points[static_cast<std::size_t>(a)];
  return dec;
}

RoundDecision mts_round(const std::vector<GpModel>& models,
                        const History& history, const TaskSpace& tasks,
                        const ActionSpace& actions, const StrategyConfig& cfg,
                        Rng& rng) {
  if (static_cast<int>(models.size()) != tasks.size())
    throw std::invalid_argument("mts_round: one model per task required");
  TaskSampler sampler = [&models](int task, const CandidateSet& cs, Rng& r) {
    return models[static_cast<std::size_t>(task)].sample_posterior(cs.points, r);
  };
  return mts_round(sampler, history, tasks, actions, cfg, rng);
}

GpModel build_task_model(int task, const History& history,
                         const ActionSpace& actions, const StrategyConfig& cfg,
                         Rng& rng) {
  std::vector<Action> xs;
  std::vector<double> ys;
  history.training_data(task, &xs, &ys);
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  if (cfg.fixed_hyperparams)
    return GpModel(*cfg.fixed_hyperparams, std::move(xs), y, /*standardize=*/false);
  FitConfig fit_cfg;
  fit_cfg.span = actions.upper - actions.lower;
  return fit_model(xs, y, fit_cfg, rng);
}

QueryChoice select_query(const TaskSpace& tasks, const ActionSpace& actions,
                         const StrategyConfig& cfg, const History& history,
                         int dispatch_index) {
  Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(dispatch_index),
                        kSaltSelect);
  const int n = tasks.size();

  if (dispatch_index < cfg.init_capital)
    return {dispatch_index % n, actions.sample_uniform(rng)};

  switch (cfg.algorithm) {
    case Algorithm::mts: {
      std::vector<GpModel> models;
      models.reserve(n);
      for (int x = 0; x < n; ++x)
        models.push_back(build_task_model(x, history, actions, cfg, rng));
      RoundDecision dec = mts_round(models, history, tasks, actions, cfg, rng);
      return {dec.task, dec.action};
    }
    case Algorithm::uniform_ts: {
      const int x = rng.uniform_int(n);
      GpModel model = build_task_model(x, history, actions, cfg, rng);
      CandidateSet cs =
          candidate_set(x, history, actions, cfg.candidates_per_round, rng);
      const Eigen::VectorXd draw = model.sample_posterior(cs.points, rng);
      const int a = argmax_with_ties(draw, rng);
      return {x, cs.points[static_cast<std::size_t>(a)]};
    }
    case Algorithm::random_search: {
      const int x = rng.uniform_int(n);
      return {x, actions.sample_uniform(rng)};
    }
  }
  throw std::logic_error("select_query: unknown algorithm");
}

std::pair<History, PolicyMap> run_strategy(const Objective& objective,
                                           const TaskSpace& tasks,
                                           const ActionSpace& actions,
                                           const StrategyConfig& cfg) {
  cfg.validate();
  History history;
  for (int i = 0; i < cfg.capital; ++i) {
    const QueryChoice choice = select_query(tasks, actions, cfg, history, i);
    const int round = i + 1;
    const double y = objective(choice.task, choice.action, round);
    Observation obs;
    obs.task = choice.task;
    obs.action = choice.action;
    obs.reward = y;
    obs.round = round;
    obs.worker_id = 0;
    obs.dispatched_at = static_cast<double>(i);
    obs.completed_at = static_cast<double>(round);
    history.append(std::move(obs));
  }
  Rng policy_rng = make_stream(cfg.seed, 0, kSaltPolicy);
  PolicyMap policy = extract_policy(history, tasks, actions, policy_rng);
  return {std::move(history), std::move(policy)};
}

}  // namespace mtbo
