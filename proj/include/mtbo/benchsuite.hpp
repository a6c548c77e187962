#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "mtbo/domain.hpp"
#include "mtbo/gp.hpp"
#include "mtbo/metrics.hpp"
#include "mtbo/rng.hpp"

namespace mtbo {

/// One task of the synthetic tokamak-style objective. With effective beam
/// power P, stability = baseline_stab - c_stab * exp(-k_stab * P) and
/// pressure = baseline_pres + c_pres * exp(-k_pres * P), so stability rises
/// and pressure falls as power grows.
struct TokamakTaskParams {
  double c_stab = 0.0;
  double k_stab = 1.0;
  double c_pres = 0.0;
  double k_pres = 1.0;
  double baseline_stab = 0.0;
  double baseline_pres = 0.0;
};

struct TokamakSurrogateParams {
  std::vector<TokamakTaskParams> tasks;
  double w_co = 6.0;   // co-current beam count
  double w_cc = 2.0;   // counter-current beam count
  double w_beta = 10.0;
  double w_omega = 100.0;

  void validate() const;
};

/// Eight tasks with spread decay rates and amplitudes: some have sharp
/// interior optima, tasks 4 and 5 are near-flat low-amplitude plateaus.
TokamakSurrogateParams default_tokamak_params();

/// A zero-slope task (both components constant); useful as a control for
/// resource-allocation experiments.
TokamakTaskParams constant_task_params(double reward_level);

struct SurrogateOutput {
  double stability = 0.0;
  double pressure = 0.0;
  double reward = 0.0;  // w_beta * pressure + w_omega * stability
};

/// Evaluates one task at a 2-D action (p_co, p_cc) in [0.001, 1]^2.
SurrogateOutput tokamak_surrogate(const TokamakSurrogateParams& params,
                                  int task, const Action& action);

/// [0.001, 1]^2, the surrogate's action box.
ActionSpace tokamak_action_space(std::vector<Action> grid = {});

/// Truth table from the surrogate evaluated on an action grid.
GroundTruthTable tokamak_truth_table(const TokamakSurrogateParams& params,
                                     const std::vector<Action>& grid);

/// One exact joint draw per task from GP(0, k_hp) on the grid; deterministic
/// per seed (per-task streams).
GroundTruthTable sample_prior_truth(int n_tasks,
                                    const std::vector<Action>& grid,
                                    const GpHyperparams& hp,
                                    std::uint64_t seed);

/// true value + sigma * standard normal draw.
double noisy_evaluate(double true_value, double sigma, Rng& rng);

std::string truth_table_to_json(const GroundTruthTable& table);
GroundTruthTable truth_table_from_json(const std::string& text);

}  // namespace mtbo
