#include "mtbo/benchsuite.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace mtbo {

void TokamakSurrogateParams::validate() const {
  if (tasks.empty())
    throw std::invalid_argument("TokamakSurrogateParams: no tasks");
  if (w_co <= 0.0 || w_cc <= 0.0 || w_co + w_cc <= 0.0)
    throw std::invalid_argument("TokamakSurrogateParams: beam weights must be positive");
  for (const auto& t : tasks)
    if (t.k_stab <= 0.0 || t.k_pres <= 0.0)
      throw std::invalid_argument("TokamakSurrogateParams: decay rates must be positive");
}

TokamakSurrogateParams default_tokamak_params() {
  TokamakSurrogateParams p;
  // k_stab >> k_pres gives each hard task a broad high-reward band around an
  // interior optimum power at low power (rarely hit by uniform sampling of
  // the beam box), with a gentle stability drop below it and a low plateau
  // above. Half the tasks are near-flat, so difficulty is heterogeneous:
  // budget spent on them buys almost nothing.
  //                 c_stab   k_stab  c_pres  k_pres
  p.tasks = {
      {0.00180, 3.5, 0.25, 0.12, 0.0, 0.0},  // near-flat, low amplitude
      {0.00250, 5.0, 0.35, 0.20, 0.0, 0.0},  // near-flat, low amplitude
      {0.72461, 14.0, 6.0, 3.50, 0.0, 0.0},
      {0.39601, 13.0, 4.5, 3.20, 0.0, 0.0},
      {0.00200, 3.0, 0.3, 0.10, 0.0, 0.0},  // near-flat, low amplitude
      {0.00150, 4.0, 0.3, 0.15, 0.0, 0.0},  // near-flat, low amplitude
      {1.36413, 13.0, 8.0, 3.00, 0.0, 0.0},
      {0.34636, 12.0, 3.0, 3.00, 0.0, 0.0},
  };
  return p;
}

TokamakTaskParams constant_task_params(double reward_level) {
  TokamakTaskParams t;
  t.c_stab = 0.0;
  t.c_pres = 0.0;
  t.k_stab = 1.0;
  t.k_pres = 1.0;
  t.baseline_stab = 0.0;
  t.baseline_pres = reward_level / 10.0;  // w_beta default
  return t;
}

SurrogateOutput tokamak_surrogate(const TokamakSurrogateParams& params,
                                  int task, const Action& action) {
  params.validate();
  if (task < 0 || task >= static_cast<int>(params.tasks.size()))
    throw std::out_of_range("tokamak_surrogate: invalid task index");
  if (action.size() != 2)
    throw std::domain_error("tokamak_surrogate: action must be 2-D");
  for (int d = 0; d < 2; ++d)
    if (action[d] < 0.001 || action[d] > 1.0)
      throw std::domain_error("tokamak_surrogate: action outside [0.001, 1]^2");

  const auto& t = params.tasks[static_cast<std::size_t>(task)];
  const double power =
      (params.w_co * action[0] + params.w_cc * action[1]) /
      (params.w_co + params.w_cc);
  SurrogateOutput out;
  out.stability = t.baseline_stab - t.c_stab * std::exp(-t.k_stab * power);
  out.pressure = t.baseline_pres + t.c_pres * std::exp(-t.k_pres * power);
  out.reward = params.w_beta * out.pressure + params.w_omega * out.stability;
  return out;
}

ActionSpace tokamak_action_space(std::vector<Action> grid) {
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.001, 0.001;
  hi << 1.0, 1.0;
  return ActionSpace(lo, hi, std::move(grid));
}

GroundTruthTable tokamak_truth_table(const TokamakSurrogateParams& params,
                                     const std::vector<Action>& grid) {
  GroundTruthTable table;
  table.grid = grid;
  table.values.resize(static_cast<Eigen::Index>(params.tasks.size()),
                      static_cast<Eigen::Index>(grid.size()));
  for (int x = 0; x < static_cast<int>(params.tasks.size()); ++x)
    for (int i = 0; i < static_cast<int>(grid.size()); ++i)
      table.values(x, i) = tokamak_surrogate(params, x, grid[i]).reward;
  return table;
}

GroundTruthTable sample_prior_truth(int n_tasks,
                                    const std::vector<Action>& grid,
                                    const GpHyperparams& hp,
                                    std::uint64_t seed) {
  if (grid.empty())
    throw std::invalid_argument("sample_prior_truth: empty grid");
  GroundTruthTable table;
  table.grid = grid;
  table.values.resize(n_tasks, static_cast<Eigen::Index>(grid.size()));
  const Eigen::MatrixXd K = kernel_matrix(grid, hp);
  const Eigen::MatrixXd L = cholesky_with_jitter(K, hp.signal_variance);
  for (int x = 0; x < n_tasks; ++x) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(x), kSaltTruth);
    Eigen::VectorXd z(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    table.values.row(x) = (L * z).transpose();
  }
  return table;
}

double noisy_evaluate(double true_value, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noisy_evaluate: sigma must be >= 0");
  if (sigma == 0.0) return true_value;
  return true_value + sigma * rng.normal();
}

std::string truth_table_to_json(const GroundTruthTable& table) {
  nlohmann::json j;
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& a : table.grid)
    grid.push_back(std::vector<double>(a.data(), a.data() + a.size()));
  j["grid"] = grid;
  nlohmann::json values = nlohmann::json::array();
  for (int x = 0; x < table.n_tasks(); ++x) {
    std::vector<double> row(table.grid_size());
    for (int i = 0; i < table.grid_size(); ++i) row[i] = table.values(x, i);
    values.push_back(row);
  }
  j["values"] = values;
  return j.dump();
}

GroundTruthTable truth_table_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  GroundTruthTable table;
  for (const auto& ja : j.at("grid")) {
    const auto v = ja.get<std::vector<double>>();
    table.grid.push_back(
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  const auto rows = j.at("values").get<std::vector<std::vector<double>>>();
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.grid.size()));
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (rows[x].size() != table.grid.size())
      throw std::invalid_argument("truth_table_from_json: ragged values");
    for (std::size_t i = 0; i < rows[x].size(); ++i)
      table.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(i)) =
          rows[x][i];
  }
  return table;
}

}  // namespace mtbo
