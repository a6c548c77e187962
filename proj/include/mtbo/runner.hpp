#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtbo/acquisition.hpp"
#include "mtbo/benchsuite.hpp"
#include "mtbo/domain.hpp"
#include "mtbo/metrics.hpp"

namespace mtbo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run-log records (JSONL)

nlohmann::json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Simulated evaluation latency (logical time units)

struct LatencySpec {
  enum class Kind { constant, uniform, lognormal };
  Kind kind = Kind::constant;
  double a = 1.0;  // constant value / uniform lo / lognormal mu
  double b = 0.0;  // uniform hi / lognormal sigma

  double sample(Rng& rng) const;
  void validate() const;
  nlohmann::json to_json() const;
  static LatencySpec from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Asynchronous shared-pool executor (deterministic event loop)

using SelectFn = std::function<QueryChoice(const History& snapshot, int dispatch_index)>;

/// Runs the given 1-based round indices on `workers` logical workers. Each
/// worker selects from the snapshot current at its dispatch time (in-flight
/// results excluded); completions append in simulated-completion-time order.
/// Capital is consumed at dispatch. `on_complete` fires per appended
/// observation, in append order.
History run_async(const SelectFn& select, const Objective& objective,
                  const std::vector<int>& pending_rounds, int workers,
                  const LatencySpec& latency, std::uint64_t seed,
                  const History& initial = {},
                  const std::function<void(const Observation&)>& on_complete = {});

// ---------------------------------------------------------------------------
// Experiment configuration

struct BenchmarkConfig {
  enum class Type { tokamak, truth_table };
  Type type = Type::tokamak;
  TokamakSurrogateParams tokamak = default_tokamak_params();
  std::optional<GroundTruthTable> table;  // for Type::truth_table
  double noise_sigma = 0.1;

  double true_value(int task, const Action& a) const;
  int n_tasks() const;
  /// Truth table when one is available (truth_table type, or a tokamak
  /// benchmark restricted to a grid).
  std::optional<GroundTruthTable> truth(const ActionSpace& actions) const;
};

struct ExperimentConfig {
  TaskSpace tasks = TaskSpace::uniform(8);
  ActionSpace actions = tokamak_action_space();
  StrategyConfig strategy;
  std::vector<Algorithm> algorithms;  // >= 1; strategy.algorithm mirrors [0]
  BenchmarkConfig benchmark;
  int trials = 1;
  int workers = 1;
  LatencySpec latency;
  std::string output_dir = "mtbo_out";
  std::uint64_t seed = 0;
  double epsilon = 1e-3;
  nlohmann::json resolved;  // canonical form, echoed into log headers

  void validate() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::string algorithm_name(Algorithm algo);
Algorithm algorithm_from_name(const std::string& name);

/// FNV-1a over the canonical trial-header config dump (output_dir excluded).
std::uint64_t config_hash(const nlohmann::json& resolved);

// ---------------------------------------------------------------------------
// Experiment orchestration

struct TrialResult {
  Algorithm algorithm = Algorithm::mts;
  int trial = 0;
  std::uint64_t trial_seed = 0;
  History history;
  PolicyMap policy;
  std::string log_path;
  bool failed = false;
  std::string error;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;  // grouped by algorithm, trial-major
  std::string output_dir;
};

/// Runs trials for every configured algorithm, streams JSONL logs, writes
/// per-trial metrics CSVs, one aggregate CSV per algorithm and a combined
/// comparison CSV (pooled per-seed optima across algorithms).
/// MTBO_OUTPUT_DIR overrides config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Parses a JSONL run log; returns (header, history in file order).
std::pair<nlohmann::json, History> read_run_log(const std::filesystem::path& path);

/// Continues an interrupted trial log until capital is exhausted; refuses on
/// a header/config mismatch. Returns the completed history. A log that is
/// already complete is left untouched.
History resume(const std::filesystem::path& log_path,
               const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Prior-sampled verification of the regret bound

struct BoundCheckConfig {
  int n_tasks = 3;
  int grid_size = 10;
  int capital = 60;
  int truths = 50;
  int seeds_per_truth = 2;
  int designs = 20;  // random designs for the information-gain estimate
  double sigma = 0.1;
  GpHyperparams hp;  // known model hyperparameters (1-D grid on [0, 1])
  std::uint64_t seed = 0;

  BoundCheckConfig();
};

struct BoundCheckResult {
  Eigen::VectorXd mean_regret;  // per round t = 1..capital
  Eigen::VectorXd gamma_hat;
  Eigen::VectorXd bound;
  Eigen::MatrixXd run_regret;   // runs x capital, per-run curves
  std::vector<History> histories;
  bool holds = false;
};

BoundCheckResult run_bound_check(const BoundCheckConfig& cfg);

}  // namespace mtbo
