#include "mtbo/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace mtbo {

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

nlohmann::json hyperparams_to_json(const GpHyperparams& hp) {
  return {{"lengthscales", to_vec(hp.lengthscales)},
          {"signal_variance", hp.signal_variance},
          {"noise_variance", hp.noise_variance},
          {"mean_constant", hp.mean_constant}};
}

GpHyperparams hyperparams_from_json(const nlohmann::json& j) {
  GpHyperparams hp;
  hp.lengthscales = from_vec(j.at("lengthscales").get<std::vector<double>>());
  hp.signal_variance = j.at("signal_variance").get<double>();
  hp.noise_variance = j.at("noise_variance").get<double>();
  hp.mean_constant = j.value("mean_constant", 0.0);
  return hp;
}

nlohmann::json tokamak_params_to_json(const TokamakSurrogateParams& p) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : p.tasks)
    tasks.push_back({{"c_stab", t.c_stab},
                     {"k_stab", t.k_stab},
                     {"c_pres", t.c_pres},
                     {"k_pres", t.k_pres},
                     {"baseline_stab", t.baseline_stab},
                     {"baseline_pres", t.baseline_pres}});
  return {{"tasks", tasks}, {"w_co", p.w_co},       {"w_cc", p.w_cc},
          {"w_beta", p.w_beta}, {"w_omega", p.w_omega}};
}

TokamakSurrogateParams tokamak_params_from_json(const nlohmann::json& j) {
  TokamakSurrogateParams p;
  p.tasks.clear();
  for (const auto& jt : j.at("tasks")) {
    TokamakTaskParams t;
    t.c_stab = jt.at("c_stab").get<double>();
    t.k_stab = jt.at("k_stab").get<double>();
    t.c_pres = jt.at("c_pres").get<double>();
    t.k_pres = jt.at("k_pres").get<double>();
    t.baseline_stab = jt.value("baseline_stab", 0.0);
    t.baseline_pres = jt.value("baseline_pres", 0.0);
    p.tasks.push_back(t);
  }
  p.w_co = j.value("w_co", 6.0);
  p.w_cc = j.value("w_cc", 2.0);
  p.w_beta = j.value("w_beta", 10.0);
  p.w_omega = j.value("w_omega", 100.0);
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// JSONL records

nlohmann::json observation_to_json(const Observation& obs) {
  nlohmann::json j;
  j["round"] = obs.round;
  j["task"] = obs.task;
  j["action"] = to_vec(obs.action);
  j["reward"] = obs.reward;
  if (obs.worker_id) j["worker_id"] = *obs.worker_id;
  if (obs.dispatched_at) j["dispatched_at"] = *obs.dispatched_at;
  if (obs.completed_at) j["completed_at"] = *obs.completed_at;
  return j;
}

Observation observation_from_json(const nlohmann::json& j) {
  Observation obs;
  obs.round = j.at("round").get<int>();
  obs.task = j.at("task").get<int>();
  obs.action = from_vec(j.at("action").get<std::vector<double>>());
  obs.reward = j.at("reward").get<double>();
  if (j.contains("worker_id")) obs.worker_id = j["worker_id"].get<int>();
  if (j.contains("dispatched_at")) obs.dispatched_at = j["dispatched_at"].get<double>();
  if (j.contains("completed_at")) obs.completed_at = j["completed_at"].get<double>();
  return obs;
}

// ---------------------------------------------------------------------------
// LatencySpec

double LatencySpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::constant:
      return a;
    case Kind::uniform:
      return rng.uniform(a, b);
    case Kind::lognormal:
      return std::exp(a + b * rng.normal());
  }
  throw std::logic_error("LatencySpec: unknown kind");
}

void LatencySpec::validate() const {
  switch (kind) {
    case Kind::constant:
      if (a < 0.0) throw ConfigError("latency: constant value must be >= 0");
      return;
    case Kind::uniform:
      if (a < 0.0 || b < a) throw ConfigError("latency: need 0 <= lo <= hi");
      return;
    case Kind::lognormal:
      if (b < 0.0) throw ConfigError("latency: lognormal sigma must be >= 0");
      return;
  }
}

nlohmann::json LatencySpec::to_json() const {
  switch (kind) {
    case Kind::constant:
      return {{"kind", "constant"}, {"value", a}};
    case Kind::uniform:
      return {{"kind", "uniform"}, {"lo", a}, {"hi", b}};
    case Kind::lognormal:
      return {{"kind", "lognormal"}, {"mu", a}, {"sigma", b}};
  }
  throw std::logic_error("LatencySpec: unknown kind");
}

LatencySpec LatencySpec::from_json(const nlohmann::json& j) {
  LatencySpec spec;
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    spec.kind = Kind::constant;
    spec.a = j.value("value", 1.0);
  } else if (kind == "uniform") {
    spec.kind = Kind::uniform;
    spec.a = j.at("lo").get<double>();
    spec.b = j.at("hi").get<double>();
  } else if (kind == "lognormal") {
    spec.kind = Kind::lognormal;
    spec.a = j.at("mu").get<double>();
    spec.b = j.at("sigma").get<double>();
  } else {
    throw ConfigError("latency: unknown kind '" + kind + "'");
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Event-loop executor

History run_async(const SelectFn& select, const Objective& objective,
                  const std::vector<int>& pending_rounds, int workers,
                  const LatencySpec& latency, std::uint64_t seed,
                  const History& initial,
                  const std::function<void(const Observation&)>& on_complete) {
  if (workers < 1) throw std::invalid_argument("run_async: workers must be >= 1");
  latency.validate();

  History history = initial;
  double start = 0.0;
  for (const auto& o : initial.observations())
    if (o.completed_at) start = std::max(start, *o.completed_at);

  using WorkerSlot = std::pair<double, int>;  // (free_time, worker_id)
  std::priority_queue<WorkerSlot, std::vector<WorkerSlot>, std::greater<>>
      free_workers;
  for (int w = 0; w < workers; ++w) free_workers.emplace(start, w);

  struct PendingObs {
    double time;
    int seq;
    Observation obs;
    bool operator>(const PendingObs& other) const {
      return std::tie(time, seq) > std::tie(other.time, other.seq);
    }
  };
  std::priority_queue<PendingObs, std::vector<PendingObs>, std::greater<>>
      in_flight;

  auto flush_due = [&](double now) {
    while (!in_flight.empty() && in_flight.top().time <= now) {
      history.append(in_flight.top().obs);
      if (on_complete) on_complete(in_flight.top().obs);
      in_flight.pop();
    }
  };

  int seq = 0;
  for (int round : pending_rounds) {
    const auto [now, worker] = free_workers.top();
    free_workers.pop();
    flush_due(now);

    const int dispatch_index = round - 1;
    const QueryChoice choice = select(history, dispatch_index);
    Rng latency_rng =
        make_stream(seed, static_cast<std::uint64_t>(round), kSaltLatency);
    const double duration = latency.sample(latency_rng);
    const double reward = objective(choice.task, choice.action, round);

    Observation obs;
    obs.task = choice.task;
    obs.action = choice.action;
    obs.reward = reward;
    obs.round = round;
    obs.worker_id = worker;
    obs.dispatched_at = now;
    obs.completed_at = now + duration;
    in_flight.push({now + duration, seq++, std::move(obs)});
    free_workers.emplace(now + duration, worker);
  }
  flush_due(std::numeric_limits<double>::infinity());
  return history;
}

// ---------------------------------------------------------------------------
// Config

double BenchmarkConfig::true_value(int task, const Action& a) const {
  switch (type) {
    case Type::tokamak:
      return tokamak_surrogate(tokamak, task, a).reward;
    case Type::truth_table:
      return table->value(task, a);
  }
  throw std::logic_error("BenchmarkConfig: unknown type");
}

int BenchmarkConfig::n_tasks() const {
  return type == Type::tokamak ? static_cast<int>(tokamak.tasks.size())
                               : table->n_tasks();
}

std::optional<GroundTruthTable> BenchmarkConfig::truth(
    const ActionSpace& actions) const {
  if (type == Type::truth_table) return table;
  if (!actions.grid.empty()) return tokamak_truth_table(tokamak, actions.grid);
  return std::nullopt;
}

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::mts:
      return "mts";
    case Algorithm::uniform_ts:
      return "uniform_ts";
    case Algorithm::random_search:
      return "random";
  }
  throw std::logic_error("algorithm_name: unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "mts") return Algorithm::mts;
  if (name == "uniform_ts") return Algorithm::uniform_ts;
  if (name == "random") return Algorithm::random_search;
  throw ConfigError("unknown algorithm '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (algorithms.empty()) throw ConfigError("need at least one algorithm");
  try {
    strategy.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  latency.validate();
  if (benchmark.n_tasks() != tasks.size())
    throw ConfigError("benchmark task count does not match task space");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    cfg.seed = j.value("seed", 0ULL);
    cfg.trials = j.value("trials", 1);
    cfg.workers = j.value("workers", 1);
    cfg.output_dir = j.value("output_dir", std::string("mtbo_out"));
    cfg.epsilon = j.value("epsilon", 1e-3);
    if (j.contains("latency")) cfg.latency = LatencySpec::from_json(j["latency"]);

    // benchmark
    if (j.contains("benchmark")) {
      const auto& jb = j["benchmark"];
      const std::string type = jb.value("type", "tokamak");
      cfg.benchmark.noise_sigma = jb.value("noise_sigma", 0.1);
      if (type == "tokamak") {
        cfg.benchmark.type = BenchmarkConfig::Type::tokamak;
        if (jb.contains("params"))
          cfg.benchmark.tokamak = tokamak_params_from_json(jb["params"]);
      } else if (type == "truth_table") {
        cfg.benchmark.type = BenchmarkConfig::Type::truth_table;
        if (jb.contains("path")) {
          std::ifstream in(jb["path"].get<std::string>());
          if (!in) throw ConfigError("cannot open truth table file");
          std::stringstream buf;
          buf << in.rdbuf();
          cfg.benchmark.table = truth_table_from_json(buf.str());
        } else if (jb.contains("table")) {
          cfg.benchmark.table = truth_table_from_json(jb["table"].dump());
        } else {
          throw ConfigError("truth_table benchmark needs 'path' or 'table'");
        }
      } else {
        throw ConfigError("unknown benchmark type '" + type + "'");
      }
    }

    // tasks
    const int default_tasks = cfg.benchmark.n_tasks();
    if (j.contains("tasks")) {
      const auto& jt = j["tasks"];
      const int count = jt.value("count", default_tasks);
      std::vector<std::string> ids;
      if (jt.contains("ids"))
        ids = jt["ids"].get<std::vector<std::string>>();
      else
        for (int i = 0; i < count; ++i) ids.push_back("task_" + std::to_string(i));
      Eigen::VectorXd weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ids.size()));
      if (jt.contains("weights"))
        weights = from_vec(jt["weights"].get<std::vector<double>>());
      cfg.tasks = TaskSpace(std::move(ids), std::move(weights));
    } else {
      cfg.tasks = TaskSpace::uniform(default_tasks);
    }

    // actions
    if (j.contains("actions")) {
      const auto& ja = j["actions"];
      Eigen::VectorXd lo = from_vec(ja.at("lower").get<std::vector<double>>());
      Eigen::VectorXd hi = from_vec(ja.at("upper").get<std::vector<double>>());
      std::vector<Action> grid;
      if (ja.contains("grid"))
        for (const auto& g : ja["grid"])
          grid.push_back(from_vec(g.get<std::vector<double>>()));
      cfg.actions = ActionSpace(std::move(lo), std::move(hi), std::move(grid));
    } else {
      cfg.actions = tokamak_action_space();
    }

    // strategy
    if (j.contains("strategy")) {
      const auto& js = j["strategy"];
      cfg.strategy.capital = js.value("capital", 125);
      cfg.strategy.init_capital = js.value("init_capital", 0);
      cfg.strategy.candidates_per_round = js.value("candidates_per_round", 500);
      if (js.contains("fixed_hyperparams"))
        cfg.strategy.fixed_hyperparams =
            hyperparams_from_json(js["fixed_hyperparams"]);
      if (js.contains("algorithm")) {
        if (js["algorithm"].is_array())
          for (const auto& name : js["algorithm"])
            cfg.algorithms.push_back(algorithm_from_name(name.get<std::string>()));
        else
          cfg.algorithms.push_back(
              algorithm_from_name(js["algorithm"].get<std::string>()));
      }
    }
    if (cfg.algorithms.empty()) cfg.algorithms.push_back(Algorithm::mts);
    cfg.strategy.algorithm = cfg.algorithms.front();
    cfg.strategy.seed = cfg.seed;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  // canonical resolved form
  nlohmann::json resolved;
  resolved["seed"] = cfg.seed;
  resolved["trials"] = cfg.trials;
  resolved["workers"] = cfg.workers;
  resolved["output_dir"] = cfg.output_dir;
  resolved["epsilon"] = cfg.epsilon;
  resolved["latency"] = cfg.latency.to_json();
  resolved["tasks"] = {{"ids", cfg.tasks.ids},
                       {"weights", to_vec(cfg.tasks.weights)}};
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : cfg.actions.grid) grid.push_back(to_vec(g));
  resolved["actions"] = {{"lower", to_vec(cfg.actions.lower)},
                         {"upper", to_vec(cfg.actions.upper)},
                         {"grid", grid}};
  nlohmann::json algos = nlohmann::json::array();
  for (Algorithm a : cfg.algorithms) algos.push_back(algorithm_name(a));
  resolved["strategy"] = {
      {"algorithm", algos},
      {"capital", cfg.strategy.capital},
      {"init_capital", cfg.strategy.init_capital},
      {"candidates_per_round", cfg.strategy.candidates_per_round}};
  if (cfg.strategy.fixed_hyperparams)
    resolved["strategy"]["fixed_hyperparams"] =
        hyperparams_to_json(*cfg.strategy.fixed_hyperparams);
  resolved["benchmark"]["noise_sigma"] = cfg.benchmark.noise_sigma;
  if (cfg.benchmark.type == BenchmarkConfig::Type::tokamak) {
    resolved["benchmark"]["type"] = "tokamak";
    resolved["benchmark"]["params"] = tokamak_params_to_json(cfg.benchmark.tokamak);
  } else {
    resolved["benchmark"]["type"] = "truth_table";
    resolved["benchmark"]["table"] =
        nlohmann::json::parse(truth_table_to_json(*cfg.benchmark.table));
  }
  cfg.resolved = std::move(resolved);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_experiment_config(j);
}

std::uint64_t config_hash(const nlohmann::json& resolved) {
  nlohmann::json stripped = resolved;
  stripped.erase("output_dir");
  if (stripped.contains("config") && stripped["config"].is_object())
    stripped["config"].erase("output_dir");
  const std::string dump = stripped.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

nlohmann::json make_trial_header(const ExperimentConfig& cfg, Algorithm algo,
                                 int trial, std::uint64_t trial_seed) {
  nlohmann::json hashed;
  hashed["config"] = cfg.resolved;
  hashed["algorithm"] = algorithm_name(algo);
  hashed["trial"] = trial;
  hashed["trial_seed"] = trial_seed;
  nlohmann::json header = hashed;
  header["config_hash"] = config_hash(hashed);
  header["version"] = kVersion;
  return header;
}

Objective make_objective(const BenchmarkConfig& bench, std::uint64_t trial_seed) {
  return [bench, trial_seed](int task, const Action& a, int round) {
    const double value = bench.true_value(task, a);
    Rng rng = make_stream(trial_seed, static_cast<std::uint64_t>(round), kSaltNoise);
    return noisy_evaluate(value, bench.noise_sigma, rng);
  };
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("MTBO_OUTPUT_DIR"); env && *env)
    return std::filesystem::path(env);
  return std::filesystem::path(cfg.output_dir);
}

// mean and standard error across curves of equal length
std::pair<Eigen::VectorXd, Eigen::VectorXd> mean_se(
    const std::vector<Eigen::VectorXd>& curves) {
  const auto k = static_cast<Eigen::Index>(curves.size());
  const Eigen::Index T = curves.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(T);
  for (const auto& c : curves) mean += c;
  mean /= static_cast<double>(k);
  Eigen::VectorXd se = Eigen::VectorXd::Zero(T);
  if (k > 1) {
    for (const auto& c : curves) se += (c - mean).array().square().matrix();
    se = (se / static_cast<double>(k - 1)).array().sqrt() /
         std::sqrt(static_cast<double>(k));
  }
  return {mean, se};
}

std::string aggregate_csv(const std::vector<Eigen::VectorXd>& totals,
                          const std::vector<Eigen::VectorXd>& norm_regrets,
                          const std::vector<Eigen::VectorXd>& bounds) {
  std::ostringstream out;
  out.precision(17);
  const auto [mean, se] = mean_se(totals);
  out << "round,mean_total_approx_regret,se_total_approx_regret";
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> norm;
  Eigen::VectorXd bound_mean;
  if (!norm_regrets.empty()) {
    norm = mean_se(norm_regrets);
    out << ",mean_norm_regret,se_norm_regret";
    if (!bounds.empty()) {
      bound_mean = mean_se(bounds).first;
      out << ",mean_bound";
    }
  }
  out << "\n";
  for (Eigen::Index t = 0; t < mean.size(); ++t) {
    out << (t + 1) << "," << mean[t] << "," << se[t];
    if (norm) {
      out << "," << norm->first[t] << "," << norm->second[t];
      if (bound_mean.size() > 0) out << "," << bound_mean[t];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path out_dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(out_dir);
  const std::optional<GroundTruthTable> truth = cfg.benchmark.truth(cfg.actions);

  ExperimentResult result;
  result.output_dir = out_dir.string();

  for (Algorithm algo : cfg.algorithms) {
    std::vector<Eigen::VectorXd> totals, norms, bounds;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t trial_seed = cfg.seed + static_cast<std::uint64_t>(trial);
      StrategyConfig scfg = cfg.strategy;
      scfg.algorithm = algo;
      scfg.seed = trial_seed;

      TrialResult tr;
      tr.algorithm = algo;
      tr.trial = trial;
      tr.trial_seed = trial_seed;
      const std::filesystem::path log_path =
          out_dir / (algorithm_name(algo) + "_trial" + std::to_string(trial) +
                     ".jsonl");
      tr.log_path = log_path.string();

      std::ofstream log(log_path);
      if (!log) throw std::runtime_error("cannot write " + log_path.string());
      log << make_trial_header(cfg, algo, trial, trial_seed).dump() << "\n";
      log.flush();

      const SelectFn select = [&](const History& snapshot, int i) {
        return select_query(cfg.tasks, cfg.actions, scfg, snapshot, i);
      };
      const Objective objective = make_objective(cfg.benchmark, trial_seed);
      std::vector<int> rounds(static_cast<std::size_t>(scfg.capital));
      for (int i = 0; i < scfg.capital; ++i) rounds[static_cast<std::size_t>(i)] = i + 1;

      try {
        tr.history = run_async(
            select, objective, rounds, cfg.workers, cfg.latency, trial_seed,
            History{}, [&log](const Observation& obs) {
              log << observation_to_json(obs).dump() << "\n";
              log.flush();
            });
        Rng policy_rng = make_stream(trial_seed, 0, kSaltPolicy);
        tr.policy = extract_policy(tr.history, cfg.tasks, cfg.actions, policy_rng);
      } catch (const std::exception& e) {
        tr.failed = true;
        tr.error = e.what();
      }

      if (!tr.failed) {
        const RegretReport rep = build_regret_report(
            tr.history, cfg.tasks, truth, cfg.strategy.fixed_hyperparams,
            cfg.epsilon);
        write_text(out_dir / (algorithm_name(algo) + "_trial" +
                              std::to_string(trial) + "_metrics.csv"),
                   regret_report_csv(rep));
        totals.push_back(rep.total_approx);
        if (rep.norm_regret.size() > 0) norms.push_back(rep.norm_regret);
        if (rep.bound.size() > 0) bounds.push_back(rep.bound);
      }
      result.trials.push_back(std::move(tr));
    }
    if (!totals.empty())
      write_text(out_dir / (algorithm_name(algo) + "_aggregate.csv"),
                 aggregate_csv(totals, norms, bounds));
  }

  // Combined comparison with per-seed optima pooled across algorithms, so
  // approximate regret is measured against the same optimum per task.
  if (cfg.algorithms.size() > 1) {
    std::ostringstream out;
    out.precision(17);
    out << "round";
    for (Algorithm a : cfg.algorithms)
      out << ",mean_total_approx_regret_" << algorithm_name(a)
          << ",se_total_approx_regret_" << algorithm_name(a);
    out << "\n";

    std::vector<std::vector<Eigen::VectorXd>> curves(cfg.algorithms.size());
    for (int trial = 0; trial < cfg.trials; ++trial) {
      Eigen::VectorXd optima = Eigen::VectorXd::Constant(
          cfg.tasks.size(), -std::numeric_limits<double>::infinity());
      std::vector<const TrialResult*> trs;
      for (const auto& tr : result.trials)
        if (tr.trial == trial && !tr.failed) trs.push_back(&tr);
      for (const TrialResult* tr : trs)
        for (const auto& o : tr->history.observations())
          optima[o.task] = std::max(optima[o.task], o.reward);
      for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
        for (const TrialResult* tr : trs) {
          if (tr->algorithm != cfg.algorithms[ai]) continue;
          const RegretReport rep =
              build_regret_report(tr->history, cfg.tasks, std::nullopt,
                                  std::nullopt, cfg.epsilon, optima);
          curves[ai].push_back(rep.total_approx);
        }
      }
    }
    bool any = true;
    for (const auto& c : curves) any = any && !c.empty();
    if (any) {
      std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> stats;
      for (const auto& c : curves) stats.push_back(mean_se(c));
      for (Eigen::Index t = 0; t < stats.front().first.size(); ++t) {
        out << (t + 1);
        for (const auto& [mean, se] : stats) out << "," << mean[t] << "," << se[t];
        out << "\n";
      }
      write_text(out_dir / "comparison.csv", out.str());
    }
  }
  return result;
}

std::pair<nlohmann::json, History> read_run_log(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run log: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("run log is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("run log header parse error: ") + e.what());
  }
  if (!header.contains("config"))
    throw ConfigError("run log header lacks a config record");
  History history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    history.append(observation_from_json(nlohmann::json::parse(line)));
  }
  return {header, history};
}

History resume(const std::filesystem::path& log_path,
               const ExperimentConfig& cfg) {
  cfg.validate();
  auto [header, history] = read_run_log(log_path);

  const int trial = header.value("trial", 0);
  const auto trial_seed = header.value("trial_seed", std::uint64_t{0});
  const std::string algo_name = header.value("algorithm", std::string("mts"));
  const Algorithm algo = algorithm_from_name(algo_name);

  const nlohmann::json expected =
      make_trial_header(cfg, algo, trial, trial_seed);
  if (!header.contains("config_hash") ||
      header["config_hash"].get<std::uint64_t>() !=
          expected["config_hash"].get<std::uint64_t>())
    throw ConfigError(
        "resume: run log header does not match the supplied config");

  const int T = cfg.strategy.capital;
  std::set<int> done;
  for (const auto& o : history.observations()) done.insert(o.round);
  std::vector<int> pending;
  for (int r = 1; r <= T; ++r)
    if (!done.count(r)) pending.push_back(r);
  if (pending.empty()) return history;  // already complete

  StrategyConfig scfg = cfg.strategy;
  scfg.algorithm = algo;
  scfg.seed = trial_seed;
  const SelectFn select = [&](const History& snapshot, int i) {
    return select_query(cfg.tasks, cfg.actions, scfg, snapshot, i);
  };
  const Objective objective = make_objective(cfg.benchmark, trial_seed);

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw std::runtime_error("cannot append to " + log_path.string());
  return run_async(select, objective, pending, cfg.workers, cfg.latency,
                   trial_seed, history, [&log](const Observation& obs) {
                     log << observation_to_json(obs).dump() << "\n";
                     log.flush();
                   });
}

// ---------------------------------------------------------------------------
// Bound check

BoundCheckConfig::BoundCheckConfig() {
  hp.lengthscales = Eigen::VectorXd::Constant(1, 0.2);
  hp.signal_variance = 1.0;
  hp.noise_variance = 0.01;
  hp.mean_constant = 0.0;
}

BoundCheckResult run_bound_check(const BoundCheckConfig& cfg) {
  std::vector<Action> grid;
  for (int i = 0; i < cfg.grid_size; ++i)
    grid.push_back(Eigen::VectorXd::Constant(
        1, cfg.grid_size == 1
               ? 0.0
               : static_cast<double>(i) / (cfg.grid_size - 1)));
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd hi = Eigen::VectorXd::Ones(1);
  const ActionSpace actions(lo, hi, grid);
  const TaskSpace tasks = TaskSpace::uniform(cfg.n_tasks);

  const int runs = cfg.truths * cfg.seeds_per_truth;
  BoundCheckResult result;
  result.run_regret.resize(runs, cfg.capital);
  result.histories.reserve(static_cast<std::size_t>(runs));

  int run = 0;
  for (int i = 0; i < cfg.truths; ++i) {
    const GroundTruthTable table = sample_prior_truth(
        cfg.n_tasks, grid, cfg.hp, mix_seed(cfg.seed, static_cast<std::uint64_t>(i), 77));
    for (int rep = 0; rep < cfg.seeds_per_truth; ++rep) {
      StrategyConfig scfg;
      scfg.algorithm = Algorithm::mts;
      scfg.capital = cfg.capital;
      scfg.init_capital = 0;
      scfg.candidates_per_round = cfg.grid_size;
      scfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(run), 91);
      scfg.fixed_hyperparams = cfg.hp;

      const Objective objective = [&](int task, const Action& a, int round) {
        Rng rng = make_stream(scfg.seed, static_cast<std::uint64_t>(round), kSaltNoise);
        return noisy_evaluate(table.value(task, a), cfg.sigma, rng);
      };
      auto [history, policy] = run_strategy(objective, tasks, actions, scfg);
      for (int t = 1; t <= cfg.capital; ++t)
        result.run_regret(run, t - 1) =
            normalized_simple_regret(history, table, tasks.weights, t);
      result.histories.push_back(std::move(history));
      ++run;
    }
  }
  result.mean_regret = result.run_regret.colwise().mean();

  // gamma estimate: max realized information gain over random designs
  result.gamma_hat = Eigen::VectorXd::Zero(cfg.capital);
  for (int d = 0; d < cfg.designs; ++d) {
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(d), kSaltDesign);
    std::vector<std::vector<Action>> per_task(static_cast<std::size_t>(cfg.n_tasks));
    for (int t = 1; t <= cfg.capital; ++t) {
      const int task = rng.uniform_int(cfg.n_tasks);
      const int a = rng.uniform_int(cfg.grid_size);
      per_task[static_cast<std::size_t>(task)].push_back(grid[static_cast<std::size_t>(a)]);
      double gain = 0.0;
      for (const auto& acts : per_task) gain += information_gain(acts, cfg.hp);
      result.gamma_hat[t - 1] = std::max(result.gamma_hat[t - 1], gain);
    }
  }

  result.bound.resize(cfg.capital);
  result.holds = true;
  for (int t = 1; t <= cfg.capital; ++t) {
    result.bound[t - 1] =
        theorem_bound(cfg.n_tasks, cfg.grid_size, result.gamma_hat[t - 1], t);
    if (result.mean_regret[t - 1] > result.bound[t - 1]) result.holds = false;
  }
  return result;
}

}  // namespace mtbo
