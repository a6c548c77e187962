#include "mtbo/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mtbo/runner.hpp"

namespace mtbo {

namespace {

int cmd_run(const std::string& config_path, const std::string& resume_log) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (!resume_log.empty()) {
      const History history = resume(resume_log, cfg);
      std::cout << "resumed " << resume_log << ": " << history.size() << "/"
                << cfg.strategy.capital << " observations\n";
      return 0;
    }
    const ExperimentResult result = run_experiment(cfg);
    int failed = 0;
    for (const auto& tr : result.trials)
      if (tr.failed) ++failed;
    std::cout << "wrote " << result.trials.size() << " trial logs to "
              << result.output_dir << "\n";
    if (failed > 0) {
      std::cerr << failed << " trial(s) failed\n";
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_metrics(const std::string& log_path, const std::string& truth_path,
                const std::string& format) {
  try {
    auto [header, history] = read_run_log(log_path);
    std::optional<GroundTruthTable> truth;
    if (!truth_path.empty()) {
      std::ifstream in(truth_path);
      if (!in) {
        std::cerr << "config error: cannot open truth table " << truth_path << "\n";
        return 1;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      truth = truth_table_from_json(buf.str());
    }
    int n_tasks = 0;
    for (const auto& o : history.observations())
      n_tasks = std::max(n_tasks, o.task + 1);
    if (truth) n_tasks = std::max(n_tasks, truth->n_tasks());
    if (header.contains("config") && header["config"].contains("tasks"))
      n_tasks = static_cast<int>(header["config"]["tasks"]["ids"].size());
    const TaskSpace tasks = TaskSpace::uniform(n_tasks);
    const RegretReport rep = build_regret_report(history, tasks, truth);
    std::cout << (format == "json" ? regret_report_json(rep)
                                   : regret_report_csv(rep));
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_bound_check(const std::string& config_path) {
  BoundCheckConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "config error: cannot open " << config_path << "\n";
      return 1;
    }
    nlohmann::json j;
    try {
      in >> j;
      const nlohmann::json b = j.value("bound_check", nlohmann::json::object());
      cfg.n_tasks = b.value("n_tasks", cfg.n_tasks);
      cfg.grid_size = b.value("grid_size", cfg.grid_size);
      cfg.capital = b.value("capital", cfg.capital);
      cfg.truths = b.value("truths", cfg.truths);
      cfg.seeds_per_truth = b.value("seeds_per_truth", cfg.seeds_per_truth);
      cfg.designs = b.value("designs", cfg.designs);
      cfg.sigma = b.value("sigma", cfg.sigma);
      cfg.seed = b.value("seed", cfg.seed);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    }
  }
  try {
    const BoundCheckResult result = run_bound_check(cfg);
    std::cout << "round,mean_norm_regret,gamma_hat,bound\n";
    std::cout.precision(10);
    for (int t = 1; t <= cfg.capital; ++t)
      std::cout << t << "," << result.mean_regret[t - 1] << ","
                << result.gamma_hat[t - 1] << "," << result.bound[t - 1] << "\n";
    std::cout << (result.holds ? "PASS" : "FAIL")
              << ": mean normalized simple regret vs. theorem bound\n";
    return result.holds ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_bench(std::uint64_t seed, int trials, int capital, int init_capital,
              int workers, int candidates, const std::string& out_dir) {
  nlohmann::json j;
  j["seed"] = seed;
  j["trials"] = trials;
  j["workers"] = workers;
  j["output_dir"] = out_dir;
  j["strategy"] = {{"algorithm", {"mts", "uniform_ts", "random"}},
                   {"capital", capital},
                   {"init_capital", init_capital},
                   {"candidates_per_round", candidates}};
  j["benchmark"] = {{"type", "tokamak"}, {"noise_sigma", 0.1}};
  try {
    const ExperimentConfig cfg = parse_experiment_config(j);
    const ExperimentResult result = run_experiment(cfg);
    std::cout << "bench results in " << result.output_dir << "\n";
    for (const auto& tr : result.trials)
      if (tr.failed) {
        std::cerr << "trial failed: " << tr.error << "\n";
        return 2;
      }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_export(const std::string& log_path, const std::string& format) {
  try {
    auto [header, history] = read_run_log(log_path);
    if (format == "json") {
      nlohmann::json j;
      j["header"] = header;
      nlohmann::json obs = nlohmann::json::array();
      for (const auto& o : history.observations())
        obs.push_back(observation_to_json(o));
      j["observations"] = obs;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "round,task,reward,worker_id,dispatched_at,completed_at,action\n";
      std::cout.precision(17);
      for (const auto& o : history.observations()) {
        std::cout << o.round << "," << o.task << "," << o.reward << ",";
        if (o.worker_id) std::cout << *o.worker_id;
        std::cout << ",";
        if (o.dispatched_at) std::cout << *o.dispatched_at;
        std::cout << ",";
        if (o.completed_at) std::cout << *o.completed_at;
        for (Eigen::Index d = 0; d < o.action.size(); ++d)
          std::cout << "," << o.action[d];
        std::cout << "\n";
      }
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Offline multi-task Bayesian optimization engine"};
  app.require_subcommand(1);

  std::string config_path, resume_log;
  auto* run = app.add_subcommand("run", "Execute an experiment from a config file");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--resume", resume_log, "Continue an interrupted run log");

  std::string metrics_log, metrics_truth, metrics_format = "csv";
  auto* metrics = app.add_subcommand("metrics", "Recompute regret metrics from a run log");
  metrics->add_option("runlog", metrics_log, "JSONL run log")->required();
  metrics->add_option("--truth", metrics_truth, "Ground-truth table (JSON)");
  metrics->add_option("--format", metrics_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string bound_config;
  auto* bound = app.add_subcommand("bound-check", "Prior-sampled regret-bound verification");
  bound->add_option("config", bound_config, "JSON config with optional bound_check section");

  std::uint64_t bench_seed = 0;
  int bench_trials = 10, bench_capital = 125, bench_init = 40, bench_workers = 1,
      bench_candidates = 500;
  std::string bench_out = "mtbo_bench";
  auto* bench = app.add_subcommand("bench", "Built-in surrogate suite: mts vs uniform_ts vs random");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--trials", bench_trials, "trials per algorithm");
  bench->add_option("--capital", bench_capital, "query capital T");
  bench->add_option("--t-init", bench_init, "initial round-robin capital");
  bench->add_option("--workers", bench_workers, "asynchronous workers");
  bench->add_option("--candidates", bench_candidates, "candidates per round");
  bench->add_option("--out", bench_out, "output directory");

  std::string export_log, export_format = "csv";
  auto* exp = app.add_subcommand("export", "Export a run log as CSV or JSON");
  exp->add_option("runlog", export_log, "JSONL run log")->required();
  exp->add_option("--format", export_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  std::vector<const char*> argv;
  argv.push_back("mtbo");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }

  if (run->parsed()) return cmd_run(config_path, resume_log);
  if (metrics->parsed()) return cmd_metrics(metrics_log, metrics_truth, metrics_format);
  if (bound->parsed()) return cmd_bound_check(bound_config);
  if (bench->parsed())
    return cmd_bench(bench_seed, bench_trials, bench_capital, bench_init,
                     bench_workers, bench_candidates, bench_out);
  if (exp->parsed()) return cmd_export(export_log, export_format);
  return 1;
}

}  // namespace mtbo
