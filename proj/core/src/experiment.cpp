#include "ibandit/experiment.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "ibandit/baselines.hpp"
#include "ibandit/csv.hpp"
#include "ibandit/design.hpp"
#include "ibandit/policies.hpp"
#include "ibandit/seeds.hpp"

namespace ib {

BuiltEnvironment build_environment(const RunConfig& config) {
  const std::uint64_t env_seed = seed_schedule(config.seed, 0, Stream::Env);
  BuiltEnvironment built;
  std::vector<EdgeContext> contexts;
  GroundTruth truth;

  if (config.env.source == EnvSource::UnitArms) {
    auto labeled = generate_unit_arms(config.env.arms, config.env.arm_dim, derive_seed(env_seed, 1));
    contexts = std::move(labeled.contexts);
    truth = std::move(labeled.truth);
  } else {
    NetworkData data = build_network(config.env.network, derive_seed(env_seed, 1));
    contexts = data.contexts;
    truth = data.truth;
    built.network = std::move(data);
  }

  const auto holdout = static_cast<std::size_t>(config.env.holdout);
  if (holdout > 0 && holdout >= contexts.size()) {
    throw ConfigError("env.holdout: " + std::to_string(holdout) + " leaves no training edges out of " +
                      std::to_string(contexts.size()));
  }
  HoldoutSplit split = split_holdout(contexts.size(), holdout, derive_seed(env_seed, 2));
  EnvironmentConfig env_config{config.env.pool, config.env.pool_size, config.k};
  built.env = std::make_shared<const Environment>(std::move(contexts), std::move(truth), std::move(split), env_config);
  return built;
}

std::unique_ptr<Policy> make_policy(const RunConfig& config, const BuiltEnvironment& built, int replication) {
  const auto& p = config.policy;
  const auto& env = *built.env;
  const int dim = env.dim();
  const int k = config.k;
  const std::uint64_t seed = seed_schedule(config.seed, static_cast<std::uint64_t>(replication), Stream::Policy);

  if (p.name == "influence_cb") {
    InfluenceCbParams params;
    params.beta = p.beta;
    params.fixed_c = p.c;
    params.update_c = p.update_c;
    params.alpha = p.alpha;
    params.lambda = p.lambda;
    params.inner = p.inner;
    params.ts_sigma = p.sigma;
    return std::make_unique<InfluenceCb>(dim, k, params, seed);
  }
  if (p.name == "linucb") return std::make_unique<CombLinUcb>(dim, k, p.alpha, p.lambda);
  if (p.name == "lints") return std::make_unique<LinTs>(dim, k, p.sigma, p.lambda, seed);
  if (p.name == "uniform") return std::make_unique<UniformRandomPolicy>(dim, k, p.lambda, seed);
  if (p.name == "design") return make_design_policy(env, config.T, p.lambda);
  if (p.name == "sgd_explore") return std::make_unique<SgdLogistic>(dim, k, SgdMode::Explore, p.lr, seed);
  if (p.name == "sgd_exploit") return std::make_unique<SgdLogistic>(dim, k, SgdMode::Exploit, p.lr, seed);
  if (p.name == "random") return make_random_policy(env.contexts().size(), k, seed);
  if (!built.network) throw ConfigError("policy.name: " + p.name + " needs a graph");
  if (p.name == "similarity") return make_similarity_policy(env.contexts(), built.network->nodes, k);
  if (p.name == "ridge_linkpred") {
    return make_ridge_linkpred_policy(built.network->graph, built.network->nodes, env.contexts(),
                                      config.env.network.structural, k, p.lambda_lp, seed);
  }
  throw ConfigError("policy.name: unknown policy '" + p.name + "'");
}

std::vector<EpisodeResult> run_experiments(const std::vector<RunConfig>& configs, int parallel) {
  if (parallel < 1) throw ConfigError("--parallel must be >= 1");

  std::map<std::string, std::shared_ptr<BuiltEnvironment>> cache;
  std::vector<std::shared_ptr<BuiltEnvironment>> envs;
  std::vector<EpisodeResult> results;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    auto& slot = cache[configs[ci].environment_key()];
    if (!slot) slot = std::make_shared<BuiltEnvironment>(build_environment(configs[ci]));
    envs.push_back(slot);
    for (int rep = 0; rep < configs[ci].replications; ++rep) {
      EpisodeResult r;
      r.config_index = ci;
      r.replication = rep;
      results.push_back(std::move(r));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_job = results.size();
  std::exception_ptr error;

  auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= results.size()) return;
      auto& r = results[job];
      const auto& config = configs[r.config_index];
      try {
        const auto start = std::chrono::steady_clock::now();
        auto policy = make_policy(config, *envs[r.config_index], r.replication);
        const auto rep = static_cast<std::uint64_t>(r.replication);
        EpisodeSeeds seeds{seed_schedule(config.seed, rep, Stream::Pool),
                           seed_schedule(config.seed, rep, Stream::Reward)};
        EpisodeOptions options;
        options.snapshot_every = config.snapshot_every;
        r.log = run_episode(*envs[r.config_index]->env, *policy, config.T, seeds, options);
        if (config.timing) {
          r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (job < error_job) {
          error_job = job;
          error = std::current_exception();
        }
      }
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(parallel), results.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

std::string config_columns(const RunConfig& c, const std::string& hyperparameters) {
  return c.hash() + ',' + c.policy.name + ',' + hyperparameters + ',' + csv::format_double(c.policy.beta) + ',' +
         c.c_or_objective() + ',' + std::to_string(c.k) + ',' + std::to_string(c.T);
}

}  // namespace

void write_runs_csv(const std::vector<RunConfig>& configs, const std::vector<EpisodeResult>& results,
                    const std::filesystem::path& path) {
  auto out = open_output(path);
  write_header(out, kRunsHeader);
  for (const auto& r : results) {
    const auto& c = configs.at(r.config_index);
    out << config_columns(c, r.log.hyperparameters) << ',' << r.replication << ',' << c.seed << ','
        << csv::format_double(r.log.cumulative_regret()) << ',' << csv::format_double(r.log.final_rmse) << ','
        << r.log.explore_rounds() << ',' << csv::format_double(r.wall_ms) << '\n';
  }
}

void write_series_csv(const std::vector<RunConfig>& configs, const std::vector<EpisodeResult>& results,
                      const std::filesystem::path& path) {
  auto out = open_output(path);
  write_header(out, kSeriesHeader);
  for (const auto& r : results) {
    const std::string hash = configs.at(r.config_index).hash();
    std::map<int, double> rmse;
    for (const auto& s : r.log.snapshots) rmse[s.round] = s.rmse;
    const auto cum = cumulative_regret(r.log.rounds);
    for (std::size_t i = 0; i < r.log.rounds.size(); ++i) {
      const auto& o = r.log.rounds[i];
      const auto it = rmse.find(o.round);
      out << hash << ',' << r.replication << ',' << o.round << ',' << csv::format_double(cum[i]) << ','
          << (it == rmse.end() ? std::string() : csv::format_double(it->second)) << ',' << to_string(o.phase) << ','
          << csv::format_double(o.u) << ',' << csv::format_double(o.c) << '\n';
    }
  }
}

void write_pareto_csv(const std::vector<RunConfig>& configs, const std::vector<EpisodeResult>& results,
                      const std::filesystem::path& path) {
  std::vector<RunSummary> runs;
  std::map<std::string, std::pair<std::size_t, std::string>> first;  // hash -> config index, hyperparameters
  for (const auto& r : results) {
    const std::string hash = configs.at(r.config_index).hash();
    first.try_emplace(hash, r.config_index, r.log.hyperparameters);
    runs.push_back({hash, r.log.cumulative_regret(), r.log.final_rmse});
  }
  auto out = open_output(path);
  write_header(out, kParetoHeader);
  for (const auto& row : pareto_summary(runs)) {
    const auto& [ci, hyper] = first.at(row.config);
    out << config_columns(configs[ci], hyper) << ',' << row.replications << ','
        << csv::format_double(row.regret_mean) << ',' << csv::format_double(row.regret_std) << ','
        << csv::format_double(row.rmse_mean) << ',' << csv::format_double(row.rmse_std) << ','
        << (row.dominated ? "true" : "false") << '\n';
  }
}

}  // namespace ib
