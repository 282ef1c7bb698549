#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "doctest.h"
#include "ibandit/config.hpp"
#include "ibandit/csv.hpp"
#include "ibandit/experiment.hpp"
#include "ibandit/seeds.hpp"

using namespace ib;
namespace fs = std::filesystem;

namespace {

RawConfig small_network() {
  return parse_config_text(
      "env.n = 60\nenv.graph_param = 3\nenv.d_node = 3\nenv.holdout = 40\n"
      "env.pool_size = 50\nrun.T = 30\nrun.k = 3\nrun.replications = 2\n");
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ibandit_runner_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_outputs(const std::vector<RunConfig>& configs, int parallel, const fs::path& dir) {
  const auto results = run_experiments(configs, parallel);
  write_runs_csv(configs, results, dir / "runs.csv");
  write_series_csv(configs, results, dir / "series.csv");
  write_pareto_csv(configs, results, dir / "pareto.csv");
}

}  // namespace

TEST_CASE("config: comments, blanks and whitespace") {
  const auto raw = parse_config_text("# header\n\nrun.T = 12   # trailing\n  policy.beta=0.5\n");
  CHECK(raw.at("run.T") == "12");
  CHECK(raw.at("policy.beta") == "0.5");
  const auto cfg = resolve_config(raw);
  CHECK(cfg.T == 12);
  CHECK(cfg.policy.beta == 0.5);
  CHECK(cfg.k == 5);
}

TEST_CASE("config: unknown and duplicate keys") {
  CHECK_THROWS_WITH_AS(parse_config_text("run.bogus = 1\n"), doctest::Contains("run.bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("run.T = 1\nrun.T = 2\n"), doctest::Contains("run.T"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just text\n"), ConfigError);
}

TEST_CASE("config: validation messages name the offending key") {
  const auto bad = [](const std::string& key, const std::string& value) {
    RawConfig raw;
    raw[key] = value;
    CHECK_THROWS_WITH_AS(resolve_config(raw), doctest::Contains(key.c_str()), ConfigError);
  };
  bad("policy.beta", "1.5");
  bad("policy.C", "-1");
  bad("policy.C", "abc");
  bad("run.replications", "0");
  bad("run.k", "0");
  bad("policy.name", "nope");
  bad("env.pool", "sideways");
  RawConfig raw;
  raw["run.k"] = "600";
  CHECK_THROWS_AS(resolve_config(raw), ConfigError);
}

TEST_CASE("config: adaptive threshold syntax") {
  RawConfig raw;
  raw["policy.C"] = "adaptive";
  raw["policy.objective"] = "rmse";
  const auto cfg = resolve_config(raw);
  CHECK_FALSE(cfg.policy.c.has_value());
  CHECK(cfg.policy.update_c.objective == Objective::Rmse);
  CHECK(cfg.c_or_objective() == "rmse");
}

TEST_CASE("config: environment overrides") {
  CHECK(env_var_name("policy.beta") == "IB_POLICY_BETA");
  CHECK(env_var_name("env.pool_size") == "IB_ENV_POOL_SIZE");
  std::map<std::string, std::string> vars{{"IB_RUN_T", "77"}, {"IB_POLICY_BETA", "0.5"}};
  RawConfig raw;
  raw["run.T"] = "10";
  apply_env_overrides(raw, [&](const char* name) -> const char* {
    const auto it = vars.find(name);
    return it == vars.end() ? nullptr : it->second.c_str();
  });
  const auto cfg = resolve_config(raw);
  CHECK(cfg.T == 77);
  CHECK(cfg.policy.beta == 0.5);
}

TEST_CASE("config: hash depends on the resolved settings only") {
  RawConfig a, b;
  a["run.T"] = "10";
  b["run.T"] = "10.0";
  CHECK_THROWS_AS(resolve_config(b), ConfigError);
  b["run.T"] = "10";
  b["policy.beta"] = "0.25";
  CHECK(resolve_config(a).hash() == resolve_config(b).hash());
  a["run.seed"] = "1";
  CHECK(resolve_config(a).hash() != resolve_config(b).hash());
  CHECK(resolve_config(a).hash().size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("sweep: beta x C grid expands in sorted key order") {
  auto raw = small_network();
  raw["policy.beta"] = "0.25,0.5";
  raw["policy.C"] = "1,3,5,7,9";
  const auto configs = expand_sweep(raw);
  REQUIRE(configs.size() == 10);
  // policy.C sorts before policy.beta, so beta varies fastest.
  CHECK(configs[0].policy.c == 1.0);
  CHECK(configs[0].policy.beta == 0.25);
  CHECK(configs[1].policy.beta == 0.5);
  CHECK(configs[2].policy.c == 3.0);
  std::set<std::string> hashes;
  for (const auto& c : configs) hashes.insert(c.hash());
  CHECK(hashes.size() == 10);
}

TEST_CASE("sweep: ten configs with ten replications write 100 runs") {
  auto raw = small_network();
  raw["policy.beta"] = "0.25,0.5";
  raw["policy.C"] = "1,3,5,7,9";
  raw["run.replications"] = "10";
  raw["run.T"] = "15";
  const auto configs = expand_sweep(raw);
  const auto dir = fresh_dir("sweep100");
  write_outputs(configs, 2, dir);
  const auto runs = csv::read(dir / "runs.csv");
  CHECK(runs.header == kRunsHeader);
  CHECK(runs.rows.size() == 100);
  const auto pareto = csv::read(dir / "pareto.csv");
  CHECK(pareto.header == kParetoHeader);
  CHECK(pareto.rows.size() == 10);
  const auto series = csv::read(dir / "series.csv");
  CHECK(series.rows.size() == 100 * 15);
}

TEST_CASE("run: zero horizon yields zero-regret rows") {
  auto raw = small_network();
  raw["run.T"] = "0";
  const auto configs = expand_sweep(raw);
  const auto dir = fresh_dir("t0");
  write_outputs(configs, 1, dir);
  const auto runs = csv::read(dir / "runs.csv");
  REQUIRE(runs.rows.size() == 2);
  const auto col = runs.column("final_regret");
  for (const auto& row : runs.rows) CHECK(csv::parse_double(row[col], "final_regret") == 0.0);
}

TEST_CASE("run: every policy name runs on a small network") {
  for (const char* name : {"influence_cb", "linucb", "lints", "uniform", "sgd_explore", "sgd_exploit", "random",
                           "similarity", "ridge_linkpred"}) {
    auto raw = small_network();
    raw["policy.name"] = name;
    const auto results = run_experiments({resolve_config(raw)}, 1);
    REQUIRE(results.size() == 2);
    CHECK(results[0].log.policy == name);
    CHECK(results[0].log.rounds.size() == 30);
  }
}

TEST_CASE("run: design policy needs fixed pools") {
  auto raw = small_network();
  raw["policy.name"] = "design";
  CHECK_THROWS_AS(run_experiments({resolve_config(raw)}, 1), ConfigError);
  RawConfig arms;
  arms["env.source"] = "unit_arms";
  arms["env.arms"] = "12";
  arms["env.d"] = "4";
  arms["env.pool"] = "fixed";
  arms["env.holdout"] = "0";
  arms["policy.name"] = "design";
  arms["run.k"] = "2";
  arms["run.T"] = "40";
  arms["run.replications"] = "1";
  const auto results = run_experiments({resolve_config(arms)}, 1);
  CHECK(results[0].log.rounds.size() == 40);
}

TEST_CASE("determinism: identical outputs across runs and thread counts") {
  auto raw = small_network();
  raw["policy.C"] = "1,9";
  raw["run.replications"] = "3";
  const auto configs = expand_sweep(raw);
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  const auto c = fresh_dir("det_c");
  write_outputs(configs, 1, a);
  write_outputs(configs, 1, b);
  write_outputs(configs, 4, c);
  for (const char* f : {"runs.csv", "series.csv", "pareto.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(c / f));
  }
}

TEST_CASE("seeds: same tuple same seed; no collisions over a million tuples") {
  CHECK(seed_schedule(5, 2, Stream::Pool) == seed_schedule(5, 2, Stream::Pool));
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1'100'000);
  std::size_t tuples = 0;
  for (std::uint64_t base = 0; base < 1000; ++base) {
    for (std::uint64_t rep = 0; rep < 250; ++rep) {
      for (auto s : {Stream::Pool, Stream::Reward, Stream::Policy, Stream::Env}) {
        seen.insert(seed_schedule(base, rep, s));
        ++tuples;
      }
    }
  }
  CHECK(tuples == 1'000'000);
  CHECK(seen.size() == tuples);
}

TEST_CASE("seeds: changing the policy leaves pools and rewards untouched") {
  auto raw = small_network();
  raw["run.replications"] = "1";
  raw["policy.name"] = "linucb";
  const auto ucb = run_experiments({resolve_config(raw)}, 1);
  raw["policy.name"] = "uniform";
  const auto uni = run_experiments({resolve_config(raw)}, 1);
  CHECK(ucb[0].log.seeds.pool == uni[0].log.seeds.pool);
  CHECK(ucb[0].log.seeds.reward == uni[0].log.seeds.reward);
  const auto built = build_environment(resolve_config(raw));
  Rng p1(ucb[0].log.seeds.pool), p2(uni[0].log.seeds.pool);
  for (int t = 1; t <= 10; ++t) CHECK(built.env->next_pool(t, p1).ids == built.env->next_pool(t, p2).ids);
  for (std::size_t t = 0; t < ucb[0].log.rounds.size(); ++t) {
    CHECK(ucb[0].log.rounds[t].oracle_value == uni[0].log.rounds[t].oracle_value);
  }
}

TEST_CASE("report: writes both charts and refuses mixed schemas") {
  auto raw = small_network();
  raw["policy.C"] = "1,9";
  const auto configs = expand_sweep(raw);
  const auto dir = fresh_dir("report_ok");
  write_outputs(configs, 1, dir);
  const auto out = fresh_dir("report_out");
  write_report({dir}, out, {true});
  CHECK(fs::file_size(out / "pareto.svg") > 0);
  CHECK(slurp(out / "curves.svg").find("<svg") != std::string::npos);

  const auto bad = fresh_dir("report_bad");
  fs::copy_file(dir / "series.csv", bad / "series.csv");
  std::ofstream(bad / "runs.csv") << "config_hash,policy,rep\nabc,linucb,0\n";
  CHECK_THROWS(write_report({dir, bad}, out));

  // Same directory twice duplicates every (hash, rep) pair.
  CHECK_THROWS(write_report({dir, dir}, out));
}
