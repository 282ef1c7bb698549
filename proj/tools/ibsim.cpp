// ibsim: generate environments, run policies, sweep grids and draw reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ibandit/config.hpp"
#include "ibandit/csv.hpp"
#include "ibandit/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  int parallel = 1;
  bool svg = false;
  bool log_log = false;
};

ib::RawConfig load_raw(const Common& opts) {
  ib::RawConfig raw;
  if (!opts.config_path.empty()) raw = ib::load_config_file(opts.config_path);
  ib::apply_env_overrides(raw, [](const char* name) { return std::getenv(name); });
  if (opts.seed) raw["run.seed"] = std::to_string(*opts.seed);
  return raw;
}

void generate(const Common& opts) {
  const auto config = ib::resolve_config(load_raw(opts));
  const auto built = ib::build_environment(config);
  const fs::path out(opts.out);
  fs::create_directories(out);
  if (built.network) {
    ib::write_edge_list(built.network->graph, out / "edges.csv");
    ib::write_node_features(built.network->nodes, out / "nodes.csv");
    ib::write_manifest(config.env.network, *built.network, config.seed, out / "manifest.txt");
  } else {
    std::ofstream manifest(out / "manifest.txt");
    manifest << "seed=" << config.seed << "\nsource=unit_arms\narms=" << config.env.arms
             << "\nd=" << config.env.arm_dim << '\n';
  }
  ib::write_edge_truth(built.env->contexts(), out / "edge_truth.csv");
  std::ofstream holdout(out / "holdout.csv");
  holdout << "edge_id\n";
  for (auto id : built.env->holdout_ids()) holdout << id << '\n';
  std::cout << "wrote environment with " << built.env->contexts().size() << " edges to " << out.string() << '\n';
}

void execute(const Common& opts, bool sweep) {
  const auto raw = load_raw(opts);
  const auto configs = sweep ? ib::expand_sweep(raw) : std::vector<ib::RunConfig>{ib::resolve_config(raw)};
  const auto results = ib::run_experiments(configs, opts.parallel);
  const fs::path out(opts.out);
  ib::write_runs_csv(configs, results, out / "runs.csv");
  ib::write_series_csv(configs, results, out / "series.csv");
  if (sweep) ib::write_pareto_csv(configs, results, out / "pareto.csv");
  if (opts.svg) ib::write_report({out}, out, {opts.log_log});
  std::cout << results.size() << " runs over " << configs.size() << " configs written to " << out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influence-probability bandit simulator"};
  app.require_subcommand(1);

  Common opts;
  std::vector<std::string> report_inputs;

  auto add_common = [&](CLI::App* sub, bool runs) {
    sub->add_option("--config", opts.config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "base seed (overrides run.seed)");
    if (runs) {
      sub->add_option("--parallel", opts.parallel, "worker threads")->check(CLI::PositiveNumber);
      sub->add_flag("--svg", opts.svg, "also write pareto.svg and curves.svg");
      sub->add_flag("--loglog", opts.log_log, "log-log axes in SVG output");
    }
  };

  auto* gen = app.add_subcommand("generate", "write environment data and a manifest");
  add_common(gen, false);
  auto* run = app.add_subcommand("run", "one config, all replications");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "Cartesian grid over comma-separated values");
  add_common(sweep, true);
  auto* report = app.add_subcommand("report", "draw SVGs from runs.csv and series.csv");
  report->add_option("inputs", report_inputs, "result directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", opts.out, "output directory");
  report->add_flag("--loglog", opts.log_log, "log-log axes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      generate(opts);
    } else if (run->parsed()) {
      execute(opts, false);
    } else if (sweep->parsed()) {
      execute(opts, true);
    } else if (report->parsed()) {
      std::vector<fs::path> inputs(report_inputs.begin(), report_inputs.end());
      ib::write_report(inputs, opts.out, {opts.log_log});
      std::cout << "wrote pareto.svg and curves.svg to " << opts.out << '\n';
    }
  } catch (const ib::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
