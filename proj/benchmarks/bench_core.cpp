#include <benchmark/benchmark.h>

#include <numeric>

#include "ibandit/design.hpp"
#include "ibandit/envgen.hpp"
#include "ibandit/linmodel.hpp"
#include "ibandit/policies.hpp"

namespace {

ib::Matrix random_rows(int n, int d, std::uint64_t seed) {
  ib::Rng rng(seed);
  std::normal_distribution<double> g;
  ib::Matrix m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  }
  return m;
}

ib::ActionPool make_pool(const ib::Matrix& rows) {
  ib::ActionPool pool;
  pool.features = rows;
  pool.ids.resize(static_cast<std::size_t>(rows.rows()));
  std::iota(pool.ids.begin(), pool.ids.end(), ib::EdgeId{0});
  return pool;
}

}  // namespace

// Sherman-Morrison update including the periodic refresh.
static void BM_LinearModelObserve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const ib::Matrix xs = random_rows(1024, d, 1);
  ib::LinearModel model(d, 1.0);
  long i = 0;
  for (auto _ : state) {
    model.observe(xs.row(i % 1024).transpose(), static_cast<int>(i & 1), i % 64);
    ++i;
  }
  benchmark::DoNotOptimize(model.theta().data());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LinearModelObserve)->Arg(8)->Arg(18)->Arg(64);

static void BM_PoolUncertainties(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ib::Matrix rows = random_rows(n, 18, 2);
  ib::LinearModel model(18, 1.0);
  for (int i = 0; i < 200; ++i) model.observe(rows.row(i % n).transpose(), i % 2, i);
  for (auto _ : state) benchmark::DoNotOptimize(model.uncertainties(rows));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PoolUncertainties)->Arg(100)->Arg(500)->Arg(2000);

// One select + update round of InfluenceCB on a 500-edge pool, k = 5.
static void BM_InfluenceCbRound(benchmark::State& state) {
  const auto pool = make_pool(random_rows(500, 18, 3));
  ib::InfluenceCbParams params;
  params.fixed_c = static_cast<double>(state.range(0));
  ib::InfluenceCb policy(18, 5, params);
  const std::vector<int> rewards{1, 0, 0, 1, 0};
  for (auto _ : state) {
    const auto sel = policy.select(pool);
    policy.update(pool, sel, rewards);
  }
  state.counters["explore_rounds"] = policy.explore_rounds();
}
BENCHMARK(BM_InfluenceCbRound)->Arg(1)->Arg(9);

static void BM_DesignSolve(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto arms = ib::generate_unit_arms(m, 6, 4);
  ib::Matrix rows(m, 6);
  for (int i = 0; i < m; ++i) rows.row(i) = arms.contexts[static_cast<std::size_t>(i)].x.transpose();
  double f = 0.0;
  for (auto _ : state) f = ib::solve_gk_design(rows, 3).f_value;
  state.counters["f_value"] = f;
}
BENCHMARK(BM_DesignSolve)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
