#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "ibandit/policies.hpp"

using namespace ib;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

ActionPool pool_from(const Matrix& rows, int round = 1) {
  ActionPool pool;
  pool.round = round;
  pool.mode = PoolMode::Fixed;
  pool.features = rows;
  pool.ids.resize(static_cast<std::size_t>(rows.rows()));
  std::iota(pool.ids.begin(), pool.ids.end(), EdgeId{0});
  return pool;
}

Matrix random_rows(int n, int d, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  }
  return m;
}

/// Sorts scores descending, ties toward the smaller index.
std::vector<EdgeId> sort_topk(const std::vector<double>& scores, int k) {
  std::vector<EdgeId> idx(scores.size());
  std::iota(idx.begin(), idx.end(), EdgeId{0});
  std::stable_sort(idx.begin(), idx.end(), [&](EdgeId a, EdgeId b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

std::vector<EdgeId> sorted(std::vector<EdgeId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

InfluenceCbParams fixed_c_params(double beta, double c) {
  InfluenceCbParams p;
  p.beta = beta;
  p.fixed_c = c;
  return p;
}

}  // namespace

// --- UpdateC ----------------------------------------------------------------

TEST_CASE("update_c: warmup history yields the midpoint") {
  UpdateCParams params;
  params.warmup = 10;
  for (auto obj : {Objective::Regret, Objective::Rmse}) {
    params.objective = obj;
    UpdateC u(params);
    CHECK(u.update(0.3, 0.7) == doctest::Approx(5.0));
  }
  params.objective = Objective::Rmse;
  UpdateC u(params);
  for (int i = 0; i < 10; ++i) CHECK(u.update(0.0, 0.1 * i) == doctest::Approx(5.0));
}

TEST_CASE("update_c: regret objective never decreases") {
  UpdateCParams params;
  params.warmup = 0;
  UpdateC u(params);
  Rng rng(6);
  std::uniform_real_distribution<double> r(0.0, 1.0);
  double prev = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double c = u.update(r(rng), r(rng));
    CHECK(c >= prev);
    CHECK(c >= 1.0);
    CHECK(c <= 9.0);
    prev = c;
  }
}

TEST_CASE("update_c: rmse objective worked example") {
  UpdateCParams params;
  params.objective = Objective::Rmse;
  params.warmup = 0;
  UpdateC u(params);
  CHECK(u.update(0.0, 0.2) == doctest::Approx(5.0));
  const double z = (0.3 - 0.4) / (0.1 + 1e-8);
  CHECK(u.update(0.0, 0.4) == doctest::Approx(1.0 + 8.0 * sigmoid(z)).epsilon(1e-12));
  CHECK(u.history() == std::vector<double>{0.2, 0.4});
}

TEST_CASE("update_c: invalid parameters and inputs") {
  UpdateCParams bad;
  bad.c_min = 5.0;
  bad.c_max = 2.0;
  CHECK_THROWS_AS(UpdateC{bad}, ConfigError);
  UpdateC u(UpdateCParams{});
  CHECK_THROWS_AS(u.update(std::nan(""), 0.1), DataError);
}

// --- CombLinUCB ---------------------------------------------------------------

TEST_CASE("linucb: alpha = 0 is greedy on the estimate") {
  LinearModel m(3, 1.0);
  Rng rng(1);
  const Matrix rows = random_rows(10, 3, rng);
  for (int i = 0; i < 10; ++i) m.observe(rows.row(i).transpose(), i % 3 == 0 ? 1 : 0, i);
  const auto pool = pool_from(rows);
  std::vector<double> means(10);
  for (int i = 0; i < 10; ++i) means[static_cast<std::size_t>(i)] = rows.row(i).dot(m.theta());
  CHECK(comb_lin_ucb_select(m, pool, 0.0, 3) == sort_topk(means, 3));
}

TEST_CASE("linucb: a fresh model ranks by uncertainty alone") {
  LinearModel m(4, 1.0);
  Rng rng(2);
  const Matrix rows = random_rows(9, 4, rng);
  std::vector<double> norms(9);
  for (int i = 0; i < 9; ++i) norms[static_cast<std::size_t>(i)] = rows.row(i).norm();
  CHECK(comb_lin_ucb_select(m, pool_from(rows), 2.0, 4) == sort_topk(norms, 4));
}

TEST_CASE("linucb: matches an index sort with an explicit inverse") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    LinearModel m(5, 1.0);
    const Matrix hist = random_rows(30, 5, rng);
    for (int i = 0; i < 30; ++i) m.observe(hist.row(i).transpose(), (i * 7 + trial) % 3 == 0, i);
    const Matrix rows = random_rows(12, 5, rng);

    oracles::Dense inv;
    REQUIRE(oracles::gauss_jordan_inverse(ibtest::to_dense(m.V()), inv));
    std::vector<double> theta(5, 0.0);
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) theta[r] += inv[r][c] * m.b()(c);
    }
    std::vector<double> index(12);
    for (int i = 0; i < 12; ++i) {
      double mean = 0.0, quad = 0.0;
      for (int r = 0; r < 5; ++r) {
        mean += rows(i, r) * theta[r];
        for (int c = 0; c < 5; ++c) quad += rows(i, r) * inv[r][c] * rows(i, c);
      }
      index[static_cast<std::size_t>(i)] = mean + 2.0 * std::sqrt(quad);
    }
    CHECK(comb_lin_ucb_select(m, pool_from(rows), 2.0, 4) == sort_topk(index, 4));
  }
}

// --- LinTS ------------------------------------------------------------------

TEST_CASE("lints: zero scale is greedy on the estimate") {
  LinearModel m(3, 1.0);
  Rng rng(3);
  const Matrix rows = random_rows(8, 3, rng);
  for (int i = 0; i < 8; ++i) m.observe(rows.row(i).transpose(), i % 2, i);
  std::vector<double> means(8);
  for (int i = 0; i < 8; ++i) means[static_cast<std::size_t>(i)] = rows.row(i).dot(m.theta());
  Rng draw(5);
  CHECK(lin_ts_select(m, pool_from(rows), 0.0, 2, draw) == sort_topk(means, 2));
}

TEST_CASE("lints: symmetric arms are chosen uniformly") {
  LinearModel m(4, 1.0);
  const auto pool = pool_from(Matrix::Identity(4, 4));
  Rng rng(77);
  std::array<int, 4> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(lin_ts_select(m, pool, 1.0, 1, rng)[0])];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 4.0) * (c - draws / 4.0) / (draws / 4.0);
  // 3 degrees of freedom, 0.1% critical value.
  CHECK(chi2 < 16.27);
}

TEST_CASE("lints: the same seed reproduces the selection trace") {
  Rng setup(8);
  const auto pool = pool_from(random_rows(15, 4, setup));
  LinTs a(4, 3, 1.0, 1.0, 99), b(4, 3, 1.0, 1.0, 99);
  for (int t = 0; t < 20; ++t) {
    const auto sa = a.select(pool);
    CHECK(sa == b.select(pool));
    const std::vector<int> r{1, 0, 1};
    a.update(pool, sa, r);
    b.update(pool, sa, r);
  }
}

// --- InfluenceCB --------------------------------------------------------------

TEST_CASE("influence_cb: fresh model explores the smallest ids") {
  InfluenceCb p(3, 2, fixed_c_params(0.25, 0.5));
  const auto pool = pool_from(Matrix::Identity(3, 3).replicate(2, 1));
  CHECK(p.select(pool) == std::vector<EdgeId>{0, 1});
  CHECK(p.diagnostics().phase == Phase::Explore);
  CHECK(p.diagnostics().u == doctest::Approx(1.0));
  CHECK(p.exploration_count(0) == 1);
}

TEST_CASE("influence_cb: an unreachable threshold reproduces the inner policy") {
  const auto labeled = generate_unit_arms(20, 5, 4);
  const auto env = ibtest::fixed_environment(labeled, 3);
  for (auto inner : {InnerPolicy::CombLinUcb, InnerPolicy::LinTs}) {
    auto params = fixed_c_params(0.25, 1e6);
    params.inner = inner;
    InfluenceCb icb(5, 3, params, 21);
    std::unique_ptr<Policy> alone;
    if (inner == InnerPolicy::CombLinUcb) {
      alone = std::make_unique<CombLinUcb>(5, 3, 2.0, 1.0);
    } else {
      alone = std::make_unique<LinTs>(5, 3, 1.0, 1.0, 21);
    }
    const auto a = run_episode(env, icb, 200, {3, 4});
    const auto b = run_episode(env, *alone, 200, {3, 4});
    CHECK(a.explore_rounds() == 0);
    REQUIRE(a.rounds.size() == b.rounds.size());
    bool same = true;
    for (std::size_t t = 0; t < a.rounds.size(); ++t) same = same && a.rounds[t].selected == b.rounds[t].selected;
    CHECK(same);
    CHECK(a.final_theta->isApprox(*b.final_theta));
  }
}

TEST_CASE("influence_cb: exploration counts respect 2 T^(2 beta) / C^2 + 1") {
  const Matrix rows = Matrix::Identity(4, 4);
  const Vector theta = (Vector(4) << 0.2, 0.4, 0.6, 0.8).finished();
  const auto env = ibtest::fixed_environment(ibtest::linear_contexts(rows, theta), 2);
  const int T = 400;
  InfluenceCb p(4, 2, fixed_c_params(0.5, 3.0));
  run_episode(env, p, T, {1, 2});
  const double bound = 2.0 * std::pow(T, 1.0) / 9.0 + 1.0;
  for (EdgeId id = 0; id < 4; ++id) CHECK(p.exploration_count(id) <= bound);
}

TEST_CASE("influence_cb: activation rate is the previous round's hit fraction") {
  InfluenceCb p(2, 2, fixed_c_params(0.25, 3.0));
  const auto pool = pool_from(Matrix::Identity(2, 2));
  const auto sel = p.select(pool);
  p.update(pool, sel, std::vector<int>{1, 0});
  CHECK(p.activation_rate() == doctest::Approx(0.5));
}

TEST_CASE("influence_cb: adaptive C is reported in the diagnostics") {
  InfluenceCbParams params;
  params.fixed_c.reset();
  InfluenceCb p(3, 1, params);
  const auto pool = pool_from(Matrix::Identity(3, 3));
  p.select(pool);
  CHECK(p.diagnostics().c == doctest::Approx(5.0));
  CHECK(p.hyperparameters().find("objective=regret") != std::string::npos);
}

TEST_CASE("influence_cb: invalid beta is a config error") {
  CHECK_THROWS_AS(InfluenceCb(3, 1, fixed_c_params(1.5, 3.0)), ConfigError);
  CHECK_THROWS_AS(InfluenceCb(3, 1, fixed_c_params(0.5, 0.0)), ConfigError);
}

// --- SGD baselines ----------------------------------------------------------

TEST_CASE("sgd: explore mode ignores the weights") {
  Rng setup(3);
  const auto pool = pool_from(random_rows(10, 3, setup));
  SgdLogistic a(3, 2, SgdMode::Explore, 0.1, 5), b(3, 2, SgdMode::Explore, 0.1, 5);
  for (int i = 0; i < 30; ++i) b.step(pool.features.row(i % 10).transpose(), i % 2);
  for (int t = 0; t < 20; ++t) CHECK(a.select(pool) == b.select(pool));
}

TEST_CASE("sgd: first step from zero weights") {
  SgdLogistic p(3, 1, SgdMode::Exploit, 0.2, 1);
  const Vector x = (Vector(3) << 1.0, -2.0, 0.5).finished();
  p.step(x, 1);
  CHECK((p.weights() - 0.2 * 0.5 * x).norm() < 1e-15);
  CHECK(p.predict(0, Vector::Zero(3)) == doctest::Approx(0.5));
}

TEST_CASE("sgd: exploit mode learns a separable instance") {
  // Label 1 iff the first coordinate is positive, with a bias column.
  Rng rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 200;
  Matrix rows(n, 3);
  std::vector<int> label(n);
  for (int i = 0; i < n; ++i) {
    double a = u(rng);
    if (std::abs(a) < 0.1) a = a < 0 ? -0.1 : 0.1;
    rows(i, 0) = a;
    rows(i, 1) = u(rng);
    rows(i, 2) = 1.0;
    label[static_cast<std::size_t>(i)] = a > 0 ? 1 : 0;
  }
  const auto pool = pool_from(rows);
  SgdLogistic p(3, 5, SgdMode::Exploit, 0.5, 1);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int t = 0; t < 2000; ++t) {
    // Exploit selection plus a random row so both classes are seen.
    auto sel = p.select(pool);
    sel.push_back(pick(rng));
    for (EdgeId id : sel) p.step(rows.row(id).transpose(), label[static_cast<std::size_t>(id)]);
  }
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const bool positive = rows.row(i).dot(p.weights()) > 0.0;
    correct += positive == (label[static_cast<std::size_t>(i)] == 1) ? 1 : 0;
  }
  CHECK(correct > 0.9 * n);
}

TEST_CASE("uniform subset: k distinct pool members") {
  Rng setup(1);
  const auto pool = pool_from(random_rows(9, 2, setup));
  Rng rng(4);
  std::map<EdgeId, int> freq;
  for (int i = 0; i < 9000; ++i) {
    const auto s = uniform_subset(pool, 3, rng);
    REQUIRE(sorted(s) == s);
    REQUIRE(std::adjacent_find(s.begin(), s.end()) == s.end());
    for (auto id : s) ++freq[id];
  }
  for (const auto& [id, n] : freq) CHECK(n == doctest::Approx(3000).epsilon(0.08));
}
