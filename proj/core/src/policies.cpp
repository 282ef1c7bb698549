#include "ibandit/policies.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ibandit/csv.hpp"

namespace ib {

Objective parse_objective(const std::string& name) {
  if (name == "regret" || name == "Regret") return Objective::Regret;
  if (name == "rmse" || name == "RMSE") return Objective::Rmse;
  throw ConfigError("unknown objective '" + name + "'");
}

std::string to_string(Objective objective) { return objective == Objective::Regret ? "regret" : "rmse"; }

// --- UpdateC ------------------------------------------------------------------

UpdateC::UpdateC(UpdateCParams params) : params_(params), c_prev_(params.c_min) {
  if (!(params_.c_min < params_.c_max)) throw ConfigError("update_c: c_min must be < c_max");
  if (!(params_.c_min > 0.0)) throw ConfigError("update_c: c_min must be > 0");
  if (params_.warmup < 0) throw ConfigError("update_c: warmup must be >= 0");
  if (!(params_.epsilon > 0.0)) throw ConfigError("update_c: epsilon must be > 0");
}

double UpdateC::update(double activation_rate, double average_uncertainty) {
  if (!std::isfinite(activation_rate) || !std::isfinite(average_uncertainty)) {
    throw DataError("update_c: non-finite input");
  }
  const bool regret = params_.objective == Objective::Regret;
  const double m = regret ? activation_rate : average_uncertainty;

  hist_.push_back(m);
  const double n = static_cast<double>(hist_.size());
  const double delta = m - mean_;
  mean_ += delta / n;
  m2_ += delta * (m - mean_);
  const double stddev = std::sqrt(std::max(0.0, m2_ / n));

  const double baseline = static_cast<int>(hist_.size()) > params_.warmup ? mean_ : m;
  double z = (baseline - m) / (stddev + params_.epsilon);
  if (regret) z = std::max(0.0, z);

  const double s = 1.0 / (1.0 + std::exp(-params_.gamma * z));
  double c_new = params_.c_min * (1.0 - s) + params_.c_max * s;
  c_new = std::clamp(c_new, params_.c_min, params_.c_max);

  if (!regret) return c_new;
  c_prev_ = std::max(c_prev_, c_new);
  return c_prev_;
}

// --- selection rules ------------------------------------------------------------

std::vector<EdgeId> comb_lin_ucb_select(const LinearModel& model, const ActionPool& pool, double alpha, int k) {
  Vector index = pool.features * model.theta();
  if (alpha != 0.0) index += alpha * model.uncertainties(pool.features);
  return top_k_ids(pool, index, k);
}

std::vector<EdgeId> lin_ts_select(const LinearModel& model, const ActionPool& pool, double sigma_scale, int k,
                                  Rng& rng, bool* fell_back) {
  if (fell_back) *fell_back = false;
  if (sigma_scale == 0.0) return top_k_ids(pool, pool.features * model.theta(), k);

  Eigen::LLT<Matrix> llt(model.Vinv());
  if (llt.info() != Eigen::Success) {
    if (fell_back) *fell_back = true;
    return comb_lin_ucb_select(model, pool, sigma_scale, k);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(model.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Vector noise = llt.matrixL() * z;
  const Vector sample = model.theta() + sigma_scale * noise;
  return top_k_ids(pool, pool.features * sample, k);
}

std::vector<EdgeId> uniform_subset(const ActionPool& pool, int k, Rng& rng) {
  std::vector<EdgeId> out;
  out.reserve(static_cast<std::size_t>(k));
  std::sample(pool.ids.begin(), pool.ids.end(), std::back_inserter(out), k, rng);
  return out;
}

void LinearPolicy::update(const ActionPool& pool, std::span<const EdgeId> selected, std::span<const int> rewards) {
  for (std::size_t i = 0; i < selected.size(); ++i) {
    model_.observe(pool.context(selected[i]), rewards[i], selected[i]);
  }
  model_.finish_round();
}

CombLinUcb::CombLinUcb(int dim, int k, double alpha, double lambda) : LinearPolicy(dim, k, lambda), alpha_(alpha) {
  if (alpha < 0.0) throw ConfigError("linucb: alpha must be >= 0");
}

std::string CombLinUcb::hyperparameters() const {
  return "alpha=" + csv::format_double(alpha_) + ";lambda=" + csv::format_double(model_.lambda());
}

std::vector<EdgeId> CombLinUcb::select(const ActionPool& pool) { return comb_lin_ucb_select(model_, pool, alpha_, k_); }

LinTs::LinTs(int dim, int k, double sigma_scale, double lambda, std::uint64_t seed)
    : LinearPolicy(dim, k, lambda), sigma_(sigma_scale), rng_(seed) {
  if (sigma_scale < 0.0) throw ConfigError("lints: sigma must be >= 0");
}

std::string LinTs::hyperparameters() const {
  return "sigma=" + csv::format_double(sigma_) + ";lambda=" + csv::format_double(model_.lambda());
}

std::vector<EdgeId> LinTs::select(const ActionPool& pool) {
  bool fell_back = false;
  auto out = lin_ts_select(model_, pool, sigma_, k_, rng_, &fell_back);
  if (fell_back && fallbacks_++ == 0) {
    std::cerr << "warning: lints covariance factorization failed in round " << pool.round
              << "; using UCB selection\n";
  }
  return out;
}

UniformRandomPolicy::UniformRandomPolicy(int dim, int k, double lambda, std::uint64_t seed)
    : LinearPolicy(dim, k, lambda), rng_(seed) {}

std::string UniformRandomPolicy::hyperparameters() const { return "lambda=" + csv::format_double(model_.lambda()); }

std::vector<EdgeId> UniformRandomPolicy::select(const ActionPool& pool) { return uniform_subset(pool, k_, rng_); }

// --- InfluenceCB ----------------------------------------------------------------

InfluenceCb::InfluenceCb(int dim, int k, InfluenceCbParams params, std::uint64_t seed)
    : LinearPolicy(dim, k, params.lambda), params_(params), rng_(seed) {
  if (!(params_.beta >= 0.0 && params_.beta <= 1.0)) throw ConfigError("influence_cb: beta must lie in [0, 1]");
  if (params_.fixed_c) {
    if (!(*params_.fixed_c > 0.0)) throw ConfigError("influence_cb: C must be > 0");
  } else {
    update_c_.emplace(params_.update_c);
  }
  if (params_.alpha < 0.0) throw ConfigError("influence_cb: alpha must be >= 0");
}

std::string InfluenceCb::hyperparameters() const {
  std::ostringstream os;
  os << "beta=" << csv::format_double(params_.beta);
  if (params_.fixed_c) {
    os << ";C=" << csv::format_double(*params_.fixed_c);
  } else {
    const auto& u = params_.update_c;
    os << ";objective=" << to_string(u.objective) << ";c_min=" << csv::format_double(u.c_min)
       << ";c_max=" << csv::format_double(u.c_max) << ";gamma=" << csv::format_double(u.gamma)
       << ";warmup=" << u.warmup << ";epsilon=" << csv::format_double(u.epsilon);
  }
  os << ";alpha=" << csv::format_double(params_.alpha) << ";lambda=" << csv::format_double(params_.lambda)
     << ";inner=" << (params_.inner == InnerPolicy::CombLinUcb ? "comblinucb" : "lints");
  return os.str();
}

std::vector<EdgeId> InfluenceCb::select(const ActionPool& pool) {
  const int t = ++round_;
  const Vector u = model_.uncertainties(pool.features);
  const double u_max = u.maxCoeff();
  const double u_mean = u.mean();
  const double c = params_.fixed_c ? *params_.fixed_c : update_c_->update(activation_rate_, u_mean);

  last_.u = u_max;
  last_.au = u_mean;
  last_.c = c;

  if (u_max > c / std::pow(static_cast<double>(t), params_.beta)) {
    last_.phase = Phase::Explore;
    ++explore_rounds_;
    auto ids = top_k_ids(pool, u, k_);
    ++exploration_counts_[ids.front()];
    return ids;
  }
  last_.phase = Phase::Exploit;
  if (params_.inner == InnerPolicy::LinTs) return lin_ts_select(model_, pool, params_.ts_sigma, k_, rng_);
  return comb_lin_ucb_select(model_, pool, params_.alpha, k_);
}

void InfluenceCb::update(const ActionPool& pool, std::span<const EdgeId> selected, std::span<const int> rewards) {
  LinearPolicy::update(pool, selected, rewards);
  const int hits = std::accumulate(rewards.begin(), rewards.end(), 0);
  activation_rate_ = rewards.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rewards.size());
}

long InfluenceCb::exploration_count(EdgeId id) const {
  const auto it = exploration_counts_.find(id);
  return it == exploration_counts_.end() ? 0 : it->second;
}

// --- SGD logistic -------------------------------------------------------------------

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

SgdLogistic::SgdLogistic(int dim, int k, SgdMode mode, double learning_rate, std::uint64_t seed)
    : k_(k), mode_(mode), lr_(learning_rate), weights_(Vector::Zero(dim)), rng_(seed) {
  if (!(learning_rate > 0.0)) throw ConfigError("sgd: learning rate must be > 0");
}

std::string SgdLogistic::name() const { return mode_ == SgdMode::Explore ? "sgd_explore" : "sgd_exploit"; }

std::string SgdLogistic::hyperparameters() const { return "lr=" + csv::format_double(lr_); }

std::vector<EdgeId> SgdLogistic::select(const ActionPool& pool) {
  if (mode_ == SgdMode::Explore) return uniform_subset(pool, k_, rng_);
  return top_k_ids(pool, pool.features * weights_, k_);
}

void SgdLogistic::step(const Vector& x, int reward) {
  const double residual = static_cast<double>(reward) - sigmoid(weights_.dot(x));
  weights_ += lr_ * residual * x;
}

void SgdLogistic::update(const ActionPool& pool, std::span<const EdgeId> selected, std::span<const int> rewards) {
  for (std::size_t i = 0; i < selected.size(); ++i) step(pool.context(selected[i]), rewards[i]);
}

RoundDiagnostics SgdLogistic::diagnostics() const {
  return {mode_ == SgdMode::Explore ? Phase::Explore : Phase::Exploit};
}

double SgdLogistic::predict(EdgeId, const Vector& x) const { return sigmoid(weights_.dot(x)); }

}  // namespace ib
