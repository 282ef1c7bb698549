#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ibandit/linmodel.hpp"
#include "ibandit/simcore.hpp"

namespace ib {

// --- adaptive threshold ---------------------------------------------------

enum class Objective { Regret, Rmse };

Objective parse_objective(const std::string& name);
std::string to_string(Objective objective);

struct UpdateCParams {
  Objective objective = Objective::Regret;
  double c_min = 1.0;
  double c_max = 9.0;
  double gamma = 1.0;
  int warmup = 10;
  double epsilon = 1e-8;
};

/// Maps batch statistics to a threshold constant C_t in [c_min, c_max].
///
/// The tracked statistic m_t is the previous batch's activation rate under
/// the Regret objective and the pool's mean uncertainty under RMSE. It is
/// appended to the history before the baseline is taken; z is the deviation
/// of m_t below the baseline in population-std units and is passed through a
/// sigmoid. Under Regret, z is floored at 0 and C_t never decreases.
class UpdateC {
 public:
  explicit UpdateC(UpdateCParams params);

  double update(double activation_rate, double average_uncertainty);

  const UpdateCParams& params() const { return params_; }
  const std::vector<double>& history() const { return hist_; }
  double previous() const { return c_prev_; }

 private:
  UpdateCParams params_;
  std::vector<double> hist_;
  double mean_ = 0.0;
  double m2_ = 0.0;  // Welford sum of squared deviations
  double c_prev_;
};

// --- linear selection rules -------------------------------------------------

/// Top-k by x^T theta_hat + alpha * sqrt(x^T V^{-1} x).
std::vector<EdgeId> comb_lin_ucb_select(const LinearModel& model, const ActionPool& pool, double alpha, int k);

/// Top-k by x^T theta_tilde with theta_tilde ~ N(theta_hat, sigma^2 V^{-1}).
/// Falls back to UCB (alpha = sigma) when V^{-1} has no Cholesky factor and
/// reports it through `fell_back`.
std::vector<EdgeId> lin_ts_select(const LinearModel& model, const ActionPool& pool, double sigma_scale, int k,
                                  Rng& rng, bool* fell_back = nullptr);

/// Shared base for policies that keep a ridge model and update it with
/// every observed reward.
class LinearPolicy : public Policy {
 public:
  LinearPolicy(int dim, int k, double lambda) : model_(dim, lambda), k_(k) {}

  void update(const ActionPool& pool, std::span<const EdgeId> selected, std::span<const int> rewards) override;
  std::optional<Vector> theta_hat() const override { return model_.theta(); }
  double predict(EdgeId, const Vector& x) const override { return model_.predict_probability(x); }

  const LinearModel& model() const { return model_; }
  int k() const { return k_; }

 protected:
  LinearModel model_;
  int k_;
};

class CombLinUcb : public LinearPolicy {
 public:
  CombLinUcb(int dim, int k, double alpha = 2.0, double lambda = 1.0);

  std::string name() const override { return "linucb"; }
  std::string hyperparameters() const override;
  std::vector<EdgeId> select(const ActionPool& pool) override;
  RoundDiagnostics diagnostics() const override { return {Phase::Exploit}; }

 private:
  double alpha_;
};

class LinTs : public LinearPolicy {
 public:
  LinTs(int dim, int k, double sigma_scale, double lambda, std::uint64_t seed);

  std::string name() const override { return "lints"; }
  std::string hyperparameters() const override;
  std::vector<EdgeId> select(const ActionPool& pool) override;
  RoundDiagnostics diagnostics() const override { return {Phase::Exploit}; }
  int fallbacks() const { return fallbacks_; }

 private:
  double sigma_;
  Rng rng_;
  int fallbacks_ = 0;
};

/// Uniformly random k-subset each round; estimates with the shared ridge
/// model. Used as the uniform-allocation reference.
class UniformRandomPolicy : public LinearPolicy {
 public:
  UniformRandomPolicy(int dim, int k, double lambda, std::uint64_t seed);

  std::string name() const override { return "uniform"; }
  std::string hyperparameters() const override;
  std::vector<EdgeId> select(const ActionPool& pool) override;
  RoundDiagnostics diagnostics() const override { return {Phase::Explore}; }

 private:
  Rng rng_;
};

// --- InfluenceCB ------------------------------------------------------------

enum class InnerPolicy { CombLinUcb, LinTs };

struct InfluenceCbParams {
  double beta = 0.25;
  std::optional<double> fixed_c = 3.0;  // empty -> adaptive via UpdateC
  UpdateCParams update_c;
  double alpha = 2.0;
  double lambda = 1.0;
  InnerPolicy inner = InnerPolicy::CombLinUcb;
  double ts_sigma = 1.0;
};

/// Uncertainty-thresholded exploration on top of a linear CMAB policy.
///
/// Round t (1-based) explores, playing the k most uncertain pool edges, when
/// max_X sqrt(X^T V_{t-1}^{-1} X) > C_t / t^beta; otherwise the inner policy
/// chooses. Both phases update the same ridge model.
class InfluenceCb : public LinearPolicy {
 public:
  InfluenceCb(int dim, int k, InfluenceCbParams params, std::uint64_t seed = 0);

  std::string name() const override { return "influence_cb"; }
  std::string hyperparameters() const override;
  std::vector<EdgeId> select(const ActionPool& pool) override;
  void update(const ActionPool& pool, std::span<const EdgeId> selected, std::span<const int> rewards) override;
  RoundDiagnostics diagnostics() const override { return last_; }

  const InfluenceCbParams& params() const { return params_; }
  int round() const { return round_; }
  int explore_rounds() const { return explore_rounds_; }
  double activation_rate() const { return activation_rate_; }

  /// m_t(X): rounds in which X was the most uncertain pool member and the
  /// policy explored.
  const std::map<EdgeId, long>& exploration_counts() const { return exploration_counts_; }
  long exploration_count(EdgeId id) const;

 private:
  InfluenceCbParams params_;
  std::optional<UpdateC> update_c_;
  Rng rng_;
  int round_ = 0;
  int explore_rounds_ = 0;
  double activation_rate_ = 0.0;
  RoundDiagnostics last_;
  std::map<EdgeId, long> exploration_counts_;
};

// --- online logistic baselines ---------------------------------------------

enum class SgdMode { Explore, Exploit };

/// Logistic regression trained by one SGD step per observed (x, r).
class SgdLogistic : public Policy {
 public:
  SgdLogistic(int dim, int k, SgdMode mode, double learning_rate, std::uint64_t seed);

  std::string name() const override;
  std::string hyperparameters() const override;
  std::vector<EdgeId> select(const ActionPool& pool) override;
  void update(const ActionPool& pool, std::span<const EdgeId> selected, std::span<const int> rewards) override;
  RoundDiagnostics diagnostics() const override;
  double predict(EdgeId id, const Vector& x) const override;

  const Vector& weights() const { return weights_; }
  void step(const Vector& x, int reward);

 private:
  int k_;
  SgdMode mode_;
  double lr_;
  Vector weights_;
  Rng rng_;
};

/// Uniform k-subset of the pool rows (selection sampling, ascending rows).
std::vector<EdgeId> uniform_subset(const ActionPool& pool, int k, Rng& rng);

}  // namespace ib
