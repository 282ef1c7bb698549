#pragma once

#include <span>
#include <string>
#include <vector>

#include "ibandit/common.hpp"
#include "ibandit/envgen.hpp"

namespace ib {

class Policy;
struct RoundOutcome;
struct RunLog;

struct MetricSeries {
  std::vector<int> rounds;
  std::vector<double> cumulative_regret;
  std::vector<int> rmse_rounds;
  std::vector<double> rmse;
  double final_regret = 0.0;
  double final_rmse = 0.0;
};

/// Prefix sums of per-round regret. Aborts (ProtocolError) on a negative
/// per-round regret beyond rounding noise.
std::vector<double> cumulative_regret(std::span<const RoundOutcome> outcomes);

/// sqrt(mean (clip(x^T theta, 0, 1) - p_true)^2) over `holdout`.
double rmse_holdout(const Vector& theta, std::span<const EdgeContext> holdout);

/// Same metric with the policy's own probability estimates.
double rmse_predictions(const Policy& policy, std::span<const EdgeContext> holdout);

MetricSeries summarize(const RunLog& log);

struct RunSummary {
  std::string config;  // grouping key; replications share it
  double final_regret = 0.0;
  double final_rmse = 0.0;
};

struct ParetoRow {
  std::string config;
  int replications = 0;
  double regret_mean = 0.0;
  double regret_std = 0.0;  // sample std, 0 for a single replication
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  bool dominated = false;
};

/// True when `a` is no worse on both objectives and strictly better on one.
bool dominates(double regret_a, double rmse_a, double regret_b, double rmse_b);

/// Groups runs by config (first-appearance order), aggregates mean and
/// sample std, and flags configs whose means are Pareto-dominated.
std::vector<ParetoRow> pareto_summary(std::span<const RunSummary> runs);

}  // namespace ib
