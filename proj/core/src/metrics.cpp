#include "ibandit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ibandit/simcore.hpp"

namespace ib {

std::vector<double> cumulative_regret(std::span<const RoundOutcome> outcomes) {
  std::vector<double> series;
  series.reserve(outcomes.size());
  double total = 0.0;
  int prev_round = 0;
  for (const auto& o : outcomes) {
    if (o.round <= prev_round) throw ProtocolError("cumulative_regret: outcomes out of order");
    prev_round = o.round;
    const double r = o.regret();
    if (r < -1e-12) throw ProtocolError("cumulative_regret: negative regret in round " + std::to_string(o.round));
    total += std::max(0.0, r);
    series.push_back(total);
  }
  return series;
}

double rmse_holdout(const Vector& theta, std::span<const EdgeContext> holdout) {
  if (holdout.empty()) throw ConfigError("rmse_holdout: empty evaluation set");
  double sum = 0.0;
  for (const auto& e : holdout) {
    const double err = std::clamp(e.x.dot(theta), 0.0, 1.0) - e.p_true;
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(holdout.size()));
}

double rmse_predictions(const Policy& policy, std::span<const EdgeContext> holdout) {
  if (holdout.empty()) throw ConfigError("rmse_predictions: empty evaluation set");
  double sum = 0.0;
  for (const auto& e : holdout) {
    const double err = std::clamp(policy.predict(e.id, e.x), 0.0, 1.0) - e.p_true;
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(holdout.size()));
}

MetricSeries summarize(const RunLog& log) {
  MetricSeries s;
  s.cumulative_regret = cumulative_regret(log.rounds);
  for (const auto& r : log.rounds) s.rounds.push_back(r.round);
  for (const auto& snap : log.snapshots) {
    s.rmse_rounds.push_back(snap.round);
    s.rmse.push_back(snap.rmse);
  }
  s.final_regret = s.cumulative_regret.empty() ? 0.0 : s.cumulative_regret.back();
  s.final_rmse = log.final_rmse;
  return s;
}

bool dominates(double regret_a, double rmse_a, double regret_b, double rmse_b) {
  return regret_a <= regret_b && rmse_a <= rmse_b && (regret_a < regret_b || rmse_a < rmse_b);
}

namespace {

std::pair<double, double> mean_and_sample_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<ParetoRow> pareto_summary(std::span<const RunSummary> runs) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : runs) {
    auto [it, inserted] = groups.try_emplace(r.config);
    if (inserted) order.push_back(r.config);
    it->second.first.push_back(r.final_regret);
    it->second.second.push_back(r.final_rmse);
  }

  std::vector<ParetoRow> rows;
  for (const auto& key : order) {
    const auto& [regrets, rmses] = groups.at(key);
    ParetoRow row;
    row.config = key;
    row.replications = static_cast<int>(regrets.size());
    std::tie(row.regret_mean, row.regret_std) = mean_and_sample_std(regrets);
    std::tie(row.rmse_mean, row.rmse_std) = mean_and_sample_std(rmses);
    rows.push_back(row);
  }
  for (auto& a : rows) {
    for (const auto& b : rows) {
      if (&a != &b && dominates(b.regret_mean, b.rmse_mean, a.regret_mean, a.rmse_mean)) {
        a.dominated = true;
        break;
      }
    }
  }
  return rows;
}

}  // namespace ib
