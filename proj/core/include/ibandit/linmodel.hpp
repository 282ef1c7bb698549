#pragma once

#include <unordered_map>

#include "ibandit/common.hpp"

namespace ib {

/// Shared ridge-regression state for the linear bandit policies.
///
/// Holds V = lambda*I + sum x x^T, its inverse, b = sum r*x and
/// theta_hat = V^{-1} b. The inverse is maintained by Sherman-Morrison
/// rank-1 updates and recomputed from V by a direct solve every
/// `refresh_interval` updates to bound floating drift.
class LinearModel {
 public:
  static constexpr int kDefaultRefreshInterval = 512;

  LinearModel(int dim, double lambda,
              int refresh_interval = kDefaultRefreshInterval);

  /// Records one play of `arm` with context `x` and binary reward `reward`.
  void observe(const Vector& x, int reward, EdgeId arm);

  /// Marks the end of a simulation round.
  void finish_round() { ++round_; }

  /// sqrt(x^T V^{-1} x).
  double uncertainty(const Vector& x) const;

  /// Row-wise uncertainty for a stacked context matrix (one context per row).
  Vector uncertainties(const Matrix& rows) const;

  /// clip(x^T theta_hat, 0, 1).
  double predict_probability(const Vector& x) const;

  /// Recomputes V^{-1} directly from V.
  void refresh();

  /// max |V * V^{-1} - I|.
  double inverse_drift() const;

  /// max |V * theta_hat - b|.
  double ridge_residual() const;

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const Matrix& V() const { return V_; }
  const Matrix& Vinv() const { return Vinv_; }
  const Vector& b() const { return b_; }
  const Vector& theta() const { return theta_; }
  long round() const { return round_; }
  long total_plays() const { return total_plays_; }
  int updates_since_refresh() const { return updates_since_refresh_; }
  long plays(EdgeId arm) const;
  const std::unordered_map<EdgeId, long>& play_counts() const {
    return play_counts_;
  }

 private:
  int dim_;
  double lambda_;
  int refresh_interval_;
  Matrix V_;
  Matrix Vinv_;
  Vector b_;
  Vector theta_;
  long round_ = 0;
  long total_plays_ = 0;
  int updates_since_refresh_ = 0;
  std::unordered_map<EdgeId, long> play_counts_;
};

}  // namespace ib
