#include "ibandit/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ib {

LinearModel::LinearModel(int dim, double lambda, int refresh_interval)
    : dim_(dim), lambda_(lambda), refresh_interval_(refresh_interval) {
  if (dim < 1) throw ConfigError("linear model: dim must be >= 1, got " + std::to_string(dim));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("linear model: lambda must be > 0");
  }
  if (refresh_interval < 1) throw ConfigError("linear model: refresh interval must be >= 1");
  V_ = lambda * Matrix::Identity(dim, dim);
  Vinv_ = (1.0 / lambda) * Matrix::Identity(dim, dim);
  b_ = Vector::Zero(dim);
  theta_ = Vector::Zero(dim);
}

void LinearModel::observe(const Vector& x, int reward, EdgeId arm) {
  if (x.size() != dim_) {
    throw DataError("linear model: context has dimension " + std::to_string(x.size()) +
                    ", expected " + std::to_string(dim_));
  }
  if (!x.allFinite()) throw DataError("linear model: non-finite context for arm " + std::to_string(arm));
  if (reward != 0 && reward != 1) throw DataError("linear model: reward must be 0 or 1");

  ++play_counts_[arm];
  ++total_plays_;
  if (x.isZero(0.0)) return;

  V_.noalias() += x * x.transpose();
  const Vector vx = Vinv_ * x;
  const double denom = 1.0 + x.dot(vx);
  Vinv_.noalias() -= (vx * vx.transpose()) / denom;
  if (reward == 1) b_ += x;

  if (++updates_since_refresh_ >= refresh_interval_) refresh();
  theta_.noalias() = Vinv_ * b_;
}

double LinearModel::uncertainty(const Vector& x) const {
  if (!x.allFinite()) throw DataError("linear model: non-finite context");
  return std::sqrt(std::max(0.0, x.dot(Vinv_ * x)));
}

Vector LinearModel::uncertainties(const Matrix& rows) const {
  const Matrix projected = rows * Vinv_;
  Vector out = (projected.array() * rows.array()).rowwise().sum().matrix();
  return out.cwiseMax(0.0).cwiseSqrt();
}

double LinearModel::predict_probability(const Vector& x) const {
  return std::clamp(x.dot(theta_), 0.0, 1.0);
}

void LinearModel::refresh() {
  Vinv_ = V_.ldlt().solve(Matrix::Identity(dim_, dim_));
  Vinv_ = 0.5 * (Vinv_ + Vinv_.transpose()).eval();
  theta_.noalias() = Vinv_ * b_;
  updates_since_refresh_ = 0;
}

double LinearModel::inverse_drift() const {
  return (V_ * Vinv_ - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
}

double LinearModel::ridge_residual() const {
  return (V_ * theta_ - b_).cwiseAbs().maxCoeff();
}

long LinearModel::plays(EdgeId arm) const {
  const auto it = play_counts_.find(arm);
  return it == play_counts_.end() ? 0 : it->second;
}

}  // namespace ib
