#include "ibandit/design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ibandit/csv.hpp"

namespace ib {

namespace {

constexpr double kSingularRatio = 1e-12;

/// Inverse of M(w), or nothing when M(w) is numerically singular.
std::optional<Matrix> information_inverse(const Matrix& arms, const Vector& w) {
  const Matrix info = arms.transpose() * w.asDiagonal() * arms;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  if (!(hi > 0.0) || lo <= kSingularRatio * std::max(1.0, hi)) return std::nullopt;
  const Vector inv_vals = eig.eigenvalues().cwiseInverse();
  return eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
}

Vector leverages(const Matrix& arms, const Matrix& inverse) {
  return (arms * inverse).cwiseProduct(arms).rowwise().sum();
}

/// Greedy linear maximization over the capped simplex.
Vector capped_vertex(const Vector& gradient, double cap) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(gradient.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return gradient(a) > gradient(b); });
  Vector s = Vector::Zero(gradient.size());
  double left = 1.0;
  for (Eigen::Index i : order) {
    if (left <= 0.0) break;
    const double take = std::min(cap, left);
    s(i) = take;
    left -= take;
  }
  return s;
}

double smoothed_max(const Vector& lev, double mu) {
  const double top = lev.maxCoeff();
  return top + mu * std::log(((lev.array() - top) / mu).exp().sum());
}

struct SmoothEval {
  double value = std::numeric_limits<double>::infinity();
  double exact = std::numeric_limits<double>::infinity();
  Vector gradient;
};

SmoothEval smooth_eval(const Matrix& arms, const Vector& w, double mu, bool with_gradient) {
  SmoothEval out;
  const auto inverse = information_inverse(arms, w);
  if (!inverse) return out;
  const Vector lev = leverages(arms, *inverse);
  out.exact = lev.maxCoeff();
  out.value = smoothed_max(lev, mu);
  if (with_gradient) {
    const Vector p = ((lev.array() - out.exact) / mu).exp().matrix();
    const Matrix cross = arms * *inverse * arms.transpose();
    // d lev_i / d w_j = -(x_i^T M^{-1} x_j)^2
    out.gradient = -(cross.array().square().matrix().transpose() * (p / p.sum()));
  }
  return out;
}

Vector clean_weights(Vector w, double cap) {
  w = w.cwiseMax(0.0).cwiseMin(cap);
  return w / w.sum();
}

}  // namespace

Vector project_capped_simplex(const Vector& v, double cap) {
  const auto n = v.size();
  if (n == 0 || cap * static_cast<double>(n) < 1.0 - 1e-12) {
    throw ConfigError("capped simplex is empty for this cap");
  }
  auto mass = [&](double tau) { return (v.array() - tau).max(0.0).min(cap).sum(); };
  double lo = v.minCoeff() - cap;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  Vector w = (v.array() - 0.5 * (lo + hi)).max(0.0).min(cap).matrix();
  return w / w.sum();
}

double eval_max_leverage(const Matrix& arms, const Vector& w) {
  if (w.size() != arms.rows()) throw DataError("eval_max_leverage: weight count differs from arm count");
  const auto inverse = information_inverse(arms, w);
  if (!inverse) throw SingularMatrixError("eval_max_leverage: information matrix is singular");
  return leverages(arms, *inverse).maxCoeff();
}

DesignWeights solve_gk_design(const Matrix& arms, int k, const DesignOptions& options) {
  const auto m = arms.rows();
  const auto d = arms.cols();
  if (k < 1) throw ConfigError("design: k must be >= 1");
  if (m <= k) throw ConfigError("design: need more arms than k");
  if (options.max_iters < 1 || !(options.tol > 0.0)) throw ConfigError("design: invalid solver options");
  if (!arms.allFinite()) throw DataError("design: non-finite arm features");
  Eigen::ColPivHouseholderQR<Matrix> qr(arms);
  if (qr.rank() < d) throw SingularMatrixError("design: arms do not span the feature space");

  DesignWeights out;
  out.cap = 1.0 / static_cast<double>(k);
  const Vector uniform = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector w = uniform;
  int restarts = 0;

  int t = 1;
  for (; t <= options.max_iters; ++t) {
    const auto inverse = information_inverse(arms, w);
    if (!inverse) {
      if (++restarts > 3) throw SingularMatrixError("design: information matrix stays singular");
      w = uniform;
      continue;
    }
    const Vector grad = leverages(arms, *inverse);
    const Vector s = capped_vertex(grad, out.cap);
    if (grad.dot(s - w) < options.tol) {
      out.converged = true;
      break;
    }
    const double step = 2.0 / (static_cast<double>(t) + 2.0);
    w = (1.0 - step) * w + step * s;
  }
  out.iterations = std::min(t, options.max_iters);

  if (options.refine) {
    Vector best = w;
    double best_f = eval_max_leverage(arms, w);
    for (double rel_mu : {3e-2, 1e-2, 3e-3, 1e-3, 3e-4}) {
      const double mu = rel_mu * best_f;
      Vector cur = best;
      SmoothEval here = smooth_eval(arms, cur, mu, true);
      double eta = 0.1 / std::max(1e-12, here.gradient.cwiseAbs().maxCoeff());
      const int iters = std::max(1, options.refine_iters / 5);
      for (int it = 0; it < iters; ++it) {
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
          const Vector trial = project_capped_simplex(cur - eta * here.gradient, out.cap);
          const SmoothEval next = smooth_eval(arms, trial, mu, false);
          if (next.value < here.value) {
            cur = trial;
            accepted = true;
            break;
          }
          eta *= 0.5;
        }
        if (!accepted) break;
        here = smooth_eval(arms, cur, mu, true);
        if (here.exact < best_f) {
          best_f = here.exact;
          best = cur;
        }
        eta *= 1.5;
      }
    }
    w = best;
  }

  out.w = clean_weights(w, out.cap);
  out.f_value = eval_max_leverage(arms, out.w);
  return out;
}

Allocation round_allocation(const Vector& w, int k, long T) {
  if (k < 1 || T < 0) throw ConfigError("round_allocation: need k >= 1 and T >= 0");
  const double cap = 1.0 / static_cast<double>(k);
  if (std::abs(w.sum() - 1.0) > 1e-9 || w.minCoeff() < -1e-12 || w.maxCoeff() > cap + 1e-9) {
    throw ConfigError("round_allocation: weights are not in the capped simplex");
  }
  if (static_cast<long>(w.size()) < k) throw ConfigError("round_allocation: fewer arms than k");

  const long total = static_cast<long>(k) * T;
  Allocation out{std::vector<long>(static_cast<std::size_t>(w.size())), T, k};
  std::vector<double> remainder(out.counts.size());
  long assigned = 0;
  for (std::size_t i = 0; i < out.counts.size(); ++i) {
    const double target = static_cast<double>(total) * std::max(0.0, w(static_cast<Eigen::Index>(i)));
    const double base = std::floor(target);
    out.counts[i] = std::min(T, static_cast<long>(base));
    remainder[i] = out.counts[i] == T ? -1.0 : target - base;
    assigned += out.counts[i];
  }

  std::vector<std::size_t> order(out.counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // Rounding noise can leave more than one unit per arm to place; cycle.
  while (assigned < total) {
    bool progressed = false;
    for (std::size_t i : order) {
      if (assigned == total) break;
      if (out.counts[i] < T) {
        ++out.counts[i];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) throw ConfigError("round_allocation: cap leaves no room for k*T plays");
  }
  while (assigned > total) {
    for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
      if (out.counts[*it] > 0) {
        --out.counts[*it];
        --assigned;
      }
    }
  }
  return out;
}

std::vector<std::vector<int>> build_schedule(const Allocation& allocation) {
  const auto m = allocation.counts.size();
  long sum = 0;
  for (long c : allocation.counts) {
    if (c < 0 || c > allocation.T) throw ConfigError("schedule: count outside [0, T]");
    sum += c;
  }
  if (sum != allocation.k * allocation.T) throw ConfigError("schedule: counts do not sum to k*T");

  std::vector<long> left = allocation.counts;
  std::vector<int> order(m);
  std::vector<std::vector<int>> rounds;
  rounds.reserve(static_cast<std::size_t>(allocation.T));
  for (long t = 0; t < allocation.T; ++t) {
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + allocation.k, order.end(), [&](int a, int b) {
      return left[static_cast<std::size_t>(a)] != left[static_cast<std::size_t>(b)]
                 ? left[static_cast<std::size_t>(a)] > left[static_cast<std::size_t>(b)]
                 : a < b;
    });
    std::vector<int> round(order.begin(), order.begin() + allocation.k);
    for (int i : round) {
      if (left[static_cast<std::size_t>(i)] == 0) throw ConfigError("schedule: infeasible allocation");
      --left[static_cast<std::size_t>(i)];
    }
    std::sort(round.begin(), round.end());
    rounds.push_back(std::move(round));
  }
  return rounds;
}

void write_design_weights(const DesignWeights& weights, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "arm,weight\n";
  for (Eigen::Index i = 0; i < weights.w.size(); ++i) out << i << ',' << csv::format_double(weights.w(i)) << '\n';
}

StaticDesignPolicy::StaticDesignPolicy(std::vector<EdgeId> arm_ids, const Allocation& allocation, int dim,
                                       double lambda)
    : LinearPolicy(dim, allocation.k, lambda), arm_ids_(std::move(arm_ids)), schedule_(build_schedule(allocation)) {
  if (arm_ids_.size() != allocation.counts.size()) throw ConfigError("design policy: arm id count mismatch");
}

std::string StaticDesignPolicy::hyperparameters() const {
  return "lambda=" + csv::format_double(model_.lambda()) + ";T=" + std::to_string(schedule_.size());
}

std::vector<EdgeId> StaticDesignPolicy::select(const ActionPool& pool) {
  if (pool.mode != PoolMode::Fixed) throw ConfigError("design policy requires the fixed pool mode");
  if (next_ >= schedule_.size()) throw ProtocolError("design policy: schedule exhausted");
  std::vector<EdgeId> out;
  for (int i : schedule_[next_]) out.push_back(arm_ids_.at(static_cast<std::size_t>(i)));
  ++next_;
  return out;
}

std::unique_ptr<StaticDesignPolicy> make_design_policy(const Environment& env, long T, double lambda,
                                                       const DesignOptions& options) {
  if (env.mode() != PoolMode::Fixed) throw ConfigError("design policy requires the fixed pool mode");
  const ActionPool arms = env.training_pool(0);
  const DesignWeights w = solve_gk_design(arms.features, env.k(), options);
  return std::make_unique<StaticDesignPolicy>(arms.ids, round_allocation(w, env.k(), T), env.dim(), lambda);
}

}  // namespace ib
