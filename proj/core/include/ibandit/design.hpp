#pragma once

#include <filesystem>
#include <vector>

#include "ibandit/policies.hpp"
#include "ibandit/simcore.hpp"

namespace ib {

struct DesignWeights {
  Vector w;
  double cap = 1.0;
  double f_value = 0.0;  // max_i x_i^T M(w)^{-1} x_i
  int iterations = 0;
  bool converged = false;
};

struct DesignOptions {
  int max_iters = 5000;
  double tol = 1e-4;
  /// Minimax polish of the max-leverage criterion after the log-det phase.
  /// The capped D-optimal point is not G-optimal in general.
  bool refine = true;
  int refine_iters = 400;
};

/// Approximately minimizes max_i x_i^T M(w)^{-1} x_i over probability
/// vectors with entries at most 1/k, where M(w) = sum_j w_j x_j x_j^T and
/// `arms` holds one arm per row.
///
/// Frank-Wolfe ascent on log det M(w) from the uniform point, step 2/(t+2)
/// for t = 1, 2, ..., with `converged` reporting a duality gap below `tol`.
/// When `refine` is set, projected gradient steps on a log-sum-exp smoothing
/// of the max leverage follow, keeping the best iterate by the exact value.
DesignWeights solve_gk_design(const Matrix& arms, int k, const DesignOptions& options = {});

/// max_i x_i^T M(w)^{-1} x_i. Throws SingularMatrixError when M(w) is not
/// invertible.
double eval_max_leverage(const Matrix& arms, const Vector& w);

/// Euclidean projection onto {w : 0 <= w_i <= cap, sum w_i = 1}.
Vector project_capped_simplex(const Vector& v, double cap);

struct Allocation {
  std::vector<long> counts;
  long T = 0;
  int k = 0;
};

/// Largest-remainder rounding of kT*w with every count capped at T.
Allocation round_allocation(const Vector& w, int k, long T);
inline Allocation round_allocation(const DesignWeights& w, int k, long T) { return round_allocation(w.w, k, T); }

/// T rounds of k distinct arm indices consuming exactly counts[i] plays of
/// arm i. Each round takes the k arms with the most plays left.
std::vector<std::vector<int>> build_schedule(const Allocation& allocation);

/// arm,weight rows.
void write_design_weights(const DesignWeights& weights, const std::filesystem::path& path);

/// Plays a precomputed allocation schedule over a fixed arm set and fits a
/// ridge model on the observed rewards.
class StaticDesignPolicy : public LinearPolicy {
 public:
  StaticDesignPolicy(std::vector<EdgeId> arm_ids, const Allocation& allocation, int dim, double lambda);

  std::string name() const override { return "design"; }
  std::string hyperparameters() const override;
  std::vector<EdgeId> select(const ActionPool& pool) override;
  RoundDiagnostics diagnostics() const override { return {Phase::Static}; }

  const std::vector<std::vector<int>>& schedule() const { return schedule_; }

 private:
  std::vector<EdgeId> arm_ids_;
  std::vector<std::vector<int>> schedule_;
  std::size_t next_ = 0;
};

/// Solves the design over the environment's training edges and wraps the
/// rounded allocation for a horizon of T rounds. Fixed pool mode only.
std::unique_ptr<StaticDesignPolicy> make_design_policy(const Environment& env, long T, double lambda,
                                                       const DesignOptions& options = {});

}  // namespace ib
