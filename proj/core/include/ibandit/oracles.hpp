#pragma once

#include <cstddef>
#include <utility>
#include <vector>

// Brute-force references used to check the production code paths. Nothing
// here calls into the modules it checks: plain std::vector storage and a
// hand-written Gauss-Jordan elimination stand in for Eigen.
namespace ib::oracles {

using Dense = std::vector<std::vector<double>>;

struct HardInstance {
  Dense arms;                  // M rows of length d
  std::vector<double> theta_star;
  double gap = 0.5;
  int k = 0;
};

/// First k arms e_1, remaining M-k arms e_2, theta* = (3/4, 1/4, 0, ...).
HardInstance build_hard_instance(int m, int k, int d);

/// Exhaustive search over k-subsets maximizing the sum. Among equal sums the
/// lexicographically smallest index set wins, which coincides with sorting
/// by value and breaking ties toward the smaller index. Sorted ascending.
std::vector<std::size_t> brute_topk(const std::vector<double>& values, int k);

/// Sum of values[i] over `indices` taken in ascending index order.
double subset_value(const std::vector<double>& values, std::vector<std::size_t> indices);

/// Inverse by Gauss-Jordan elimination with partial pivoting. Returns false
/// when a pivot falls below `singular_tol` times the largest entry.
bool gauss_jordan_inverse(const Dense& a, Dense& inverse, double singular_tol = 1e-12);

/// max_i x_i^T M(w)^{-1} x_i computed with explicit loops; +infinity when
/// M(w) is singular.
double dense_max_leverage(const Dense& arms, const std::vector<double>& w);

struct GridDesign {
  std::vector<double> w;
  double f = 0.0;
};

/// Exhaustive grid over the capped simplex {w_i in step*Z, w_i <= 1/k,
/// sum w_i = 1}. Limited to M <= 4 arms and step 0.01 or 0.005.
GridDesign grid_design_oracle(const Dense& arms, int k, double step);

/// Least-squares slope of log(value) against log(t) over points with
/// t >= (1 - window) * t_max.
double fit_rate(const std::vector<std::pair<double, double>>& series, double window = 0.5);

}  // namespace ib::oracles
