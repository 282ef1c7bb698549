#include "ibandit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ibandit/common.hpp"

namespace ib::oracles {

HardInstance build_hard_instance(int m, int k, int d) {
  if (k < 1 || m <= k) throw ConfigError("hard instance: need M > k >= 1");
  if (d < 2) throw ConfigError("hard instance: need d >= 2");
  HardInstance h;
  h.k = k;
  h.arms.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  for (int i = 0; i < m; ++i) h.arms[static_cast<std::size_t>(i)][i < k ? 0 : 1] = 1.0;
  h.theta_star.assign(static_cast<std::size_t>(d), 0.0);
  h.theta_star[0] = 0.75;
  h.theta_star[1] = 0.25;
  return h;
}

namespace {

void enumerate(const std::vector<double>& values, std::size_t start, int left, std::vector<std::size_t>& current,
               long double sum, long double& best_sum, std::vector<std::size_t>& best) {
  if (left == 0) {
    // Subsets arrive in lexicographic order, so strict improvement keeps the
    // smallest index set among ties.
    if (best.empty() || sum > best_sum) {
      best_sum = sum;
      best = current;
    }
    return;
  }
  for (std::size_t i = start; i + static_cast<std::size_t>(left) <= values.size(); ++i) {
    current.push_back(i);
    enumerate(values, i + 1, left - 1, current, sum + static_cast<long double>(values[i]), best_sum, best);
    current.pop_back();
  }
}

}  // namespace

std::vector<std::size_t> brute_topk(const std::vector<double>& values, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > values.size()) throw ConfigError("brute_topk: need |values| >= k");
  std::vector<std::size_t> current;
  std::vector<std::size_t> best;
  long double best_sum = 0.0L;
  if (k == 0) return best;
  enumerate(values, 0, k, current, 0.0L, best_sum, best);
  return best;
}

double subset_value(const std::vector<double>& values, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  double sum = 0.0;
  for (std::size_t i : indices) sum += values.at(i);
  return sum;
}

bool gauss_jordan_inverse(const Dense& a, Dense& inverse, double singular_tol) {
  const std::size_t n = a.size();
  Dense work = a;
  inverse.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inverse[i][i] = 1.0;
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return false;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(work[r][col]) > std::abs(work[pivot][col])) pivot = r;
    }
    if (std::abs(work[pivot][col]) <= singular_tol * scale) return false;
    std::swap(work[pivot], work[col]);
    std::swap(inverse[pivot], inverse[col]);
    const double p = work[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      work[col][c] /= p;
      inverse[col][c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        work[r][c] -= f * work[col][c];
        inverse[r][c] -= f * inverse[col][c];
      }
    }
  }
  return true;
}

double dense_max_leverage(const Dense& arms, const std::vector<double>& w) {
  if (arms.empty() || arms.size() != w.size()) throw DataError("dense_max_leverage: size mismatch");
  const std::size_t d = arms.front().size();
  Dense info(d, std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < arms.size(); ++j) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) info[r][c] += w[j] * arms[j][r] * arms[j][c];
    }
  }
  Dense inv;
  if (!gauss_jordan_inverse(info, inv)) return std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : arms) {
    double q = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) q += x[r] * inv[r][c] * x[c];
    }
    best = std::max(best, q);
  }
  return best;
}

GridDesign grid_design_oracle(const Dense& arms, int k, double step) {
  const std::size_t m = arms.size();
  if (m < 1 || m > 4) throw ConfigError("grid_design_oracle: only M <= 4 arms are tractable");
  if (step != 0.01 && step != 0.005) throw ConfigError("grid_design_oracle: step must be 0.01 or 0.005");
  if (k < 1) throw ConfigError("grid_design_oracle: k must be >= 1");

  const int units = static_cast<int>(std::lround(1.0 / step));
  const int cap_units = static_cast<int>(std::floor(static_cast<double>(units) / static_cast<double>(k) + 1e-9));

  GridDesign best;
  best.f = std::numeric_limits<double>::infinity();
  std::vector<int> n(m, 0);
  std::vector<double> w(m, 0.0);

  // Odometer over the first m-1 coordinates; the last takes the remainder.
  while (true) {
    int used = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) used += n[i];
    const int last = units - used;
    if (last >= 0 && last <= cap_units) {
      n[m - 1] = last;
      for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(n[i]) / static_cast<double>(units);
      const double f = dense_max_leverage(arms, w);
      if (f < best.f) {
        best.f = f;
        best.w = w;
      }
    }
    std::size_t pos = 0;
    while (pos + 1 < m) {
      if (n[pos] < cap_units) {
        ++n[pos];
        break;
      }
      n[pos] = 0;
      ++pos;
    }
    if (pos + 1 >= m) break;
  }
  if (!std::isfinite(best.f)) throw SingularMatrixError("grid_design_oracle: no grid point has an invertible M(w)");
  return best;
}

double fit_rate(const std::vector<std::pair<double, double>>& series, double window) {
  if (!(window > 0.0 && window <= 1.0)) throw ConfigError("fit_rate: window must lie in (0, 1]");
  if (series.empty()) throw DataError("fit_rate: empty series");
  double t_max = 0.0;
  for (const auto& [t, v] : series) t_max = std::max(t_max, t);
  const double t_min = (1.0 - window) * t_max;

  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : series) {
    if (t < t_min) continue;
    if (!(t > 0.0) || !(v > 0.0)) {
      throw DataError("fit_rate: non-positive point at t=" + std::to_string(t));
    }
    pts.emplace_back(std::log(t), std::log(v));
  }
  if (pts.size() < 2) throw DataError("fit_rate: need two points in the window");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw DataError("fit_rate: need two distinct t values in the window");
  return sxy / sxx;
}

}  // namespace ib::oracles
