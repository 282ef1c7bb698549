#pragma once

#include <numeric>
#include <vector>

#include "ibandit/envgen.hpp"
#include "ibandit/oracles.hpp"
#include "ibandit/simcore.hpp"

namespace ibtest {

/// Fixed-mode environment over every context, nothing held out.
inline ib::Environment fixed_environment(ib::LabeledContexts labeled, int k) {
  ib::HoldoutSplit split;
  split.train.resize(labeled.contexts.size());
  std::iota(split.train.begin(), split.train.end(), ib::EdgeId{0});
  const int n = static_cast<int>(labeled.contexts.size());
  return ib::Environment(std::move(labeled.contexts), std::move(labeled.truth), std::move(split),
                         {ib::PoolMode::Fixed, n, k});
}

/// Contexts with ids 0..n-1 from matrix rows and a linear truth theta.
inline ib::LabeledContexts linear_contexts(const ib::Matrix& rows, const ib::Vector& theta) {
  ib::LabeledContexts out;
  out.truth.kind = ib::TruthKind::Linear;
  out.truth.theta_star = theta;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    ib::EdgeContext c;
    c.id = i;
    c.source = -1;
    c.target = -1;
    c.x = rows.row(i).transpose();
    c.p_true = c.x.dot(theta);
    out.contexts.push_back(c);
  }
  return out;
}

inline ib::oracles::Dense to_dense(const ib::Matrix& m) {
  ib::oracles::Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
  }
  return out;
}

inline std::vector<double> to_std(const ib::Vector& v) { return {v.data(), v.data() + v.size()}; }

inline double max_abs_diff(const ib::Matrix& a, const ib::oracles::Dense& b) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      worst = std::max(worst, std::abs(a(r, c) - b[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
    }
  }
  return worst;
}

}  // namespace ibtest
