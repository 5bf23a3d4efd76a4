#ifndef CMABMT_BASELINE_HPP
#define CMABMT_BASELINE_HPP

// Per-dimension baseline for the coverage environment: every (source, target)
// edge is treated as an independent Bernoulli arm with the classical
// min{mean + sqrt(1.5 log t / N), 1} upper confidence bound, ignoring that a
// whole row is observed at once.

#include <cmath>
#include <cstdint>
#include <vector>

#include "cmabmt/framework.hpp"
#include "cmabmt/pmc_gd.hpp"

namespace cmabmt {

inline double per_edge_ucb(double empirical_mean, std::int64_t n, std::int64_t round) {
  if (n == 0) return 1.0;
  const double radius = std::sqrt(1.5 * std::log(static_cast<double>(round)) / static_cast<double>(n));
  return std::min(empirical_mean + radius, 1.0);
}

/// Edge-level UCB matrix for the current statistics. Row counters double as
/// per-edge counters because a triggered source reveals its full row.
inline MeanMatrix per_dimension_ucb_matrix(const ArmStatistics& stats, int targets,
                                           std::int64_t round) {
  MeanMatrix ucb(stats.arms(), targets + 1);
  for (int u = 0; u < stats.arms(); ++u) {
    const std::int64_t n = stats.counter(u);
    auto hat = stats.mean_row(u);
    auto dst = ucb.row(u);
    for (int v = 0; v < targets; ++v) dst[static_cast<std::size_t>(v)] = per_edge_ucb(hat[v], n, round);
  }
  return ucb;
}

/// Greedy seed selection on the per-edge UCB coverage objective.
inline Action per_dimension_baseline(const ArmStatistics& stats, int targets, int budget,
                                     std::int64_t round, bool lazy = true) {
  const MeanMatrix ucb = per_dimension_ucb_matrix(stats, targets, round);
  auto objective = [&](const SeedSet& pi) { return coverage_reward(ucb, targets, pi); };
  return greedy_max(objective, stats.arms(), budget, lazy);
}

class PerDimensionBaselineOracle final : public JointOracle {
 public:
  PerDimensionBaselineOracle(int sources, int targets, int budget, bool lazy = true)
      : sources_(sources), targets_(targets), budget_(budget), lazy_(lazy) {}

  Proposal propose(const ArmStatistics& stats, std::int64_t round) override {
    last_round_ = round;
    MeanMatrix ucb = per_dimension_ucb_matrix(stats, targets_, round);
    auto objective = [&](const SeedSet& pi) { return coverage_reward(ucb, targets_, pi); };
    Proposal proposal;
    proposal.action = greedy_max(objective, sources_, budget_, lazy_);
    proposal.optimistic_value = objective(proposal.action);
    proposal.optimistic_means = std::move(ucb);
    return proposal;
  }

  bool truth_in_region(const ArmStatistics& stats, const MeanMatrix& truth) const override {
    for (int u = 0; u < sources_; ++u) {
      const std::int64_t n = stats.counter(u);
      if (n == 0) continue;
      const double radius =
          std::sqrt(1.5 * std::log(static_cast<double>(last_round_)) / static_cast<double>(n));
      auto hat = stats.mean_row(u);
      auto tru = truth.row(u);
      for (int v = 0; v < targets_; ++v)
        if (std::abs(hat[v] - tru[v]) > radius) return false;
    }
    return true;
  }

 private:
  int sources_, targets_, budget_;
  bool lazy_;
  std::int64_t last_round_ = 1;
};

}  // namespace cmabmt

#endif  // CMABMT_BASELINE_HPP
