#ifndef CMABMT_PMC_ENV_HPP
#define CMABMT_PMC_ENV_HPP

// Coverage instantiation of the framework: arms are the source nodes, an
// action is a seed set of at most k sources, and playing it reveals one
// categorical draw per selected source.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmabmt/concentration.hpp"
#include "cmabmt/framework.hpp"
#include "cmabmt/pmc_gd.hpp"

namespace cmabmt {

class PmcGdEnvironment final : public Environment {
 public:
  explicit PmcGdEnvironment(BipartiteInstance instance) : instance_(std::move(instance)) {
    instance_.validate();
    true_means_ = instance_.to_mean_matrix();
    optimal_value_ = brute_force_best(instance_, instance_.budget(), true_means_).second;
  }

  const BipartiteInstance& instance() const { return instance_; }

  int num_arms() const override { return instance_.sources(); }
  int outcome_dim() const override { return instance_.targets() + 1; }
  std::string kind() const override { return "pmc-gd"; }

  bool is_feasible(const Action& action) const override {
    if (static_cast<int>(action.size()) > instance_.budget()) return false;
    for (std::size_t i = 0; i < action.size(); ++i) {
      if (action[i] < 0 || action[i] >= instance_.sources()) return false;
      for (std::size_t j = 0; j < i; ++j)
        if (action[j] == action[i]) return false;
    }
    return true;
  }

  std::string describe_feasible() const override {
    return "seed sets of at most " + std::to_string(instance_.budget()) +
           " distinct sources in [0, " + std::to_string(instance_.sources()) + ")";
  }

  /// One categorical draw over targets + null per selected source; the
  /// observation is the one-hot over the augmented support (all target
  /// entries zero when the null slot is drawn).
  RoundFeedback sample_round(const Action& action, std::uint64_t seed,
                             std::int64_t round) const override {
    RoundFeedback feedback;
    std::vector<bool> covered(static_cast<std::size_t>(instance_.targets()), false);
    for (int u : action) {
      CounterRng rng(seed, {static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(u), 0, 0});
      const int slot = rng.categorical(instance_.row(u));
      TriggeredObservation obs;
      obs.arm = u;
      obs.outcome.assign(static_cast<std::size_t>(instance_.targets() + 1), 0.0);
      obs.outcome[static_cast<std::size_t>(slot)] = 1.0;
      feedback.observations.push_back(std::move(obs));
      if (slot < instance_.targets()) covered[static_cast<std::size_t>(slot)] = true;
    }
    for (bool c : covered) feedback.realized_reward += c ? 1.0 : 0.0;
    return feedback;
  }

  double exact_expected_reward(const Action& action) const override {
    return coverage_reward(true_means_, instance_.targets(), action);
  }

  double optimal_value() const override { return optimal_value_; }
  double alpha() const override { return 1.0 - 1.0 / std::exp(1.0); }
  const MeanMatrix& true_means() const override { return true_means_; }

 private:
  BipartiteInstance instance_;
  MeanMatrix true_means_;
  double optimal_value_ = 0.0;
};

struct PmcOracleOptions {
  bool warm_start = true;   // play each source once in the first |U| rounds
  bool lazy_greedy = true;  // priority-queue greedy instead of plain scans
};

/// Computes the per-source optimistic rows and L1 budgets for the current
/// statistics. The radius treats a row as a categorical over targets + null,
/// so the dimension inside the bound is |V| + 1.
struct PmcOptimism {
  MeanMatrix tilde;             // farthest rows inside the per-source balls
  std::vector<double> bonuses;  // attained L1 distances q_u
};

inline PmcOptimism pmc_optimism(const ArmStatistics& stats, int targets, std::int64_t total_rounds,
                                double delta_prime) {
  const int sources = stats.arms();
  const LogTerm ell = pmc_log_term(sources, targets, total_rounds, delta_prime);
  PmcOptimism out;
  out.tilde = MeanMatrix(sources, targets + 1);
  out.bonuses.assign(static_cast<std::size_t>(sources), 0.0);
  for (int u = 0; u < sources; ++u) {
    const double radius = l1_multinoulli_radius(targets + 1, stats.counter(u), ell.value());
    L1Deviation dev = max_l1_deviation(stats.mean_row(u), radius);
    auto dst = out.tilde.row(u);
    for (int j = 0; j <= targets; ++j) dst[static_cast<std::size_t>(j)] = dev.row[static_cast<std::size_t>(j)];
    out.bonuses[static_cast<std::size_t>(u)] = dev.distance;
  }
  return out;
}

/// Joint oracle maximizing the pseudo-reward: empirical coverage plus the sum
/// of per-source L1 deviation budgets. The bonus restores submodularity, so
/// greedy selection carries the (1 - 1/e) guarantee.
class PmcGreedyOracle final : public JointOracle {
 public:
  PmcGreedyOracle(int sources, int targets, int budget, std::int64_t total_rounds,
                  double delta_prime = -1.0, PmcOracleOptions options = {})
      : sources_(sources),
        targets_(targets),
        budget_(budget),
        total_rounds_(total_rounds),
        delta_prime_(delta_prime < 0.0 ? 1.0 / (2.0 * static_cast<double>(total_rounds))
                                       : delta_prime),
        options_(options) {}

  Proposal propose(const ArmStatistics& stats, std::int64_t round) override {
    PmcOptimism opt = pmc_optimism(stats, targets_, total_rounds_, delta_prime_);
    const MeanMatrix& hat = stats.empirical_means();
    auto pseudo_reward = [&](const SeedSet& pi) {
      double value = coverage_reward(hat, targets_, pi);
      for (int u : pi) value += opt.bonuses[static_cast<std::size_t>(u)];
      return value;
    };

    Proposal proposal;
    if (options_.warm_start && round <= sources_) {
      proposal.action = {static_cast<int>(round - 1)};
    } else {
      proposal.action = greedy_max(pseudo_reward, sources_, budget_, options_.lazy_greedy);
    }
    proposal.optimistic_value = pseudo_reward(proposal.action);
    proposal.optimistic_means = std::move(opt.tilde);
    return proposal;
  }

  bool truth_in_region(const ArmStatistics& stats, const MeanMatrix& truth) const override {
    const LogTerm ell = pmc_log_term(sources_, targets_, total_rounds_, delta_prime_);
    for (int u = 0; u < sources_; ++u) {
      const std::int64_t n = stats.counter(u);
      if (n == 0) continue;
      const double radius = l1_multinoulli_radius(targets_ + 1, n, ell.value());
      auto hat = stats.mean_row(u);
      auto tru = truth.row(u);
      double l1 = 0.0;
      for (int j = 0; j <= targets_; ++j) l1 += std::abs(hat[j] - tru[j]);
      if (l1 > radius) return false;
    }
    return true;
  }

 private:
  int sources_, targets_, budget_;
  std::int64_t total_rounds_;
  double delta_prime_;
  PmcOracleOptions options_;
};

}  // namespace cmabmt

#endif  // CMABMT_PMC_ENV_HPP
