#ifndef CMABMT_RL_ENV_HPP
#define CMABMT_RL_ENV_HPP

// Episodic-RL instantiation of the framework: arms are the (s, a, h)
// transition rows, an action is a flattened deterministic policy, and one
// round is one sampled episode.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmabmt/framework.hpp"
#include "cmabmt/rl_oracles.hpp"
#include "cmabmt/tabular_mdp.hpp"

namespace cmabmt {

class EpisodicRlEnvironment final : public Environment {
 public:
  explicit EpisodicRlEnvironment(TabularMdp mdp) : mdp_(std::move(mdp)) {
    mdp_.validate();
    true_means_ = mdp_.transition_means();
    auto [v_star, pi_star] = optimal_values(mdp_);
    optimal_value_ = v_star.initial_value(mdp_.initial_state());
  }

  const TabularMdp& mdp() const { return mdp_; }

  int num_arms() const override { return mdp_.num_arms(); }
  int outcome_dim() const override { return mdp_.states(); }
  std::string kind() const override { return "episodic-rl"; }

  bool is_feasible(const Action& action) const override {
    if (static_cast<int>(action.size()) != mdp_.states() * mdp_.horizon()) return false;
    for (int a : action)
      if (a < 0 || a >= mdp_.actions()) return false;
    return true;
  }

  std::string describe_feasible() const override {
    return "deterministic policies: " + std::to_string(mdp_.states() * mdp_.horizon()) +
           " action indices in [0, " + std::to_string(mdp_.actions()) + ")";
  }

  RoundFeedback sample_round(const Action& action, std::uint64_t seed,
                             std::int64_t round) const override {
    const Policy pi = Policy::from_action(action, mdp_.states(), mdp_.horizon());
    EpisodeSample episode = sample_episode(mdp_, pi, seed, round);
    RoundFeedback feedback;
    feedback.observations = std::move(episode.observations);
    feedback.realized_reward =
        std::accumulate(episode.realized_rewards.begin(), episode.realized_rewards.end(), 0.0);
    return feedback;
  }

  double exact_expected_reward(const Action& action) const override {
    const Policy pi = Policy::from_action(action, mdp_.states(), mdp_.horizon());
    return value_of_policy(mdp_, pi).initial_value(mdp_.initial_state());
  }

  double optimal_value() const override { return optimal_value_; }
  double alpha() const override { return 1.0; }
  const MeanMatrix& true_means() const override { return true_means_; }

 private:
  TabularMdp mdp_;
  MeanMatrix true_means_;
  double optimal_value_ = 0.0;
};

/// Extended-value-iteration joint oracle. Knows the reward structure and the
/// horizon budget T; learns only the transitions.
class ExtendedViOracle final : public JointOracle {
 public:
  ExtendedViOracle(const TabularMdp& mdp, std::int64_t total_rounds, double delta_prime = -1.0)
      : mdp_(mdp),
        total_rounds_(total_rounds),
        delta_prime_(delta_prime < 0.0 ? 1.0 / (2.0 * static_cast<double>(total_rounds))
                                       : delta_prime) {}

  Proposal propose(const ArmStatistics& stats, std::int64_t) override {
    last_ = extended_value_iteration(mdp_, stats, total_rounds_, delta_prime_);
    Proposal proposal;
    proposal.action = last_.policy.to_action();
    proposal.optimistic_means = to_mean_matrix(last_.optimistic_transitions);
    proposal.optimistic_value = last_.v_upper.initial_value(mdp_.initial_state());
    return proposal;
  }

  /// Membership check of the L1 confidence region: every arm's true row is
  /// within the arm's radius of the empirical row.
  bool truth_in_region(const ArmStatistics& stats, const MeanMatrix& truth) const override {
    const LogTerm ell = rl_log_term(mdp_.states(), mdp_.actions(), mdp_.horizon(), total_rounds_,
                                    delta_prime_);
    for (int arm = 0; arm < mdp_.num_arms(); ++arm) {
      const std::int64_t n = stats.counter(arm);
      if (n == 0) continue;
      const double radius = l1_multinoulli_radius(mdp_.states(), n, ell.value());
      auto hat = stats.mean_row(arm);
      auto tru = truth.row(arm);
      double l1 = 0.0;
      for (int j = 0; j < mdp_.states(); ++j) l1 += std::abs(hat[j] - tru[j]);
      if (l1 > radius) return false;
    }
    return true;
  }

  const RlOracleOutput& last_output() const { return last_; }

 private:
  MeanMatrix to_mean_matrix(const std::vector<double>& transitions) const {
    MeanMatrix m(mdp_.num_arms(), mdp_.states());
    for (int arm = 0; arm < mdp_.num_arms(); ++arm)
      for (int j = 0; j < mdp_.states(); ++j)
        m.at(arm, j) = transitions[static_cast<std::size_t>(arm) * mdp_.states() + j];
    return m;
  }

  TabularMdp mdp_;
  std::int64_t total_rounds_;
  double delta_prime_;
  RlOracleOutput last_;
};

/// Variance-aware optimistic/pessimistic value-iteration joint oracle.
class OptimisticViOracle final : public JointOracle {
 public:
  OptimisticViOracle(const TabularMdp& mdp, std::int64_t total_rounds, double delta_prime = -1.0)
      : mdp_(mdp),
        total_rounds_(total_rounds),
        delta_prime_(delta_prime < 0.0 ? 1.0 / (8.0 * static_cast<double>(total_rounds))
                                       : delta_prime) {}

  Proposal propose(const ArmStatistics& stats, std::int64_t) override {
    last_ = optimistic_value_iteration(mdp_, stats, total_rounds_, delta_prime_);
    Proposal proposal;
    proposal.action = last_.policy.to_action();
    proposal.optimistic_means = to_mean_matrix(last_.optimistic_transitions);
    proposal.optimistic_value = last_.v_upper.initial_value(mdp_.initial_state());
    return proposal;
  }

  /// Membership in the value-weighted region: for every arm,
  /// |(p_hat - p)' V*_{h+1}| is within the bonus computed in the last pass.
  /// Valid right after propose() with the same statistics.
  bool truth_in_region(const ArmStatistics& stats, const MeanMatrix& truth) const override {
    if (last_.bonus.empty()) throw std::logic_error("OptimisticViOracle: no pass cached yet");
    TabularMdp true_mdp = mdp_;
    std::vector<double> transitions(true_mdp.transitions().size());
    for (int arm = 0; arm < mdp_.num_arms(); ++arm)
      for (int j = 0; j < mdp_.states(); ++j)
        transitions[static_cast<std::size_t>(arm) * mdp_.states() + j] = truth.at(arm, j);
    true_mdp.set_transitions(std::move(transitions));
    const ValueTable v_star = optimal_values(true_mdp).first;

    for (int h = 0; h < mdp_.horizon(); ++h) {
      auto next = v_star.step(h + 1);
      for (int s = 0; s < mdp_.states(); ++s)
        for (int a = 0; a < mdp_.actions(); ++a) {
          const int arm = mdp_.arm_index(s, a, h);
          if (stats.counter(arm) == 0) continue;
          auto hat = stats.mean_row(arm);
          auto tru = truth.row(arm);
          double inner = 0.0;
          for (int j = 0; j < mdp_.states(); ++j) inner += (hat[j] - tru[j]) * next[j];
          if (std::abs(inner) > last_.bonus[static_cast<std::size_t>(arm)]) return false;
        }
    }
    return true;
  }

  const RlOracleOutput& last_output() const { return last_; }

 private:
  MeanMatrix to_mean_matrix(const std::vector<double>& transitions) const {
    MeanMatrix m(mdp_.num_arms(), mdp_.states());
    for (int arm = 0; arm < mdp_.num_arms(); ++arm)
      for (int j = 0; j < mdp_.states(); ++j)
        m.at(arm, j) = transitions[static_cast<std::size_t>(arm) * mdp_.states() + j];
    return m;
  }

  TabularMdp mdp_;
  std::int64_t total_rounds_;
  double delta_prime_;
  RlOracleOutput last_;
};

}  // namespace cmabmt

#endif  // CMABMT_RL_ENV_HPP
