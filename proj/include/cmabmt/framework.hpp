#ifndef CMABMT_FRAMEWORK_HPP
#define CMABMT_FRAMEWORK_HPP

// Combinatorial bandit data model with multivariant, probabilistically
// triggered arms, and the optimistic learner loop. Environments and joint
// oracles are abstract interfaces so the same loop drives every application.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmabmt {

/// Sentinel for "the confidence region is the whole parameter space". Used
/// whenever an arm has never been observed.
inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

/// m rows of d entries each, every entry a probability in [0, 1]. Holds the
/// unknown parameter, its empirical estimate, and optimistic surrogates.
class MeanMatrix {
 public:
  MeanMatrix() = default;
  MeanMatrix(int arms, int dim, double fill = 0.0)
      : arms_(arms), dim_(dim), data_(static_cast<std::size_t>(arms) * dim, fill) {
    if (arms < 0 || dim < 0) throw std::invalid_argument("MeanMatrix: negative shape");
  }

  int arms() const { return arms_; }
  int dim() const { return dim_; }

  double& at(int arm, int j) { return data_[index(arm, j)]; }
  double at(int arm, int j) const { return data_[index(arm, j)]; }

  std::span<double> row(int arm) { return {data_.data() + index(arm, 0), static_cast<std::size_t>(dim_)}; }
  std::span<const double> row(int arm) const {
    return {data_.data() + index(arm, 0), static_cast<std::size_t>(dim_)};
  }

  /// Entries must lie in [0, 1]; simplex rows must additionally sum to 1
  /// within 1e-9.
  void validate(bool simplex_rows) const {
    for (int i = 0; i < arms_; ++i) {
      double sum = 0.0;
      for (int j = 0; j < dim_; ++j) {
        const double v = at(i, j);
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("MeanMatrix: entry outside [0,1]");
        sum += v;
      }
      if (simplex_rows && std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("MeanMatrix: simplex row does not sum to 1");
    }
  }

 private:
  std::size_t index(int arm, int j) const {
    return static_cast<std::size_t>(arm) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j);
  }

  int arms_ = 0;
  int dim_ = 0;
  std::vector<double> data_;
};

/// One revealed outcome: the arm that was triggered and its d-dimensional
/// observation, entries in [0, 1] (a one-hot vector for categorical arms).
struct TriggeredObservation {
  int arm = 0;
  std::vector<double> outcome;
};

/// Per-arm trigger counters and incrementally maintained empirical means.
/// Unobserved arms keep the all-zero mean row.
class ArmStatistics {
 public:
  ArmStatistics() = default;
  ArmStatistics(int arms, int dim) : counters_(arms, 0), means_(arms, dim) {}

  int arms() const { return means_.arms(); }
  int dim() const { return means_.dim(); }

  std::int64_t counter(int arm) const { return counters_.at(static_cast<std::size_t>(arm)); }
  std::span<const double> mean_row(int arm) const { return means_.row(arm); }
  const MeanMatrix& empirical_means() const { return means_; }

  /// Applies one round of feedback. Each arm may appear at most once per
  /// round; a duplicate marks the round as malformed and is rejected.
  void update(std::span<const TriggeredObservation> observations) {
    for (std::size_t i = 0; i < observations.size(); ++i) {
      const auto& obs = observations[i];
      if (obs.arm < 0 || obs.arm >= arms())
        throw std::invalid_argument("ArmStatistics: arm index out of range");
      if (static_cast<int>(obs.outcome.size()) != dim())
        throw std::invalid_argument("ArmStatistics: outcome dimension mismatch");
      for (double v : obs.outcome)
        if (!(v >= 0.0 && v <= 1.0))
          throw std::invalid_argument("ArmStatistics: outcome entry outside [0,1]");
      for (std::size_t j = 0; j < i; ++j)
        if (observations[j].arm == obs.arm)
          throw std::invalid_argument("ArmStatistics: duplicate arm in one round");
    }
    for (const auto& obs : observations) {
      const std::int64_t n = ++counters_[static_cast<std::size_t>(obs.arm)];
      auto row = means_.row(obs.arm);
      for (int j = 0; j < dim(); ++j) row[j] += (obs.outcome[static_cast<std::size_t>(j)] - row[j]) / static_cast<double>(n);
    }
  }

 private:
  std::vector<std::int64_t> counters_;
  MeanMatrix means_;
};

/// Value-returning form of the statistics update.
inline ArmStatistics update_statistics(ArmStatistics stats,
                                       const std::vector<TriggeredObservation>& observations) {
  stats.update(observations);
  return stats;
}

/// Coefficients of the two-term confidence radius: one scale for the
/// 1/sqrt(n) term and one for the 1/n term.
struct RadiusParams {
  double sqrt_coeff = 0.0;
  double recip_coeff = 0.0;
};

/// sqrt_coeff/sqrt(n) + recip_coeff/n; unvisited arms get the infinite
/// sentinel.
inline double confidence_radius(const RadiusParams& params, std::int64_t n) {
  if (params.sqrt_coeff < 0.0 || params.recip_coeff < 0.0)
    throw std::invalid_argument("confidence_radius: negative coefficient");
  if (n < 0) throw std::invalid_argument("confidence_radius: negative counter");
  if (n == 0) return kInfiniteRadius;
  const double dn = static_cast<double>(n);
  return params.sqrt_coeff / std::sqrt(dn) + params.recip_coeff / dn;
}

/// Combinatorial action, encoded per environment: a flattened policy table
/// for episodic RL, a set of source indices for coverage.
using Action = std::vector<int>;

struct RoundRecord {
  std::int64_t round = 0;  // 1-based
  Action action;
  std::vector<TriggeredObservation> observations;
  double realized_reward = 0.0;  // sampled return; regret never uses it
  double instant_regret = 0.0;
  double cum_regret = 0.0;
  bool optimism_held = true;
  bool truth_in_region = true;
};

struct Trace {
  std::vector<RoundRecord> rounds;
};

struct RoundFeedback {
  std::vector<TriggeredObservation> observations;
  double realized_reward = 0.0;  // sampled return; recorded, never learned from
};

/// A stochastic environment with exact evaluation machinery. The exact
/// evaluators read the true parameter and exist for regret accounting and
/// audits; the learner itself only ever sees triggered observations.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int num_arms() const = 0;
  virtual int outcome_dim() const = 0;
  virtual std::string kind() const = 0;
  virtual bool is_feasible(const Action& action) const = 0;
  virtual std::string describe_feasible() const = 0;

  /// Plays the action; draws derive from (seed, round, arm, step) only.
  virtual RoundFeedback sample_round(const Action& action, std::uint64_t seed,
                                     std::int64_t round) const = 0;

  virtual double exact_expected_reward(const Action& action) const = 0;
  virtual double optimal_value() const = 0;
  virtual double alpha() const = 0;

  /// True parameter; audit plane only.
  virtual const MeanMatrix& true_means() const = 0;
};

/// An (action, optimistic parameter) pair plus the oracle's own value for it.
struct Proposal {
  Action action;
  MeanMatrix optimistic_means;
  double optimistic_value = 0.0;
};

/// Joint action-parameter oracle: proposes the optimistic pair for the
/// current statistics. Deterministic given (stats, round).
class JointOracle {
 public:
  virtual ~JointOracle() = default;

  virtual Proposal propose(const ArmStatistics& stats, std::int64_t round) = 0;

  /// Whether the true parameter lies in this round's confidence region.
  /// Audit plane; call with the same stats as the immediately preceding
  /// propose() since some regions depend on quantities computed there.
  virtual bool truth_in_region(const ArmStatistics& stats, const MeanMatrix& truth) const = 0;
};

struct RunOptions {
  bool audit = true;  // per-round truth/optimism flags (reads the true parameter)
};

/// The optimistic learner loop: propose, play, observe, update. Regret is
/// measured against alpha times the optimal expected reward using the exact
/// evaluator, never sampled returns. Identical (env, oracle, T, seed) inputs
/// produce bit-identical traces.
inline Trace run_cucb_mt(Environment& env, JointOracle& oracle, std::int64_t horizon_rounds,
                         std::uint64_t seed, const RunOptions& options = {}) {
  if (horizon_rounds < 1) throw std::invalid_argument("run_cucb_mt: horizon must be >= 1");
  ArmStatistics stats(env.num_arms(), env.outcome_dim());
  const double target = env.alpha() * env.optimal_value();

  Trace trace;
  trace.rounds.reserve(static_cast<std::size_t>(horizon_rounds));
  double cum = 0.0;
  for (std::int64_t t = 1; t <= horizon_rounds; ++t) {
    Proposal proposal = oracle.propose(stats, t);
    if (proposal.optimistic_means.arms() != env.num_arms() ||
        proposal.optimistic_means.dim() != env.outcome_dim())
      throw std::logic_error("run_cucb_mt: oracle and environment disagree on (m, d)");
    if (!env.is_feasible(proposal.action))
      throw std::runtime_error("run_cucb_mt: oracle proposed an infeasible action at round " +
                               std::to_string(t) + "; feasible actions are " +
                               env.describe_feasible());

    RoundRecord rec;
    rec.round = t;
    if (options.audit) {
      rec.truth_in_region = oracle.truth_in_region(stats, env.true_means());
      rec.optimism_held = proposal.optimistic_value >= target - 1e-9;
    }

    RoundFeedback feedback = env.sample_round(proposal.action, seed, t);
    rec.realized_reward = feedback.realized_reward;
    rec.instant_regret = target - env.exact_expected_reward(proposal.action);
    cum += rec.instant_regret;
    rec.cum_regret = cum;

    stats.update(feedback.observations);
    rec.action = std::move(proposal.action);
    rec.observations = std::move(feedback.observations);
    trace.rounds.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace cmabmt

#endif  // CMABMT_FRAMEWORK_HPP
