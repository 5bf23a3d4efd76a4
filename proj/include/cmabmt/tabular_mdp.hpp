#ifndef CMABMT_TABULAR_MDP_HPP
#define CMABMT_TABULAR_MDP_HPP

// Finite-horizon tabular MDP with step-dependent transitions, plus the exact
// planning and evaluation routines the learner and the audits rely on.
// Steps are 0-based throughout: h ranges over [0, H).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmabmt/framework.hpp"
#include "cmabmt/random.hpp"

namespace cmabmt {

class TabularMdp {
 public:
  TabularMdp(int states, int actions, int horizon, int initial_state)
      : states_(states),
        actions_(actions),
        horizon_(horizon),
        initial_state_(initial_state),
        rewards_(static_cast<std::size_t>(states) * actions * horizon, 0.0),
        transitions_(static_cast<std::size_t>(states) * actions * horizon * states, 0.0) {
    if (states < 1 || actions < 1 || horizon < 1)
      throw std::invalid_argument("TabularMdp: S, A, H must be >= 1");
    if (initial_state < 0 || initial_state >= states)
      throw std::invalid_argument("TabularMdp: initial state out of range");
  }

  int states() const { return states_; }
  int actions() const { return actions_; }
  int horizon() const { return horizon_; }
  int initial_state() const { return initial_state_; }

  /// Base-arm index of (s, a, h); shared with the learner's statistics.
  int arm_index(int s, int a, int h) const {
    return (h * states_ + s) * actions_ + a;
  }
  int num_arms() const { return states_ * actions_ * horizon_; }

  double reward(int s, int a, int h) const { return rewards_[static_cast<std::size_t>(arm_index(s, a, h))]; }
  double& reward(int s, int a, int h) { return rewards_[static_cast<std::size_t>(arm_index(s, a, h))]; }

  std::span<const double> transition_row(int s, int a, int h) const {
    return {transitions_.data() + static_cast<std::size_t>(arm_index(s, a, h)) * states_,
            static_cast<std::size_t>(states_)};
  }
  std::span<double> transition_row(int s, int a, int h) {
    return {transitions_.data() + static_cast<std::size_t>(arm_index(s, a, h)) * states_,
            static_cast<std::size_t>(states_)};
  }

  const std::vector<double>& transitions() const { return transitions_; }
  void set_transitions(std::vector<double> transitions) {
    if (transitions.size() != transitions_.size())
      throw std::invalid_argument("TabularMdp: transition table size mismatch");
    transitions_ = std::move(transitions);
  }

  /// Transition rows as a mean matrix over S*A*H arms of dimension S.
  MeanMatrix transition_means() const {
    MeanMatrix m(num_arms(), states_);
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < states_; ++s)
        for (int a = 0; a < actions_; ++a) {
          auto dst = m.row(arm_index(s, a, h));
          auto src = transition_row(s, a, h);
          for (int j = 0; j < states_; ++j) dst[j] = src[j];
        }
    return m;
  }

  void validate() const {
    for (double r : rewards_)
      if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("TabularMdp: reward outside [0,1]");
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < states_; ++s)
        for (int a = 0; a < actions_; ++a) {
          double sum = 0.0;
          for (double p : transition_row(s, a, h)) {
            if (!(p >= 0.0)) throw std::invalid_argument("TabularMdp: negative transition mass");
            sum += p;
          }
          if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
        }
  }

  /// Seeded instance with Dirichlet(1,...,1) transition rows and uniform
  /// rewards; the initial state is 0.
  static TabularMdp generate(int states, int actions, int horizon, std::uint64_t seed) {
    TabularMdp mdp(states, actions, horizon, 0);
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < states; ++s)
        for (int a = 0; a < actions; ++a) {
          const std::uint64_t arm = static_cast<std::uint64_t>(mdp.arm_index(s, a, h));
          CounterRng row_rng = substream(seed, 1, arm);
          auto row = mdp.transition_row(s, a, h);
          double total = 0.0;
          for (int j = 0; j < states; ++j) {
            row[j] = row_rng.exponential();
            total += row[j];
          }
          for (int j = 0; j < states; ++j) row[j] /= total;
          CounterRng reward_rng = substream(seed, 2, arm);
          mdp.reward(s, a, h) = reward_rng.uniform();
        }
    mdp.validate();
    return mdp;
  }

  /// Plain-text format: header "S A H s1", then the reward table (one row of
  /// A values per (h, s), h outermost), then the transition table (one row of
  /// S values per (h, s, a), same ordering). Whitespace-separated decimals.
  static TabularMdp load(std::istream& in) {
    int states = 0, actions = 0, horizon = 0, initial = 0;
    if (!(in >> states >> actions >> horizon >> initial))
      throw std::runtime_error("TabularMdp: malformed header");
    if (states < 1 || actions < 1 || horizon < 1 || initial < 0 || initial >= states)
      throw std::runtime_error("TabularMdp: invalid header values");
    TabularMdp mdp(states, actions, horizon, initial);
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < states; ++s)
        for (int a = 0; a < actions; ++a)
          if (!(in >> mdp.reward(s, a, h))) throw std::runtime_error("TabularMdp: truncated reward table");
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < states; ++s)
        for (int a = 0; a < actions; ++a)
          for (auto& p : mdp.transition_row(s, a, h))
            if (!(in >> p)) throw std::runtime_error("TabularMdp: truncated transition table");
    mdp.validate();
    return mdp;
  }

  static TabularMdp load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TabularMdp: cannot open " + path);
    return load(in);
  }

  void save(std::ostream& out) const {
    out << states_ << ' ' << actions_ << ' ' << horizon_ << ' ' << initial_state_ << '\n';
    char buf[32];
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < states_; ++s) {
        for (int a = 0; a < actions_; ++a) {
          std::snprintf(buf, sizeof buf, "%.17g", reward(s, a, h));
          out << buf << (a + 1 == actions_ ? '\n' : ' ');
        }
      }
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < states_; ++s)
        for (int a = 0; a < actions_; ++a) {
          auto row = transition_row(s, a, h);
          for (int j = 0; j < states_; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            out << buf << (j + 1 == states_ ? '\n' : ' ');
          }
        }
  }

 private:
  int states_, actions_, horizon_, initial_state_;
  std::vector<double> rewards_;      // [(h*S + s)*A + a]
  std::vector<double> transitions_;  // [arm * S + s']
};

/// Deterministic policy: action at (s, h), stored at index h*S + s. The flat
/// table doubles as the learner's action encoding.
struct Policy {
  int states = 0;
  int horizon = 0;
  std::vector<int> table;

  Policy() = default;
  Policy(int s, int h) : states(s), horizon(h), table(static_cast<std::size_t>(s) * h, 0) {}

  int& at(int s, int h) { return table[static_cast<std::size_t>(h) * states + s]; }
  int at(int s, int h) const { return table[static_cast<std::size_t>(h) * states + s]; }

  Action to_action() const { return table; }

  static Policy from_action(const Action& action, int states, int horizon) {
    if (static_cast<int>(action.size()) != states * horizon)
      throw std::invalid_argument("Policy: action has wrong length");
    Policy pi(states, horizon);
    pi.table = action;
    return pi;
  }
};

/// V_h(s) for h in [0, H]; row H is the terminal all-zero row.
struct ValueTable {
  int states = 0;
  int horizon = 0;
  std::vector<double> values;

  ValueTable() = default;
  ValueTable(int s, int h) : states(s), horizon(h), values(static_cast<std::size_t>(s) * (h + 1), 0.0) {}

  double& at(int h, int s) { return values[static_cast<std::size_t>(h) * states + s]; }
  double at(int h, int s) const { return values[static_cast<std::size_t>(h) * states + s]; }

  std::span<const double> step(int h) const {
    return {values.data() + static_cast<std::size_t>(h) * states, static_cast<std::size_t>(states)};
  }

  double initial_value(int initial_state) const { return at(0, initial_state); }
};

/// q(s, a, h): probability of taking a in s at step h.
struct OccupancyTable {
  int states = 0;
  int actions = 0;
  int horizon = 0;
  std::vector<double> mass;

  OccupancyTable() = default;
  OccupancyTable(int s, int a, int h)
      : states(s), actions(a), horizon(h), mass(static_cast<std::size_t>(s) * a * h, 0.0) {}

  double& at(int s, int a, int h) { return mass[static_cast<std::size_t>((h * states + s) * actions + a)]; }
  double at(int s, int a, int h) const {
    return mass[static_cast<std::size_t>((h * states + s) * actions + a)];
  }
};

/// Backward policy evaluation: V_h(s) = r(s, pi(s,h), h) + p(s,pi,h)' V_{h+1}.
inline ValueTable value_of_policy(const TabularMdp& mdp, const Policy& pi) {
  ValueTable v(mdp.states(), mdp.horizon());
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    auto next = v.step(h + 1);
    for (int s = 0; s < mdp.states(); ++s) {
      const int a = pi.at(s, h);
      double q = mdp.reward(s, a, h);
      auto row = mdp.transition_row(s, a, h);
      for (int j = 0; j < mdp.states(); ++j) q += row[j] * next[j];
      v.at(h, s) = q;
    }
  }
  return v;
}

/// Backward induction with a per-state max over actions. The returned policy
/// is greedy with respect to the returned values; argmax ties break toward
/// the lowest action index.
inline std::pair<ValueTable, Policy> optimal_values(const TabularMdp& mdp) {
  ValueTable v(mdp.states(), mdp.horizon());
  Policy pi(mdp.states(), mdp.horizon());
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    auto next = v.step(h + 1);
    for (int s = 0; s < mdp.states(); ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < mdp.actions(); ++a) {
        double q = mdp.reward(s, a, h);
        auto row = mdp.transition_row(s, a, h);
        for (int j = 0; j < mdp.states(); ++j) q += row[j] * next[j];
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      v.at(h, s) = best;
      pi.at(s, h) = best_a;
    }
  }
  return {std::move(v), std::move(pi)};
}

/// Forward dynamic program for visit probabilities under (mdp, pi).
inline OccupancyTable occupancy_measure(const TabularMdp& mdp, const Policy& pi) {
  const int S = mdp.states(), H = mdp.horizon();
  OccupancyTable q(S, mdp.actions(), H);
  std::vector<double> state_mass(static_cast<std::size_t>(S), 0.0);
  state_mass[static_cast<std::size_t>(mdp.initial_state())] = 1.0;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) q.at(s, pi.at(s, h), h) = state_mass[static_cast<std::size_t>(s)];
    if (h + 1 == H) break;
    std::vector<double> next_mass(static_cast<std::size_t>(S), 0.0);
    for (int s = 0; s < S; ++s) {
      const double w = state_mass[static_cast<std::size_t>(s)];
      if (w == 0.0) continue;
      auto row = mdp.transition_row(s, pi.at(s, h), h);
      for (int j = 0; j < S; ++j) next_mass[static_cast<std::size_t>(j)] += w * row[j];
    }
    state_mass = std::move(next_mass);
  }
  return q;
}

struct EpisodeSample {
  std::vector<TriggeredObservation> observations;  // arm (s,a,h) -> one-hot next state
  std::vector<double> realized_rewards;            // Bernoulli draw per step
};

/// Rolls out one episode. The observation at step h is the one-hot next-state
/// vector of the visited (s, a, h) arm. Each draw derives from
/// (seed, round, arm, step).
inline EpisodeSample sample_episode(const TabularMdp& mdp, const Policy& pi, std::uint64_t seed,
                                    std::int64_t round) {
  EpisodeSample out;
  out.observations.reserve(static_cast<std::size_t>(mdp.horizon()));
  out.realized_rewards.reserve(static_cast<std::size_t>(mdp.horizon()));
  int s = mdp.initial_state();
  for (int h = 0; h < mdp.horizon(); ++h) {
    const int a = pi.at(s, h);
    const std::uint64_t arm = static_cast<std::uint64_t>(mdp.arm_index(s, a, h));
    CounterRng transition_rng(seed, {static_cast<std::uint64_t>(round), arm, static_cast<std::uint64_t>(h), 0});
    const int next = transition_rng.categorical(mdp.transition_row(s, a, h));
    TriggeredObservation obs;
    obs.arm = static_cast<int>(arm);
    obs.outcome.assign(static_cast<std::size_t>(mdp.states()), 0.0);
    obs.outcome[static_cast<std::size_t>(next)] = 1.0;
    out.observations.push_back(std::move(obs));
    CounterRng reward_rng(seed, {static_cast<std::uint64_t>(round), arm, static_cast<std::uint64_t>(h), 1});
    out.realized_rewards.push_back(reward_rng.bernoulli(mdp.reward(s, a, h)) ? 1.0 : 0.0);
    s = next;
  }
  return out;
}

/// Occupancy-weighted advantage sum: sum_{s,a,h} q^pi(s,a,h) [V*_h(s) - Q*_h(s,a)].
/// Equals V*_1(s1) - V^pi_1(s1).
inline double performance_difference(const TabularMdp& mdp, const ValueTable& optimal,
                                     const Policy& pi) {
  const OccupancyTable occ = occupancy_measure(mdp, pi);
  double total = 0.0;
  for (int h = 0; h < mdp.horizon(); ++h) {
    auto next = optimal.step(h + 1);
    for (int s = 0; s < mdp.states(); ++s)
      for (int a = 0; a < mdp.actions(); ++a) {
        const double w = occ.at(s, a, h);
        if (w == 0.0) continue;
        double q_star = mdp.reward(s, a, h);
        auto row = mdp.transition_row(s, a, h);
        for (int j = 0; j < mdp.states(); ++j) q_star += row[j] * next[j];
        total += w * (optimal.at(h, s) - q_star);
      }
  }
  return total;
}

struct ValueSmoothnessTerms {
  double lhs = 0.0;        // |V1 difference| between the two transition tables
  double rhs_tight = 0.0;  // occupancy-weighted |(p~ - p)' V^{p~,pi}_{h+1}|
  double rhs_loose = 0.0;  // H * occupancy-weighted L1 distance
};

/// Evaluates both sides of the value-smoothness inequalities for a policy and
/// a pair of transition tables sharing the reward structure:
/// lhs <= rhs_tight <= rhs_loose.
inline ValueSmoothnessTerms value_smoothness_terms(const TabularMdp& mdp, const TabularMdp& tilde_mdp,
                                       const Policy& pi) {
  if (mdp.states() != tilde_mdp.states() || mdp.actions() != tilde_mdp.actions() ||
      mdp.horizon() != tilde_mdp.horizon())
    throw std::invalid_argument("value_smoothness_terms: shape mismatch");
  const ValueTable v_base = value_of_policy(mdp, pi);
  const ValueTable v_tilde = value_of_policy(tilde_mdp, pi);
  const OccupancyTable occ = occupancy_measure(mdp, pi);

  ValueSmoothnessTerms out;
  out.lhs = std::abs(v_tilde.initial_value(mdp.initial_state()) -
                     v_base.initial_value(mdp.initial_state()));
  for (int h = 0; h < mdp.horizon(); ++h) {
    auto tilde_next = v_tilde.step(h + 1);
    for (int s = 0; s < mdp.states(); ++s)
      for (int a = 0; a < mdp.actions(); ++a) {
        const double w = occ.at(s, a, h);
        if (w == 0.0) continue;
        auto base_row = mdp.transition_row(s, a, h);
        auto tilde_row = tilde_mdp.transition_row(s, a, h);
        double inner = 0.0, l1 = 0.0;
        for (int j = 0; j < mdp.states(); ++j) {
          const double diff = tilde_row[j] - base_row[j];
          inner += diff * tilde_next[j];
          l1 += std::abs(diff);
        }
        out.rhs_tight += w * std::abs(inner);
        out.rhs_loose += w * l1;
      }
  }
  out.rhs_loose *= static_cast<double>(mdp.horizon());
  return out;
}

}  // namespace cmabmt

#endif  // CMABMT_TABULAR_MDP_HPP
