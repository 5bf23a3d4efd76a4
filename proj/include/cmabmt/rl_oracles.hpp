#ifndef CMABMT_RL_ORACLES_HPP
#define CMABMT_RL_ORACLES_HPP

// Joint oracles for episodic RL: extended value iteration over per-arm L1
// transition balls, and optimistic/pessimistic value iteration with a
// variance-aware bonus. Both are deterministic: every argmax tie breaks
// toward the lowest index, so identical statistics yield identical policies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmabmt/concentration.hpp"
#include "cmabmt/framework.hpp"
#include "cmabmt/tabular_mdp.hpp"

namespace cmabmt {

namespace detail {

inline int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
  return best;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out += a[i] * b[i];
  return out;
}

}  // namespace detail

/// argmax of p' values over {p in simplex : ||p - p_hat||_1 <= radius}.
/// Raises mass on the best-value state by min(radius/2, 1 - p_hat[best]) and
/// drains the same amount from states in ascending value order. An infinite
/// radius returns the one-hot on the best-value state without reading p_hat.
inline std::vector<double> inner_l1_max(std::span<const double> p_hat,
                                        std::span<const double> values, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("inner_l1_max: negative radius");
  const int n = static_cast<int>(values.size());
  if (n == 0) throw std::invalid_argument("inner_l1_max: empty support");
  const int best = detail::argmax_lowest(values);
  if (std::isinf(radius)) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    out[static_cast<std::size_t>(best)] = 1.0;
    return out;
  }
  if (p_hat.size() != values.size()) throw std::invalid_argument("inner_l1_max: size mismatch");
  check_simplex(p_hat, "inner_l1_max");

  std::vector<double> out(p_hat.begin(), p_hat.end());
  const double add = std::min(radius / 2.0, 1.0 - out[static_cast<std::size_t>(best)]);
  out[static_cast<std::size_t>(best)] += add;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (values[static_cast<std::size_t>(i)] != values[static_cast<std::size_t>(j)])
      return values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(j)];
    return i < j;
  });
  double need = add;
  for (int i : order) {
    if (i == best) continue;
    if (need <= 0.0) break;
    const double take = std::min(out[static_cast<std::size_t>(i)], need);
    out[static_cast<std::size_t>(i)] -= take;
    need -= take;
  }
  return out;
}

/// Per-arm transition estimate extracted from the learner statistics:
/// empirical rows (all-zero when unvisited) plus counters, in the
/// (h*S + s)*A + a arm layout.
struct TransitionEstimate {
  std::vector<double> p_hat;          // arm * S + s'
  std::vector<std::int64_t> counters;  // per arm
};

inline TransitionEstimate transition_estimate(const ArmStatistics& stats, int states) {
  if (stats.dim() != states) throw std::invalid_argument("transition_estimate: dimension mismatch");
  TransitionEstimate est;
  est.p_hat.resize(static_cast<std::size_t>(stats.arms()) * states, 0.0);
  est.counters.resize(static_cast<std::size_t>(stats.arms()), 0);
  for (int arm = 0; arm < stats.arms(); ++arm) {
    est.counters[static_cast<std::size_t>(arm)] = stats.counter(arm);
    auto row = stats.mean_row(arm);
    for (int j = 0; j < states; ++j)
      est.p_hat[static_cast<std::size_t>(arm) * states + static_cast<std::size_t>(j)] = row[j];
  }
  return est;
}

struct RlOracleOutput {
  Policy policy;
  std::vector<double> optimistic_transitions;  // same layout as TabularMdp transitions
  ValueTable v_upper;
  ValueTable v_lower;          // populated by the optimistic/pessimistic oracle only
  std::vector<double> bonus;   // per-arm radius/bonus actually used this pass
};

/// Extended value iteration with explicit per-arm radii. mdp supplies the
/// shape and the known mean rewards; its transition table is ignored.
/// Optimistic values are capped at the remaining-steps bound H - h.
inline RlOracleOutput extended_vi_core(const TabularMdp& mdp, const std::vector<double>& p_hat,
                                       const std::vector<double>& radii) {
  const int S = mdp.states(), A = mdp.actions(), H = mdp.horizon();
  RlOracleOutput out;
  out.policy = Policy(S, H);
  out.v_upper = ValueTable(S, H);
  out.optimistic_transitions.assign(static_cast<std::size_t>(mdp.num_arms()) * S, 0.0);
  out.bonus = radii;

  std::vector<double> q_row(static_cast<std::size_t>(A), 0.0);
  for (int h = H - 1; h >= 0; --h) {
    auto next = out.v_upper.step(h + 1);
    const double cap = static_cast<double>(H - h);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const int arm = mdp.arm_index(s, a, h);
        std::span<const double> hat_row{p_hat.data() + static_cast<std::size_t>(arm) * S,
                                        static_cast<std::size_t>(S)};
        std::vector<double> tilde = inner_l1_max(hat_row, next, radii[static_cast<std::size_t>(arm)]);
        double q = mdp.reward(s, a, h) + detail::dot(tilde, next);
        if (q > cap) q = cap;
        q_row[static_cast<std::size_t>(a)] = q;
        std::copy(tilde.begin(), tilde.end(),
                  out.optimistic_transitions.begin() + static_cast<std::ptrdiff_t>(arm) * S);
      }
      const int best_a = detail::argmax_lowest(q_row);
      out.policy.at(s, h) = best_a;
      out.v_upper.at(h, s) = q_row[static_cast<std::size_t>(best_a)];
    }
  }
  return out;
}

/// Extended value iteration oracle: radii are the L1 deviation bounds
/// sqrt(2 S log(SAHT/delta') / N) with the infinite sentinel at N = 0.
/// delta_prime < 0 selects the default 1/(2T).
inline RlOracleOutput extended_value_iteration(const TabularMdp& mdp, const ArmStatistics& stats,
                                               std::int64_t total_rounds, double delta_prime = -1.0) {
  if (total_rounds < 1) throw std::invalid_argument("extended_value_iteration: T must be >= 1");
  if (delta_prime < 0.0) delta_prime = 1.0 / (2.0 * static_cast<double>(total_rounds));
  const LogTerm ell =
      rl_log_term(mdp.states(), mdp.actions(), mdp.horizon(), total_rounds, delta_prime);
  const TransitionEstimate est = transition_estimate(stats, mdp.states());
  std::vector<double> radii(static_cast<std::size_t>(mdp.num_arms()), 0.0);
  for (int arm = 0; arm < mdp.num_arms(); ++arm)
    radii[static_cast<std::size_t>(arm)] =
        l1_multinoulli_radius(mdp.states(), est.counters[static_cast<std::size_t>(arm)], ell.value());
  return extended_vi_core(mdp, est.p_hat, radii);
}

/// Optimistic/pessimistic value iteration with the variance-aware bonus.
/// Per (s, a, h): with s* the best next state under the upper table, the
/// optimistic row is the one-hot on s* when even that cannot exhaust the
/// bonus, and otherwise the convex combination of the empirical row toward
/// e_{s*} whose expected future value is exactly p_hat' V_upper + bonus.
/// The pessimistic table recurses through the empirical row minus the bonus,
/// floored at 0. Unvisited arms get the infinite bonus, hence maximal
/// optimism and a zero pessimistic backup.
inline RlOracleOutput optimistic_vi_core(const TabularMdp& mdp, const std::vector<double>& p_hat,
                                         const std::vector<std::int64_t>& counters, LogTerm ell) {
  const int S = mdp.states(), A = mdp.actions(), H = mdp.horizon();
  RlOracleOutput out;
  out.policy = Policy(S, H);
  out.v_upper = ValueTable(S, H);
  out.v_lower = ValueTable(S, H);
  out.optimistic_transitions.assign(static_cast<std::size_t>(mdp.num_arms()) * S, 0.0);
  out.bonus.assign(static_cast<std::size_t>(mdp.num_arms()), 0.0);

  std::vector<double> q_row(static_cast<std::size_t>(A), 0.0);
  for (int h = H - 1; h >= 0; --h) {
    auto next_up = out.v_upper.step(h + 1);
    auto next_lo = out.v_lower.step(h + 1);
    const double cap = static_cast<double>(H - h);
    const int s_star = detail::argmax_lowest(next_up);
    const double top = next_up[static_cast<std::size_t>(s_star)];
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const int arm = mdp.arm_index(s, a, h);
        std::span<const double> hat_row{p_hat.data() + static_cast<std::size_t>(arm) * S,
                                        static_cast<std::size_t>(S)};
        const std::int64_t n = counters[static_cast<std::size_t>(arm)];
        const double phi = variance_aware_bonus(hat_row, next_up, next_lo, n, ell, H);
        out.bonus[static_cast<std::size_t>(arm)] = phi;

        auto tilde = std::span<double>{
            out.optimistic_transitions.data() + static_cast<std::size_t>(arm) * S,
            static_cast<std::size_t>(S)};
        const double hat_future = detail::dot(hat_row, next_up);
        double tilde_future;
        if (top < hat_future + phi) {
          std::fill(tilde.begin(), tilde.end(), 0.0);
          tilde[static_cast<std::size_t>(s_star)] = 1.0;
          tilde_future = top;
        } else {
          // top >= hat_future + phi and phi > 0, so the denominator is positive.
          const double lambda = phi / (top - hat_future);
          for (int j = 0; j < S; ++j) tilde[static_cast<std::size_t>(j)] = (1.0 - lambda) * hat_row[j];
          tilde[static_cast<std::size_t>(s_star)] += lambda;
          tilde_future = hat_future + phi;
        }
        double q = mdp.reward(s, a, h) + tilde_future;
        if (q > cap) q = cap;
        q_row[static_cast<std::size_t>(a)] = q;
      }
      const int best_a = detail::argmax_lowest(q_row);
      out.policy.at(s, h) = best_a;
      out.v_upper.at(h, s) = q_row[static_cast<std::size_t>(best_a)];
    }
    for (int s = 0; s < S; ++s) {
      const int a = out.policy.at(s, h);
      const int arm = mdp.arm_index(s, a, h);
      std::span<const double> hat_row{p_hat.data() + static_cast<std::size_t>(arm) * S,
                                      static_cast<std::size_t>(S)};
      const double pessimistic = mdp.reward(s, a, h) + detail::dot(hat_row, next_lo) -
                                 out.bonus[static_cast<std::size_t>(arm)];
      out.v_lower.at(h, s) = std::max(pessimistic, 0.0);
    }
  }
  return out;
}

/// Optimistic value iteration oracle; delta_prime < 0 selects the default
/// 1/(8T). The bonus log factor is L = log(SAHT/delta').
inline RlOracleOutput optimistic_value_iteration(const TabularMdp& mdp, const ArmStatistics& stats,
                                                 std::int64_t total_rounds,
                                                 double delta_prime = -1.0) {
  if (total_rounds < 1) throw std::invalid_argument("optimistic_value_iteration: T must be >= 1");
  if (delta_prime < 0.0) delta_prime = 1.0 / (8.0 * static_cast<double>(total_rounds));
  const LogTerm ell =
      rl_log_term(mdp.states(), mdp.actions(), mdp.horizon(), total_rounds, delta_prime);
  const TransitionEstimate est = transition_estimate(stats, mdp.states());
  return optimistic_vi_core(mdp, est.p_hat, est.counters, ell);
}

}  // namespace cmabmt

#endif  // CMABMT_RL_ORACLES_HPP
