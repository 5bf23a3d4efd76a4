#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cmabmt/rl_env.hpp"
#include "cmabmt/rl_oracles.hpp"

using namespace cmabmt;

namespace {

/// All simplex grid points with entries that are multiples of 1/steps.
void enumerate_simplex_grid(int dim, int steps, std::vector<std::vector<double>>& out) {
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  auto walk = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == dim - 1) {
      current[static_cast<std::size_t>(pos)] = remaining;
      std::vector<double> point(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i)
        point[static_cast<std::size_t>(i)] =
            static_cast<double>(current[static_cast<std::size_t>(i)]) / steps;
      out.push_back(std::move(point));
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      current[static_cast<std::size_t>(pos)] = take;
      self(self, pos + 1, remaining - take);
    }
  };
  walk(walk, 0, steps);
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

/// Snaps a random simplex row onto the 1/steps grid (largest remainders).
std::vector<double> random_grid_row(int dim, int steps, CounterRng& rng) {
  std::vector<double> raw(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (auto& v : raw) {
    v = rng.exponential();
    total += v;
  }
  std::vector<int> units(static_cast<std::size_t>(dim));
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int i = 0; i < dim; ++i) {
    const double exact = raw[static_cast<std::size_t>(i)] / total * steps;
    units[static_cast<std::size_t>(i)] = static_cast<int>(exact);
    assigned += units[static_cast<std::size_t>(i)];
    remainders.push_back({exact - units[static_cast<std::size_t>(i)], i});
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < steps - assigned; ++i) ++units[static_cast<std::size_t>(remainders[static_cast<std::size_t>(i)].second)];
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) row[static_cast<std::size_t>(i)] = static_cast<double>(units[static_cast<std::size_t>(i)]) / steps;
  return row;
}

}  // namespace

TEST_CASE("inner_l1_max closed-form cases") {
  const std::vector<double> p_hat{0.5, 0.5};
  const std::vector<double> values{1.0, 0.0};

  const auto shifted = inner_l1_max(p_hat, values, 0.4);
  CHECK(shifted[0] == Catch::Approx(0.7).margin(1e-12));
  CHECK(shifted[1] == Catch::Approx(0.3).margin(1e-12));

  // Full-ball and infinite cases collapse onto the best-value one-hot.
  const auto full = inner_l1_max(p_hat, values, 2.0);
  CHECK(full[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(full[1] == Catch::Approx(0.0).margin(1e-12));
  const auto infinite = inner_l1_max(p_hat, values, kInfiniteRadius);
  CHECK(infinite == std::vector<double>{1.0, 0.0});

  // Zero radius is the identity.
  CHECK(inner_l1_max(p_hat, values, 0.0) == p_hat);

  CHECK_THROWS_AS(inner_l1_max(p_hat, values, -0.1), std::invalid_argument);
}

TEST_CASE("inner_l1_max matches grid search") {
  std::vector<std::vector<double>> grid2;
  enumerate_simplex_grid(2, 1000, grid2);
  REQUIRE(grid2.size() == 1001);

  CounterRng rng(7001);
  for (int trial = 0; trial < 60; ++trial) {
    const std::vector<double> p_hat = random_grid_row(2, 1000, rng);
    std::vector<double> values{5.0 * rng.uniform(), 5.0 * rng.uniform()};
    const double radius = 2.0 * rng.uniform();

    double best = -1.0;
    for (const auto& p : grid2)
      if (l1_distance(p, p_hat) <= radius + 1e-12)
        best = std::max(best, p[0] * values[0] + p[1] * values[1]);

    const auto maximizer = inner_l1_max(p_hat, values, radius);
    const double achieved = maximizer[0] * values[0] + maximizer[1] * values[1];
    CHECK(achieved >= best - 1e-9);          // the grid cannot beat the exact maximizer
    CHECK(achieved <= best + 2e-3 * 5.0);    // and must be within one grid cell of it
    CHECK(l1_distance(maximizer, p_hat) <= radius + 1e-9);
    double mass = std::accumulate(maximizer.begin(), maximizer.end(), 0.0);
    CHECK(mass == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("extended VI with zero radii reduces to exact planning") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TabularMdp mdp = TabularMdp::generate(3, 2, 3, seed * 13);
    const std::vector<double> radii(static_cast<std::size_t>(mdp.num_arms()), 0.0);
    const RlOracleOutput out = extended_vi_core(mdp, mdp.transitions(), radii);
    const auto [v_star, pi_star] = optimal_values(mdp);
    for (int h = 0; h <= mdp.horizon(); ++h)
      for (int s = 0; s < mdp.states(); ++s)
        CHECK(out.v_upper.at(h, s) == Catch::Approx(v_star.at(h, s)).margin(1e-12));
    CHECK(out.policy.table == pi_star.table);
  }
}

TEST_CASE("extended VI with empty statistics equals the optimistic-chain DP") {
  const TabularMdp mdp = TabularMdp::generate(3, 2, 3, 606);
  ArmStatistics stats(mdp.num_arms(), mdp.states());
  const RlOracleOutput out = extended_value_iteration(mdp, stats, 100);

  // Independent recursion: with every ball unconstrained, each (s, a) sends
  // all mass to the best next state.
  std::vector<std::vector<double>> v(static_cast<std::size_t>(mdp.horizon()) + 1,
                                     std::vector<double>(static_cast<std::size_t>(mdp.states()), 0.0));
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    const double best_next =
        *std::max_element(v[static_cast<std::size_t>(h + 1)].begin(), v[static_cast<std::size_t>(h + 1)].end());
    for (int s = 0; s < mdp.states(); ++s) {
      double best = 0.0;
      for (int a = 0; a < mdp.actions(); ++a) best = std::max(best, mdp.reward(s, a, h) + best_next);
      v[static_cast<std::size_t>(h)][static_cast<std::size_t>(s)] = best;
    }
  }
  for (int h = 0; h < mdp.horizon(); ++h)
    for (int s = 0; s < mdp.states(); ++s)
      CHECK(out.v_upper.at(h, s) ==
            Catch::Approx(v[static_cast<std::size_t>(h)][static_cast<std::size_t>(s)]).margin(1e-12));
}

TEST_CASE("extended VI on a single-state chain maximizes per-step reward") {
  TabularMdp mdp(1, 3, 4, 0);
  CounterRng rng(12);
  double expected = 0.0;
  for (int h = 0; h < 4; ++h) {
    double best = 0.0;
    for (int a = 0; a < 3; ++a) {
      mdp.reward(0, a, h) = rng.uniform();
      mdp.transition_row(0, a, h)[0] = 1.0;
      best = std::max(best, mdp.reward(0, a, h));
    }
    expected += best;
  }
  ArmStatistics stats(mdp.num_arms(), 1);
  const RlOracleOutput out = extended_value_iteration(mdp, stats, 50);
  CHECK(out.v_upper.initial_value(0) == Catch::Approx(expected).margin(1e-12));
  for (int h = 0; h < 4; ++h) {
    int best_a = 0;
    for (int a = 1; a < 3; ++a)
      if (mdp.reward(0, a, h) > mdp.reward(0, best_a, h)) best_a = a;
    CHECK(out.policy.at(0, h) == best_a);
  }
}

TEST_CASE("optimistic VI with a constant upper table takes the one-hot branch") {
  // H = 1: the future table is identically zero, so every (s, a) pins its
  // optimistic row on the lowest state and the Q value is the reward itself.
  TabularMdp mdp(2, 2, 1, 0);
  mdp.reward(0, 0, 0) = 0.3;
  mdp.reward(0, 1, 0) = 0.8;
  mdp.reward(1, 0, 0) = 0.5;
  mdp.reward(1, 1, 0) = 0.2;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) mdp.transition_row(s, a, 0)[s] = 1.0;

  ArmStatistics stats(mdp.num_arms(), 2);
  std::vector<TriggeredObservation> round;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      TriggeredObservation obs;
      obs.arm = mdp.arm_index(s, a, 0);
      obs.outcome = {s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0};
      round.push_back(obs);
    }
  stats.update(round);

  const RlOracleOutput out = optimistic_value_iteration(mdp, stats, 10);
  CHECK(out.policy.at(0, 0) == 1);
  CHECK(out.policy.at(1, 0) == 0);
  CHECK(out.v_upper.at(0, 0) == Catch::Approx(0.8).margin(1e-12));
  for (int arm = 0; arm < mdp.num_arms(); ++arm) {
    CHECK(out.optimistic_transitions[static_cast<std::size_t>(arm) * 2] == 1.0);
    CHECK(out.optimistic_transitions[static_cast<std::size_t>(arm) * 2 + 1] == 0.0);
  }
}

TEST_CASE("optimistic VI sandwiches the optimum under exact statistics") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TabularMdp mdp = TabularMdp::generate(3, 2, 3, seed * 101);
    const LogTerm ell = rl_log_term(3, 2, 3, 100, 1.0 / 800.0);
    std::vector<std::int64_t> counters(static_cast<std::size_t>(mdp.num_arms()),
                                       static_cast<std::int64_t>(40));
    const RlOracleOutput out = optimistic_vi_core(mdp, mdp.transitions(), counters, ell);
    const ValueTable v_star = optimal_values(mdp).first;
    for (int h = 0; h <= mdp.horizon(); ++h)
      for (int s = 0; s < mdp.states(); ++s) {
        CHECK(out.v_lower.at(h, s) <= v_star.at(h, s) + 1e-9);
        CHECK(v_star.at(h, s) <= out.v_upper.at(h, s) + 1e-9);
      }
  }
}

TEST_CASE("optimistic rows attain exactly the clipped future value") {
  CounterRng rng(31337);
  for (int trial = 0; trial < 30; ++trial) {
    const TabularMdp mdp = TabularMdp::generate(3, 2, 3, 7000 + static_cast<std::uint64_t>(trial));
    const LogTerm ell = rl_log_term(3, 2, 3, 200, 1.0 / 1600.0);
    std::vector<std::int64_t> counters(static_cast<std::size_t>(mdp.num_arms()));
    for (auto& c : counters) c = 1 + static_cast<std::int64_t>(rng.next_u64() % 200);
    // Empirical rows from an unrelated instance so they differ from truth.
    const std::vector<double> p_hat =
        TabularMdp::generate(3, 2, 3, 9000 + static_cast<std::uint64_t>(trial)).transitions();
    const RlOracleOutput out = optimistic_vi_core(mdp, p_hat, counters, ell);

    for (int h = 0; h < mdp.horizon(); ++h) {
      auto next = out.v_upper.step(h + 1);
      double top = next[0];
      for (int s = 1; s < mdp.states(); ++s) top = std::max(top, next[static_cast<std::size_t>(s)]);
      for (int s = 0; s < mdp.states(); ++s)
        for (int a = 0; a < mdp.actions(); ++a) {
          const int arm = mdp.arm_index(s, a, h);
          std::span<const double> hat{p_hat.data() + static_cast<std::size_t>(arm) * 3, 3};
          std::span<const double> tilde{out.optimistic_transitions.data() + static_cast<std::size_t>(arm) * 3, 3};
          double hat_future = 0.0, tilde_future = 0.0;
          for (int j = 0; j < 3; ++j) {
            hat_future += hat[static_cast<std::size_t>(j)] * next[static_cast<std::size_t>(j)];
            tilde_future += tilde[static_cast<std::size_t>(j)] * next[static_cast<std::size_t>(j)];
          }
          const double expected = std::min(hat_future + out.bonus[static_cast<std::size_t>(arm)], top);
          CHECK(tilde_future == Catch::Approx(expected).margin(1e-10));
        }
    }
  }
}

TEST_CASE("optimistic VI with empty statistics is maximally optimistic") {
  const TabularMdp mdp = TabularMdp::generate(3, 2, 2, 99);
  ArmStatistics stats(mdp.num_arms(), mdp.states());
  const RlOracleOutput out = optimistic_value_iteration(mdp, stats, 100);
  for (int arm = 0; arm < mdp.num_arms(); ++arm) {
    CHECK(std::isinf(out.bonus[static_cast<std::size_t>(arm)]));
    double mass = 0.0;
    int ones = 0;
    for (int j = 0; j < mdp.states(); ++j) {
      const double v = out.optimistic_transitions[static_cast<std::size_t>(arm) * mdp.states() + j];
      mass += v;
      ones += v == 1.0 ? 1 : 0;
    }
    CHECK(mass == 1.0);
    CHECK(ones == 1);
  }
  for (int h = 0; h < mdp.horizon(); ++h)
    for (int s = 0; s < mdp.states(); ++s) CHECK(out.v_lower.at(h, s) == 0.0);
}

TEST_CASE("optimistic values respect the remaining-steps cap") {
  CounterRng rng(515151);
  for (int trial = 0; trial < 20; ++trial) {
    const TabularMdp mdp = TabularMdp::generate(3, 2, 4, 300 + static_cast<std::uint64_t>(trial));
    std::vector<std::int64_t> counters(static_cast<std::size_t>(mdp.num_arms()));
    for (auto& c : counters) c = static_cast<std::int64_t>(rng.next_u64() % 4);  // includes zeros
    std::vector<double> p_hat(static_cast<std::size_t>(mdp.num_arms()) * mdp.states(), 0.0);
    for (int arm = 0; arm < mdp.num_arms(); ++arm)
      if (counters[static_cast<std::size_t>(arm)] > 0)
        p_hat[static_cast<std::size_t>(arm) * mdp.states()] = 1.0;  // visited arms: a valid row
    const RlOracleOutput out =
        optimistic_vi_core(mdp, p_hat, counters, rl_log_term(3, 2, 4, 100, 1.0 / 800.0));
    for (int h = 0; h <= mdp.horizon(); ++h)
      for (int s = 0; s < mdp.states(); ++s) {
        CHECK(out.v_upper.at(h, s) <= static_cast<double>(mdp.horizon() - h) + 1e-12);
        CHECK(out.v_lower.at(h, s) <= out.v_upper.at(h, s) + 1e-12);
      }
  }
}

TEST_CASE("oracle adapters are deterministic and region checks hold at truth") {
  const TabularMdp mdp = TabularMdp::generate(3, 2, 3, 2025);
  EpisodicRlEnvironment env(mdp);

  ExtendedViOracle evi(mdp, 50);
  OptimisticViOracle ovi(mdp, 50);
  ArmStatistics stats(env.num_arms(), env.outcome_dim());
  const Proposal pa = evi.propose(stats, 1);
  const Proposal pb = evi.propose(stats, 1);
  CHECK(pa.action == pb.action);
  const Proposal pc = ovi.propose(stats, 1);
  CHECK(pc.action.size() == pa.action.size());

  // With no observations every region is vacuously satisfied.
  CHECK(evi.truth_in_region(stats, env.true_means()));
  CHECK(ovi.truth_in_region(stats, env.true_means()));
}
