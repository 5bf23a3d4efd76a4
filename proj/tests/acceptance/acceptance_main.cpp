// Acceptance suite: one pass/fail line per criterion, exit 0 only when every
// criterion holds at its stated tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmabmt/experiment.hpp"

using namespace cmabmt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

// --- criterion 1: exact planning against brute-force policy enumeration ----

std::vector<Policy> enumerate_policies(const TabularMdp& mdp) {
  const int cells = mdp.states() * mdp.horizon();
  std::vector<Policy> out;
  Policy pi(mdp.states(), mdp.horizon());
  while (true) {
    out.push_back(pi);
    int i = 0;
    for (; i < cells; ++i) {
      if (++pi.table[static_cast<std::size_t>(i)] < mdp.actions()) break;
      pi.table[static_cast<std::size_t>(i)] = 0;
    }
    if (i == cells) return out;
  }
}

Outcome criterion_planning() {
  const double start = now_seconds();
  int failures = 0;
  CounterRng dims_rng(11);
  for (int i = 0; i < 50; ++i) {
    const int S = 1 + static_cast<int>(dims_rng.next_u64() % 3);
    const int A = 1 + static_cast<int>(dims_rng.next_u64() % 2);
    const int H = 1 + static_cast<int>(dims_rng.next_u64() % 3);
    const TabularMdp mdp = TabularMdp::generate(S, A, H, 100 + static_cast<std::uint64_t>(i));
    const auto [v_star, pi_star] = optimal_values(mdp);
    double brute = 0.0;
    for (const Policy& pi : enumerate_policies(mdp))
      brute = std::max(brute, value_of_policy(mdp, pi).initial_value(mdp.initial_state()));
    if (std::abs(v_star.initial_value(mdp.initial_state()) - brute) > 1e-10) ++failures;
    if (std::abs(value_of_policy(mdp, pi_star).initial_value(mdp.initial_state()) - brute) > 1e-10)
      ++failures;
  }
  const double elapsed = now_seconds() - start;
  return {failures == 0 && elapsed < 5.0,
          format("50 MDPs, %d mismatches, %.2f s (budget 5 s)", failures, elapsed)};
}

// --- criterion 2: occupancy identities ------------------------------------

Outcome criterion_occupancy() {
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const TabularMdp mdp = TabularMdp::generate(3, 2, 3, 500 + static_cast<std::uint64_t>(i));
    Policy pi(3, 3);
    CounterRng rng(600 + static_cast<std::uint64_t>(i));
    for (auto& a : pi.table) a = static_cast<int>(rng.next_u64() % 2);
    const OccupancyTable q = occupancy_measure(mdp, pi);
    for (int h = 0; h < 3; ++h) {
      double mass = 0.0;
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) mass += q.at(s, a, h);
      if (std::abs(mass - 1.0) > 1e-10) ++failures;
    }
    double reward_mass = 0.0;
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) reward_mass += q.at(s, a, h) * mdp.reward(s, a, h);
    if (std::abs(reward_mass - value_of_policy(mdp, pi).initial_value(0)) > 1e-10) ++failures;
  }
  return {failures == 0, format("100 (MDP, policy) pairs, %d identity failures", failures)};
}

// --- criterion 3: smoothness audits ----------------------------------------

Outcome criterion_smoothness() {
  const SmoothnessAudit rl = run_value_smoothness_audit(3, 2, 3, 10000, 2001);
  const PmcBoundAudit pmc = run_pmc_bound_audit(6, 4, 3, 10000, 2002);
  const int violations = rl.tight_violations + rl.loose_violations + pmc.smoothness_violations +
                         pmc.dominance_violations + pmc.submodularity_violations;
  return {violations == 0,
          format("10^4 RL triples + 10^4 coverage triples, %d violations", violations)};
}

// --- criterion 4: concentration coverage -----------------------------------

Outcome criterion_concentration() {
  const int trials = 10000;
  const double delta = 0.05;
  const double threshold = delta + 2.0 * std::sqrt(delta * (1.0 - delta) / trials);

  // L1 deviation of an empirical categorical distribution.
  const std::vector<double> p3{0.5, 0.3, 0.2};
  const int n_l1 = 60;
  const double l1_radius = l1_multinoulli_radius(3, n_l1, std::log(2.0 / delta));
  CounterRng rng_a(3001);
  int l1_violations = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> hat(3, 0.0);
    for (int i = 0; i < n_l1; ++i) hat[static_cast<std::size_t>(rng_a.categorical(p3))] += 1.0;
    double l1 = 0.0;
    for (int j = 0; j < 3; ++j) l1 += std::abs(hat[static_cast<std::size_t>(j)] / n_l1 - p3[static_cast<std::size_t>(j)]);
    if (l1 > l1_radius) ++l1_violations;
  }

  // Bernstein bound for one Bernoulli entry, using the true p.
  const double p_entry = 0.2;
  const int n_bern = 100;
  const double bern_radius = bernstein_entry_radius(p_entry, n_bern, 2.0 * std::log(2.0 / delta));
  CounterRng rng_b(3002);
  int bern_violations = 0;
  for (int t = 0; t < trials; ++t) {
    int hits = 0;
    for (int i = 0; i < n_bern; ++i) hits += rng_b.bernoulli(p_entry) ? 1 : 0;
    if (std::abs(static_cast<double>(hits) / n_bern - p_entry) > bern_radius) ++bern_violations;
  }

  // Variance-aware bonus evaluated with the true optimal future values.
  const std::vector<double> v_star{0.0, 1.4, 2.6};
  const int n_var = 80;
  const int horizon = 3;
  const LogTerm ell(std::log(2.0 / delta));
  CounterRng rng_c(3003);
  int var_violations = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> hat(3, 0.0);
    for (int i = 0; i < n_var; ++i) hat[static_cast<std::size_t>(rng_c.categorical(p3))] += 1.0;
    for (auto& v : hat) v /= n_var;
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) inner += (hat[static_cast<std::size_t>(j)] - p3[static_cast<std::size_t>(j)]) * v_star[static_cast<std::size_t>(j)];
    if (std::abs(inner) > variance_aware_bonus(hat, v_star, v_star, n_var, ell, horizon))
      ++var_violations;
  }

  const double l1_rate = static_cast<double>(l1_violations) / trials;
  const double bern_rate = static_cast<double>(bern_violations) / trials;
  const double var_rate = static_cast<double>(var_violations) / trials;
  const bool pass = l1_rate <= threshold && bern_rate <= threshold && var_rate <= threshold;
  return {pass, format("violation rates: L1 %.4f, Bernstein %.4f, variance-aware %.4f "
                       "(threshold %.4f)",
                       l1_rate, bern_rate, var_rate, threshold)};
}

// --- criterion 5: optimism sandwich ----------------------------------------

Outcome criterion_sandwich() {
  const TabularMdp mdp = TabularMdp::generate(3, 2, 3, 4004);
  const std::int64_t rounds = 500;
  const int runs = 200;
  const RlOptimismAudit opt = run_rl_optimism_audit(mdp, OracleKind::optimistic_vi, rounds, runs, 4040);
  const double rate = static_cast<double>(opt.runs_with_sandwich_violation) / runs;
  const double delta = 1.0 / static_cast<double>(rounds);  // 8 * delta' with delta' = 1/(8T)
  const double threshold = delta + 2.0 * std::sqrt(delta * (1.0 - delta) / runs);

  const RlOptimismAudit evi = run_rl_optimism_audit(mdp, OracleKind::extended_vi, rounds, 50, 4050);
  const bool pass = rate <= threshold && evi.conditional_optimism_failures == 0;
  return {pass, format("sandwich-violating runs %.4f of %d (threshold %.4f); "
                       "conditional optimism failures %lld of %lld rounds",
                       rate, runs, threshold,
                       static_cast<long long>(evi.conditional_optimism_failures),
                       static_cast<long long>(evi.rounds_checked))};
}

// --- criterion 6: inner maximizers against grid oracles ---------------------

void enumerate_simplex_grid(int dim, int steps, std::vector<std::vector<double>>& out) {
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  auto walk = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == dim - 1) {
      current[static_cast<std::size_t>(pos)] = remaining;
      std::vector<double> point(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i)
        point[static_cast<std::size_t>(i)] = static_cast<double>(current[static_cast<std::size_t>(i)]) / steps;
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

std::vector<double> random_grid_row(int dim, int steps, CounterRng& rng) {
  std::vector<double> raw(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (auto& v : raw) {
    v = rng.exponential();
    total += v;
  }
  std::vector<int> units(static_cast<std::size_t>(dim));
  std::vector<std::pair<double, int>> rem;
  int assigned = 0;
  for (int i = 0; i < dim; ++i) {
    const double exact = raw[static_cast<std::size_t>(i)] / total * steps;
    units[static_cast<std::size_t>(i)] = static_cast<int>(exact);
    assigned += units[static_cast<std::size_t>(i)];
    rem.push_back({exact - units[static_cast<std::size_t>(i)], i});
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < steps - assigned; ++i) ++units[static_cast<std::size_t>(rem[static_cast<std::size_t>(i)].second)];
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i)
    row[static_cast<std::size_t>(i)] = static_cast<double>(units[static_cast<std::size_t>(i)]) / steps;
  return row;
}

Outcome criterion_grid_oracles() {
  const int steps = 1000;
  std::vector<std::vector<double>> grids[2];
  enumerate_simplex_grid(2, steps, grids[0]);
  enumerate_simplex_grid(3, steps, grids[1]);

  CounterRng rng(6006);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = trial < 700 ? 2 : 3;
    const auto& grid = grids[dim - 2];
    const std::vector<double> p_hat = random_grid_row(dim, steps, rng);
    const double radius = 0.002 * static_cast<double>(rng.next_u64() % 1101);

    // Linear maximization over the L1 ball.
    std::vector<double> values(static_cast<std::size_t>(dim));
    for (auto& v : values) v = rng.uniform();
    double grid_best = -1.0;
    for (const auto& point : grid) {
      double l1 = 0.0;
      for (int j = 0; j < dim; ++j) l1 += std::abs(point[static_cast<std::size_t>(j)] - p_hat[static_cast<std::size_t>(j)]);
      if (l1 > radius + 1e-12) continue;
      double objective = 0.0;
      for (int j = 0; j < dim; ++j) objective += point[static_cast<std::size_t>(j)] * values[static_cast<std::size_t>(j)];
      grid_best = std::max(grid_best, objective);
    }
    const std::vector<double> maximizer = inner_l1_max(p_hat, values, radius);
    double achieved = 0.0;
    for (int j = 0; j < dim; ++j) achieved += maximizer[static_cast<std::size_t>(j)] * values[static_cast<std::size_t>(j)];
    worst = std::max(worst, std::abs(achieved - grid_best));
    if (std::abs(achieved - grid_best) > 2e-3) ++failures;

    // Farthest point inside the ball.
    double grid_far = 0.0;
    for (const auto& point : grid) {
      double l1 = 0.0;
      for (int j = 0; j < dim; ++j) l1 += std::abs(point[static_cast<std::size_t>(j)] - p_hat[static_cast<std::size_t>(j)]);
      if (l1 <= radius + 1e-12) grid_far = std::max(grid_far, l1);
    }
    const L1Deviation dev = max_l1_deviation(p_hat, radius);
    worst = std::max(worst, std::abs(dev.distance - grid_far));
    if (std::abs(dev.distance - grid_far) > 2e-3) ++failures;
  }
  return {failures == 0, format("1000 inputs, %d beyond 2e-3, worst gap %.2e", failures, worst)};
}

// --- criterion 7: greedy guarantee ------------------------------------------

Outcome criterion_greedy() {
  const double alpha = 1.0 - 1.0 / std::exp(1.0);
  int violations = 0;
  CounterRng rng(7007);
  for (int i = 0; i < 100; ++i) {
    const int sources = 5 + static_cast<int>(rng.next_u64() % 6);   // <= 10
    const int targets = 3 + static_cast<int>(rng.next_u64() % 4);
    const int budget = 1 + static_cast<int>(rng.next_u64() % 3);    // <= 3
    const BipartiteInstance inst =
        BipartiteInstance::generate(sources, targets, budget, 7100 + static_cast<std::uint64_t>(i));
    const MeanMatrix truth = inst.to_mean_matrix();
    auto objective = [&](const SeedSet& pi) { return coverage_reward(truth, targets, pi); };
    const SeedSet greedy = greedy_max(objective, sources, budget, true);
    const double best = brute_force_best(inst, budget, truth).second;
    if (objective(greedy) < alpha * best - 1e-12) ++violations;
  }
  return {violations == 0, format("100 instances, %d below the (1-1/e) bound", violations)};
}

// --- criterion 8: sublinear regret for both RL oracles ----------------------

Outcome criterion_rl_scaling() {
  const double start = now_seconds();
  const std::int64_t T = 20000;
  std::string detail;
  bool pass = true;
  for (const OracleKind kind : {OracleKind::extended_vi, OracleKind::optimistic_vi}) {
    ExperimentConfig cfg;
    cfg.environment = EnvironmentKind::episodic_rl;
    cfg.oracle = kind;
    cfg.generator = "3,2,3";
    cfg.generator_seed = 8008;
    cfg.rounds = T;
    cfg.replications = 8;
    cfg.seed = 8800;
    cfg.audit = false;
    cfg.jobs = 4;
    cfg.output_dir =
        (std::filesystem::temp_directory_path() / "cmabmt_acceptance" / to_string(kind)).string();
    const ExperimentResult res = run_experiment(cfg);

    const auto slope = summarize_slope(res.curve.mean_cum, T / 4, T);
    const double cum_T = res.curve.mean_cum[static_cast<std::size_t>(T - 1)];
    const double cum_T10 = res.curve.mean_cum[static_cast<std::size_t>(T / 10 - 1)];
    const double per_round_T = cum_T / static_cast<double>(T);
    const double per_round_T10 = cum_T10 / (static_cast<double>(T) / 10.0);
    const bool slope_ok = slope.has_value() ? *slope < 0.75 : cum_T == 0.0;
    const bool decay_ok = per_round_T10 > 0.0 ? per_round_T < 0.5 * per_round_T10 : cum_T == 0.0;
    pass = pass && slope_ok && decay_ok;
    detail += format("%s: slope %.3f, per-round ratio %.3f; ", to_string(kind),
                     slope.value_or(std::nan("")),
                     per_round_T10 > 0.0 ? per_round_T / per_round_T10 : 0.0);
  }
  const double elapsed = now_seconds() - start;
  pass = pass && elapsed < 180.0;
  detail += format("%.1f s (budget 180 s)", elapsed);
  return {pass, detail};
}

// --- criterion 9: multivariant advantage over the per-edge baseline ---------

Outcome criterion_pmc_advantage() {
  const std::int64_t T = 20000;
  double mean[2] = {0.0, 0.0}, se[2] = {0.0, 0.0};
  int index = 0;
  for (const OracleKind kind : {OracleKind::pmc_greedy, OracleKind::baseline_per_dimension}) {
    ExperimentConfig cfg;
    cfg.environment = EnvironmentKind::pmc_gd;
    cfg.oracle = kind;
    cfg.generator = "8,6,2";
    cfg.generator_seed = 16;
    cfg.rounds = T;
    cfg.replications = 8;
    cfg.seed = 9900;
    cfg.audit = false;
    cfg.jobs = 4;
    cfg.output_dir =
        (std::filesystem::temp_directory_path() / "cmabmt_acceptance" / to_string(kind)).string();
    const ExperimentResult res = run_experiment(cfg);
    mean[index] = res.curve.mean_cum.back();
    se[index] = res.curve.stderr_cum.back();
    ++index;
  }
  const bool pass = mean[0] + 2.0 * se[0] < mean[1] - 2.0 * se[1];
  return {pass, format("multivariant %.1f +- %.1f vs per-edge baseline %.1f +- %.1f (2 se bands)",
                       mean[0], 2.0 * se[0], mean[1], 2.0 * se[1])};
}

// --- criterion 10: byte-identical reruns ------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  ExperimentConfig cfg;
  cfg.environment = EnvironmentKind::episodic_rl;
  cfg.oracle = OracleKind::optimistic_vi;
  cfg.generator = "3,2,3";
  cfg.generator_seed = 1234;
  cfg.rounds = 300;
  cfg.replications = 3;
  cfg.seed = 777;
  cfg.jobs = 3;
  const std::string base = (std::filesystem::temp_directory_path() / "cmabmt_acceptance").string();

  cfg.output_dir = base + "/det_a";
  const ExperimentResult first = run_experiment(cfg);
  cfg.output_dir = base + "/det_b";
  const ExperimentResult second = run_experiment(cfg);

  bool identical = true;
  for (std::size_t j = 0; j < first.curve_files.size(); ++j)
    identical = identical && read_file(first.curve_files[j]) == read_file(second.curve_files[j]);
  identical = identical && read_file(first.summary_file) == read_file(second.summary_file);
  return {identical, identical ? "re-run curve files byte-identical" : "re-run files differ"};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"exact planning vs brute force", criterion_planning},
      {"occupancy identities", criterion_occupancy},
      {"smoothness audits", criterion_smoothness},
      {"concentration coverage", criterion_concentration},
      {"optimism sandwich", criterion_sandwich},
      {"inner maximizers vs grid", criterion_grid_oracles},
      {"greedy guarantee", criterion_greedy},
      {"sublinear RL regret", criterion_rl_scaling},
      {"multivariant advantage", criterion_pmc_advantage},
      {"deterministic reruns", criterion_determinism},
  };

  bool all_pass = true;
  int id = 0;
  for (const Entry& entry : entries) {
    ++id;
    const Outcome outcome = entry.fn();
    all_pass = all_pass && outcome.pass;
    std::printf("criterion %2d (%s): %s — %s\n", id, entry.name, outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
