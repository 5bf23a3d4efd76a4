#ifndef CMABMT_EXPERIMENT_HPP
#define CMABMT_EXPERIMENT_HPP

// Experiment orchestration: configuration, seeded replications, exact regret
// curves, CSV output, scaling summaries, and the inequality audit suites backing
// the `audit` subcommand.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cmabmt/baseline.hpp"
#include "cmabmt/framework.hpp"
#include "cmabmt/pmc_env.hpp"
#include "cmabmt/rl_env.hpp"

namespace cmabmt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnvironmentKind { episodic_rl, pmc_gd };
enum class OracleKind { extended_vi, optimistic_vi, pmc_greedy, baseline_per_dimension };

inline EnvironmentKind parse_environment_kind(const std::string& s) {
  if (s == "episodic-rl") return EnvironmentKind::episodic_rl;
  if (s == "pmc-gd") return EnvironmentKind::pmc_gd;
  throw ConfigError("unknown environment kind: " + s);
}

inline OracleKind parse_oracle_kind(const std::string& s) {
  if (s == "extended-vi") return OracleKind::extended_vi;
  if (s == "optimistic-vi") return OracleKind::optimistic_vi;
  if (s == "pmc-greedy") return OracleKind::pmc_greedy;
  if (s == "baseline-per-dimension") return OracleKind::baseline_per_dimension;
  throw ConfigError("unknown oracle kind: " + s);
}

inline const char* to_string(EnvironmentKind k) {
  return k == EnvironmentKind::episodic_rl ? "episodic-rl" : "pmc-gd";
}

inline const char* to_string(OracleKind k) {
  switch (k) {
    case OracleKind::extended_vi: return "extended-vi";
    case OracleKind::optimistic_vi: return "optimistic-vi";
    case OracleKind::pmc_greedy: return "pmc-greedy";
    default: return "baseline-per-dimension";
  }
}

struct ExperimentConfig {
  EnvironmentKind environment = EnvironmentKind::episodic_rl;
  OracleKind oracle = OracleKind::extended_vi;
  std::string instance_file;    // instance source: a file ...
  std::string generator;        // ... or a "S,A,H" / "U,V,k" generator spec
  std::uint64_t generator_seed = 1;
  std::int64_t rounds = 1000;
  int replications = 1;
  std::uint64_t seed = 0;
  double delta_prime = -1.0;  // < 0 selects the oracle default
  std::string output_dir = "out";
  int jobs = 1;
  bool audit = true;
  bool warm_start = true;
  bool lazy_greedy = true;

  void set(const std::string& key, const std::string& value);
  void validate() const;

  static ExperimentConfig from_file(const std::string& path);
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<int> parse_dims(const std::string& spec) {
  std::vector<int> dims;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) dims.push_back(std::stoi(trim(part)));
  if (dims.size() != 3) throw ConfigError("generator spec must have three comma-separated values");
  return dims;
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "environment") environment = parse_environment_kind(value);
    else if (key == "oracle") oracle = parse_oracle_kind(value);
    else if (key == "instance") instance_file = value;
    else if (key == "generator") generator = value;
    else if (key == "generator_seed") generator_seed = std::stoull(value);
    else if (key == "T" || key == "rounds") rounds = std::stoll(value);
    else if (key == "replications") replications = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "delta_prime") delta_prime = std::stod(value);
    else if (key == "output_dir") output_dir = value;
    else if (key == "jobs") jobs = std::stoi(value);
    else if (key == "audit") audit = detail::parse_bool(value, key);
    else if (key == "warm_start") warm_start = detail::parse_bool(value, key);
    else if (key == "lazy_greedy") lazy_greedy = detail::parse_bool(value, key);
    else throw ConfigError("unknown config key: " + key);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has malformed value '" + value + "'");
  }
}

inline void ExperimentConfig::validate() const {
  if (rounds < 1) throw ConfigError("T must be >= 1");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (instance_file.empty() && generator.empty())
    throw ConfigError("either 'instance' or 'generator' must be set");
  const bool rl_oracle =
      oracle == OracleKind::extended_vi || oracle == OracleKind::optimistic_vi;
  if ((environment == EnvironmentKind::episodic_rl) != rl_oracle)
    throw ConfigError(std::string("oracle '") + to_string(oracle) +
                      "' is incompatible with environment '" + to_string(environment) + "'");
  if (delta_prime >= 0.0 && !(delta_prime > 0.0 && delta_prime < 1.0))
    throw ConfigError("delta_prime must be in (0, 1)");
}

/// INI-style flat key = value file; '#' and ';' start comments.
inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

/// Per-round cumulative regret per replication plus the across-replication
/// mean and standard error.
struct RegretCurve {
  std::int64_t rounds = 0;
  std::vector<std::vector<double>> cum_per_rep;
  std::vector<double> mean_cum;
  std::vector<double> stderr_cum;

  void finalize() {
    const std::size_t reps = cum_per_rep.size();
    mean_cum.assign(static_cast<std::size_t>(rounds), 0.0);
    stderr_cum.assign(static_cast<std::size_t>(rounds), 0.0);
    for (std::int64_t t = 0; t < rounds; ++t) {
      double mean = 0.0;
      for (const auto& rep : cum_per_rep) mean += rep[static_cast<std::size_t>(t)];
      mean /= static_cast<double>(reps);
      double ss = 0.0;
      for (const auto& rep : cum_per_rep) {
        const double d = rep[static_cast<std::size_t>(t)] - mean;
        ss += d * d;
      }
      mean_cum[static_cast<std::size_t>(t)] = mean;
      stderr_cum[static_cast<std::size_t>(t)] =
          reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) / std::sqrt(static_cast<double>(reps))
                   : 0.0;
    }
  }
};

struct ReplicationAudit {
  int replication = 0;
  std::int64_t rounds = 0;
  std::int64_t optimism_violations = 0;
  std::int64_t truth_outside_rounds = 0;
  std::int64_t hard_violations = 0;  // optimism failed while the truth was in region
};

struct ExperimentResult {
  RegretCurve curve;
  std::vector<ReplicationAudit> audits;
  std::vector<std::string> curve_files;
  std::string summary_file;
  std::string audit_file;
};

namespace detail {

inline void print_g17(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace detail

inline void write_curve_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "round,instant_regret,cum_regret,optimism_held,truth_in_region\n";
  for (const auto& rec : trace.rounds) {
    out << rec.round << ',';
    detail::print_g17(out, rec.instant_regret);
    out << ',';
    detail::print_g17(out, rec.cum_regret);
    out << ',' << (rec.optimism_held ? 1 : 0) << ',' << (rec.truth_in_region ? 1 : 0) << '\n';
  }
}

struct CurveRow {
  std::int64_t round = 0;
  double instant_regret = 0.0;
  double cum_regret = 0.0;
  bool optimism_held = true;
  bool truth_in_region = true;
};

inline std::vector<CurveRow> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty curve file");
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CurveRow row;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int opt = 0, truth = 0;
    if (!(ss >> row.round >> row.instant_regret >> row.cum_regret >> opt >> truth))
      throw std::runtime_error(path + ": malformed curve row");
    row.optimism_held = opt != 0;
    row.truth_in_region = truth != 0;
    rows.push_back(row);
  }
  return rows;
}

inline void write_summary_csv(const std::string& path, const RegretCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "round,mean_cum,stderr_cum\n";
  for (std::int64_t t = 0; t < curve.rounds; ++t) {
    out << (t + 1) << ',';
    detail::print_g17(out, curve.mean_cum[static_cast<std::size_t>(t)]);
    out << ',';
    detail::print_g17(out, curve.stderr_cum[static_cast<std::size_t>(t)]);
    out << '\n';
  }
}

inline void write_audit_csv(const std::string& path, const std::vector<ReplicationAudit>& audits) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "replication,rounds,optimism_violations,truth_outside_rounds,hard_violations\n";
  for (const auto& a : audits)
    out << a.replication << ',' << a.rounds << ',' << a.optimism_violations << ','
        << a.truth_outside_rounds << ',' << a.hard_violations << '\n';
}

/// Builds the configured environment (shared across replications).
inline std::unique_ptr<Environment> build_environment(const ExperimentConfig& cfg) {
  if (cfg.environment == EnvironmentKind::episodic_rl) {
    if (!cfg.instance_file.empty())
      return std::make_unique<EpisodicRlEnvironment>(TabularMdp::load_file(cfg.instance_file));
    const std::vector<int> d = detail::parse_dims(cfg.generator);
    return std::make_unique<EpisodicRlEnvironment>(
        TabularMdp::generate(d[0], d[1], d[2], cfg.generator_seed));
  }
  if (!cfg.instance_file.empty())
    return std::make_unique<PmcGdEnvironment>(BipartiteInstance::load_file(cfg.instance_file));
  const std::vector<int> d = detail::parse_dims(cfg.generator);
  return std::make_unique<PmcGdEnvironment>(
      BipartiteInstance::generate(d[0], d[1], d[2], cfg.generator_seed));
}

/// Builds a fresh oracle for one replication.
inline std::unique_ptr<JointOracle> build_oracle(const ExperimentConfig& cfg,
                                                 const Environment& env) {
  switch (cfg.oracle) {
    case OracleKind::extended_vi: {
      const auto& rl = dynamic_cast<const EpisodicRlEnvironment&>(env);
      return std::make_unique<ExtendedViOracle>(rl.mdp(), cfg.rounds, cfg.delta_prime);
    }
    case OracleKind::optimistic_vi: {
      const auto& rl = dynamic_cast<const EpisodicRlEnvironment&>(env);
      return std::make_unique<OptimisticViOracle>(rl.mdp(), cfg.rounds, cfg.delta_prime);
    }
    case OracleKind::pmc_greedy: {
      const auto& pmc = dynamic_cast<const PmcGdEnvironment&>(env);
      PmcOracleOptions options{cfg.warm_start, cfg.lazy_greedy};
      return std::make_unique<PmcGreedyOracle>(pmc.instance().sources(), pmc.instance().targets(),
                                               pmc.instance().budget(), cfg.rounds, cfg.delta_prime,
                                               options);
    }
    default: {
      const auto& pmc = dynamic_cast<const PmcGdEnvironment&>(env);
      return std::make_unique<PerDimensionBaselineOracle>(pmc.instance().sources(),
                                                          pmc.instance().targets(),
                                                          pmc.instance().budget(), cfg.lazy_greedy);
    }
  }
}

/// Runs all replications (replication j uses seed + j), writes one curve CSV
/// per replication plus summary and audit files. Replications execute in
/// parallel up to cfg.jobs; outputs are keyed by replication index so the
/// files do not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::unique_ptr<Environment> env = build_environment(cfg);
  std::filesystem::create_directories(cfg.output_dir);

  const int reps = cfg.replications;
  std::vector<Trace> traces(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int j = next.fetch_add(1);
      if (j >= reps) return;
      try {
        auto oracle = build_oracle(cfg, *env);
        traces[static_cast<std::size_t>(j)] =
            run_cucb_mt(*env, *oracle, cfg.rounds, cfg.seed + static_cast<std::uint64_t>(j),
                        RunOptions{cfg.audit});
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(cfg.jobs, reps);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  ExperimentResult result;
  result.curve.rounds = cfg.rounds;
  for (int j = 0; j < reps; ++j) {
    const Trace& trace = traces[static_cast<std::size_t>(j)];
    std::vector<double> cum;
    cum.reserve(trace.rounds.size());
    ReplicationAudit audit;
    audit.replication = j;
    audit.rounds = cfg.rounds;
    for (const auto& rec : trace.rounds) {
      cum.push_back(rec.cum_regret);
      if (!rec.optimism_held) ++audit.optimism_violations;
      if (!rec.truth_in_region) ++audit.truth_outside_rounds;
      if (!rec.optimism_held && rec.truth_in_region) ++audit.hard_violations;
    }
    result.curve.cum_per_rep.push_back(std::move(cum));
    result.audits.push_back(audit);

    const std::string path =
        (std::filesystem::path(cfg.output_dir) / ("curve_rep" + std::to_string(j) + ".csv")).string();
    write_curve_csv(path, trace);
    result.curve_files.push_back(path);
  }
  result.curve.finalize();
  result.summary_file = (std::filesystem::path(cfg.output_dir) / "summary.csv").string();
  write_summary_csv(result.summary_file, result.curve);
  result.audit_file = (std::filesystem::path(cfg.output_dir) / "audit.csv").string();
  write_audit_csv(result.audit_file, result.audits);
  return result;
}

/// Least-squares slope of log(cumulative regret) against log(round) over
/// rounds [t0, t1]. Returns nothing when the curve is zero anywhere on the
/// window (the exponent is undefined there).
inline std::optional<double> summarize_slope(std::span<const double> cum, std::int64_t t0,
                                             std::int64_t t1) {
  if (t0 < 2) throw std::invalid_argument("summarize_slope: window must start at t0 >= 2");
  if (t1 > static_cast<std::int64_t>(cum.size()) || t0 > t1)
    throw std::invalid_argument("summarize_slope: bad window");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::int64_t count = 0;
  for (std::int64_t t = t0; t <= t1; ++t) {
    const double c = cum[static_cast<std::size_t>(t - 1)];
    if (!(c > 0.0)) return std::nullopt;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(c);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double n = static_cast<double>(count);
  const double denom = sxx - sx * sx / n;
  if (denom <= 0.0) return std::nullopt;
  return (sxy - sx * sy / n) / denom;
}

// ---------------------------------------------------------------------------
// Audit suites. These read true parameters by construction; they live on the
// test plane and back the `audit` subcommand and the acceptance checks.

struct SmoothnessAudit {
  int trials = 0;
  int tight_violations = 0;  // |V1 difference| > occupancy-weighted inner bound
  int loose_violations = 0;  // inner bound > L1 bound
};

/// Random (p, p~, pi) triples on a fixed shape; checks
/// lhs <= rhs_tight <= rhs_loose for every draw.
inline SmoothnessAudit run_value_smoothness_audit(int states, int actions, int horizon, int trials,
                                                 std::uint64_t seed) {
  SmoothnessAudit audit;
  audit.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const TabularMdp base = TabularMdp::generate(states, actions, horizon,
                                                 mix64(seed + static_cast<std::uint64_t>(2 * i)));
    TabularMdp tilde = base;
    tilde.set_transitions(TabularMdp::generate(states, actions, horizon,
                                               mix64(seed + static_cast<std::uint64_t>(2 * i + 1)))
                              .transitions());
    Policy pi(states, horizon);
    CounterRng rng(seed, {4, static_cast<std::uint64_t>(i)});
    for (auto& a : pi.table) a = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(actions));
    const ValueSmoothnessTerms terms = value_smoothness_terms(base, tilde, pi);
    if (terms.lhs > terms.rhs_tight + 1e-9) ++audit.tight_violations;
    if (terms.rhs_tight > terms.rhs_loose + 1e-9) ++audit.loose_violations;
  }
  return audit;
}

struct PmcBoundAudit {
  int trials = 0;
  int smoothness_violations = 0;  // |r(pi;p~) - r(pi;p)| > sum of row L1 distances
  int dominance_violations = 0;   // pseudo-reward < coverage at the optimistic rows
  int submodularity_violations = 0;
};

/// Random (pi, p, p~) draws plus oracle-produced optimistic rows; checks the
/// coverage smoothness bound, pseudo-reward dominance, and diminishing
/// marginal gains.
inline PmcBoundAudit run_pmc_bound_audit(int sources, int targets, int budget, int trials,
                                         std::uint64_t seed) {
  PmcBoundAudit audit;
  audit.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const BipartiteInstance base =
        BipartiteInstance::generate(sources, targets, budget, mix64(seed + static_cast<std::uint64_t>(3 * i)));
    const BipartiteInstance tilde =
        BipartiteInstance::generate(sources, targets, budget, mix64(seed + static_cast<std::uint64_t>(3 * i + 1)));
    const MeanMatrix p = base.to_mean_matrix();
    const MeanMatrix pt = tilde.to_mean_matrix();
    CounterRng rng(seed, {5, static_cast<std::uint64_t>(i)});

    SeedSet pi;
    for (int u = 0; u < sources; ++u)
      if (static_cast<int>(pi.size()) < budget && rng.bernoulli(0.5)) pi.push_back(u);
    if (pi.empty()) pi.push_back(static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(sources)));

    // Coverage smoothness: target columns only.
    double lhs = std::abs(coverage_reward(pt, targets, pi) - coverage_reward(p, targets, pi));
    double rhs = 0.0;
    for (int u : pi)
      for (int v = 0; v < targets; ++v) rhs += std::abs(pt.at(u, v) - p.at(u, v));
    if (lhs > rhs + 1e-9) ++audit.smoothness_violations;

    // Pseudo-reward dominance for oracle-shaped optimistic rows around p.
    MeanMatrix optimistic(sources, targets + 1);
    double pseudo = coverage_reward(p, targets, pi);
    for (int u : pi) {
      const double radius = 0.05 + 1.95 * rng.uniform();
      L1Deviation dev = max_l1_deviation(base.row(u), radius);
      for (int j = 0; j <= targets; ++j) optimistic.at(u, j) = dev.row[static_cast<std::size_t>(j)];
      pseudo += dev.distance;
    }
    if (pseudo + 1e-9 < coverage_reward(optimistic, targets, pi)) ++audit.dominance_violations;

    // Submodularity witness: gain at a subset dominates gain at a superset.
    if (pi.size() >= 2) {
      SeedSet small(pi.begin(), pi.end() - 1);
      int extra = -1;
      for (int u = 0; u < sources; ++u)
        if (std::find(pi.begin(), pi.end(), u) == pi.end()) {
          extra = u;
          break;
        }
      if (extra >= 0) {
        SeedSet small_plus = small, big_plus = pi;
        small_plus.insert(std::lower_bound(small_plus.begin(), small_plus.end(), extra), extra);
        big_plus.insert(std::lower_bound(big_plus.begin(), big_plus.end(), extra), extra);
        const double gain_small =
            coverage_reward(p, targets, small_plus) - coverage_reward(p, targets, small);
        const double gain_big = coverage_reward(p, targets, big_plus) - coverage_reward(p, targets, pi);
        if (gain_small + 1e-12 < gain_big) ++audit.submodularity_violations;
      }
    }
  }
  return audit;
}

struct RlOptimismAudit {
  int runs = 0;
  int runs_with_sandwich_violation = 0;     // some round broke lower <= optimal <= upper
  std::int64_t conditional_optimism_failures = 0;  // truth in region but optimism failed
  std::int64_t rounds_checked = 0;
};

/// Short learner runs that check the value sandwich (optimistic oracle) or
/// conditional optimism (extended oracle) against the exact optimal values.
inline RlOptimismAudit run_rl_optimism_audit(const TabularMdp& mdp, OracleKind kind,
                                             std::int64_t rounds, int runs, std::uint64_t seed,
                                             double delta_prime = -1.0) {
  if (kind != OracleKind::extended_vi && kind != OracleKind::optimistic_vi)
    throw std::invalid_argument("run_rl_optimism_audit: needs an RL oracle kind");
  RlOptimismAudit audit;
  audit.runs = runs;
  EpisodicRlEnvironment env(mdp);
  const ValueTable v_star = optimal_values(mdp).first;

  for (int run = 0; run < runs; ++run) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(run);
    ArmStatistics stats(env.num_arms(), env.outcome_dim());
    std::unique_ptr<JointOracle> oracle;
    if (kind == OracleKind::extended_vi)
      oracle = std::make_unique<ExtendedViOracle>(mdp, rounds, delta_prime);
    else
      oracle = std::make_unique<OptimisticViOracle>(mdp, rounds, delta_prime);
    bool violated = false;
    for (std::int64_t t = 1; t <= rounds; ++t) {
      const Proposal proposal = oracle->propose(stats, t);
      ++audit.rounds_checked;
      if (kind == OracleKind::optimistic_vi) {
        const auto& out = dynamic_cast<OptimisticViOracle&>(*oracle).last_output();
        for (int h = 0; h < mdp.horizon() && !violated; ++h)
          for (int s = 0; s < mdp.states(); ++s) {
            if (out.v_lower.at(h, s) > v_star.at(h, s) + 1e-9 ||
                v_star.at(h, s) > out.v_upper.at(h, s) + 1e-9) {
              violated = true;
              break;
            }
          }
      } else {
        const bool truth_ok = oracle->truth_in_region(stats, env.true_means());
        if (truth_ok &&
            proposal.optimistic_value + 1e-9 < v_star.initial_value(mdp.initial_state()))
          ++audit.conditional_optimism_failures;
      }
      RoundFeedback feedback = env.sample_round(proposal.action, run_seed, t);
      stats.update(feedback.observations);
    }
    if (violated) ++audit.runs_with_sandwich_violation;
  }
  return audit;
}

}  // namespace cmabmt

#endif  // CMABMT_EXPERIMENT_HPP
