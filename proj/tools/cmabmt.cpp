// Command-line front end: run experiments, audit invariants, sweep a
// parameter across values, and generate instances.
//
// Exit codes: 0 success, 1 configuration error, 2 invariant-audit failure.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmabmt/experiment.hpp"

namespace {

using namespace cmabmt;

struct CommonFlags {
  std::vector<std::string> overrides;
  std::optional<std::int64_t> rounds;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> jobs;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--set", flags.overrides, "override a config key, e.g. --set oracle=optimistic-vi");
  cmd->add_option("-T,--rounds", flags.rounds, "number of rounds");
  cmd->add_option("--replications", flags.replications, "replication count");
  cmd->add_option("--seed", flags.seed, "base seed");
  cmd->add_option("--output", flags.output_dir, "output directory");
  cmd->add_option("--jobs", flags.jobs, "max parallel replications");
}

// Precedence: CLI flags > CMABMT_SEED > config file > defaults.
ExperimentConfig load_config(const std::string& path, const CommonFlags& flags) {
  ExperimentConfig cfg = ExperimentConfig::from_file(path);
  if (const char* env_seed = std::getenv("CMABMT_SEED")) cfg.set("seed", env_seed);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.rounds) cfg.rounds = *flags.rounds;
  if (flags.replications) cfg.replications = *flags.replications;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.output_dir) cfg.output_dir = *flags.output_dir;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& config_path, const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(config_path, flags);
  const ExperimentResult result = run_experiment(cfg);
  const double final_mean = result.curve.mean_cum.back();
  const double final_se = result.curve.stderr_cum.back();
  std::printf("%s + %s: T=%lld, %d replication(s), final mean cumulative regret %.6g +- %.6g (se)\n",
              to_string(cfg.environment), to_string(cfg.oracle),
              static_cast<long long>(cfg.rounds), cfg.replications, final_mean, final_se);
  for (const auto& f : result.curve_files) std::printf("  wrote %s\n", f.c_str());
  std::printf("  wrote %s\n  wrote %s\n", result.summary_file.c_str(), result.audit_file.c_str());
  return 0;
}

bool report(const char* name, bool pass, const std::string& details) {
  std::printf("AUDIT %-28s %s%s%s\n", name, pass ? "PASS" : "FAIL",
              details.empty() ? "" : " — ", details.c_str());
  return pass;
}

int cmd_audit(const std::string& config_path, const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(config_path, flags);
  bool all_pass = true;

  if (cfg.environment == EnvironmentKind::episodic_rl) {
    const auto env = build_environment(cfg);
    const auto& mdp = dynamic_cast<const EpisodicRlEnvironment&>(*env).mdp();

    const SmoothnessAudit smooth =
        run_value_smoothness_audit(mdp.states(), mdp.actions(), mdp.horizon(), 2000, cfg.seed);
    all_pass &= report("value-smoothness", smooth.tight_violations == 0 && smooth.loose_violations == 0,
                       std::to_string(smooth.trials) + " triples, " +
                           std::to_string(smooth.tight_violations + smooth.loose_violations) +
                           " violations");

    // Occupancy identities on random policies for this instance.
    int occ_failures = 0;
    for (int i = 0; i < 100; ++i) {
      Policy pi(mdp.states(), mdp.horizon());
      CounterRng rng(cfg.seed, {11, static_cast<std::uint64_t>(i)});
      for (auto& a : pi.table)
        a = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(mdp.actions()));
      const OccupancyTable occ = occupancy_measure(mdp, pi);
      for (int h = 0; h < mdp.horizon(); ++h) {
        double mass = 0.0;
        for (int s = 0; s < mdp.states(); ++s)
          for (int a = 0; a < mdp.actions(); ++a) mass += occ.at(s, a, h);
        if (std::abs(mass - 1.0) > 1e-10) ++occ_failures;
      }
      double reward_mass = 0.0;
      for (int h = 0; h < mdp.horizon(); ++h)
        for (int s = 0; s < mdp.states(); ++s)
          for (int a = 0; a < mdp.actions(); ++a) reward_mass += occ.at(s, a, h) * mdp.reward(s, a, h);
      if (std::abs(reward_mass - value_of_policy(mdp, pi).initial_value(mdp.initial_state())) > 1e-10)
        ++occ_failures;
    }
    all_pass &= report("occupancy-identities", occ_failures == 0,
                       "100 policies, " + std::to_string(occ_failures) + " failures");

    const std::int64_t audit_rounds = std::min<std::int64_t>(cfg.rounds, 500);
    const RlOptimismAudit sandwich =
        run_rl_optimism_audit(mdp, OracleKind::optimistic_vi, audit_rounds, 20, cfg.seed);
    all_pass &= report("value-sandwich", sandwich.runs_with_sandwich_violation == 0,
                       "20 runs x " + std::to_string(audit_rounds) + " rounds, " +
                           std::to_string(sandwich.runs_with_sandwich_violation) + " violating runs");
    const RlOptimismAudit optimism =
        run_rl_optimism_audit(mdp, OracleKind::extended_vi, audit_rounds, 20, cfg.seed);
    all_pass &= report("conditional-optimism", optimism.conditional_optimism_failures == 0,
                       std::to_string(optimism.rounds_checked) + " rounds, " +
                           std::to_string(optimism.conditional_optimism_failures) + " failures");
  } else {
    const auto env = build_environment(cfg);
    const auto& inst = dynamic_cast<const PmcGdEnvironment&>(*env).instance();

    const PmcBoundAudit bounds =
        run_pmc_bound_audit(inst.sources(), inst.targets(), inst.budget(), 2000, cfg.seed);
    all_pass &= report("coverage-smoothness", bounds.smoothness_violations == 0,
                       std::to_string(bounds.trials) + " triples, " +
                           std::to_string(bounds.smoothness_violations) + " violations");
    all_pass &= report("pseudo-reward-dominance", bounds.dominance_violations == 0,
                       std::to_string(bounds.dominance_violations) + " violations");
    all_pass &= report("submodularity", bounds.submodularity_violations == 0,
                       std::to_string(bounds.submodularity_violations) + " violations");

    const MeanMatrix truth = inst.to_mean_matrix();
    const auto [best_set, best_value] = brute_force_best(inst, inst.budget(), truth);
    auto objective = [&](const SeedSet& pi) { return coverage_reward(truth, inst.targets(), pi); };
    const SeedSet greedy = greedy_max(objective, inst.sources(), inst.budget(), cfg.lazy_greedy);
    const double ratio = best_value > 0.0 ? objective(greedy) / best_value : 1.0;
    all_pass &= report("greedy-guarantee", ratio >= 1.0 - 1.0 / std::exp(1.0) - 1e-12,
                       "greedy/optimal = " + std::to_string(ratio));
  }
  return all_pass ? 0 : 2;
}

int cmd_sweep(const std::string& config_path, const CommonFlags& flags, const std::string& param) {
  const auto eq = param.find('=');
  if (eq == std::string::npos) throw ConfigError("--param expects key=v1,v2,..., got '" + param + "'");
  const std::string key = param.substr(0, eq);
  std::vector<std::string> values;
  {
    std::stringstream ss(param.substr(eq + 1));
    std::string part;
    while (std::getline(ss, part, ',')) values.push_back(part);
  }
  if (values.empty()) throw ConfigError("--param has no values");

  const ExperimentConfig base = load_config(config_path, flags);
  const std::string sweep_dir = base.output_dir;
  std::filesystem::create_directories(sweep_dir);
  const std::string summary_path = (std::filesystem::path(sweep_dir) / "sweep_summary.csv").string();
  std::ofstream summary(summary_path);
  if (!summary) throw std::runtime_error("cannot write " + summary_path);
  summary << "param,value,final_mean_cum,final_stderr_cum,slope\n";

  for (const auto& value : values) {
    ExperimentConfig cfg = base;
    cfg.set(key, value);
    cfg.output_dir = (std::filesystem::path(sweep_dir) / (key + "=" + value)).string();
    cfg.validate();
    const ExperimentResult result = run_experiment(cfg);
    const auto slope =
        summarize_slope(result.curve.mean_cum, std::max<std::int64_t>(2, cfg.rounds / 4), cfg.rounds);
    summary << key << ',' << value << ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", result.curve.mean_cum.back());
    summary << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", result.curve.stderr_cum.back());
    summary << buf << ',';
    if (slope) {
      std::snprintf(buf, sizeof buf, "%.17g", *slope);
      summary << buf;
    } else {
      summary << "nan";
    }
    summary << '\n';
    std::printf("%s=%s: final mean cumulative regret %.6g +- %.6g, slope %s\n", key.c_str(),
                value.c_str(), result.curve.mean_cum.back(), result.curve.stderr_cum.back(),
                slope ? std::to_string(*slope).c_str() : "undefined");
  }
  std::printf("wrote %s\n", summary_path.c_str());
  return 0;
}

int cmd_gen(bool mdp_kind, const std::string& spec, const std::string& out_path,
            std::uint64_t seed) {
  std::vector<int> dims;
  {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) dims.push_back(std::stoi(part));
  }
  if (dims.size() != 3) throw ConfigError("generator spec must be three comma-separated integers");
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  if (mdp_kind) {
    TabularMdp::generate(dims[0], dims[1], dims[2], seed).save(out);
  } else {
    BipartiteInstance::generate(dims[0], dims[1], dims[2], seed).save(out);
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMAB learner with multivariant triggered arms: episodic-RL and coverage experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config_path;

  auto* run_cmd = app.add_subcommand("run", "run an experiment and write regret curves");
  run_cmd->add_option("config", config_path, "config file")->required();
  add_common_flags(run_cmd, flags);

  auto* audit_cmd = app.add_subcommand("audit", "run the invariant audit suites only");
  audit_cmd->add_option("config", config_path, "config file")->required();
  add_common_flags(audit_cmd, flags);

  std::string sweep_param;
  auto* sweep_cmd = app.add_subcommand("sweep", "re-run an experiment across parameter values");
  sweep_cmd->add_option("config", config_path, "config file")->required();
  sweep_cmd->add_option("--param", sweep_param, "key=v1,v2,... (e.g. T=1000,4000,16000)")->required();
  add_common_flags(sweep_cmd, flags);

  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 1;
  auto* gen_cmd = app.add_subcommand("gen", "generate a seeded instance file");
  auto* gen_mdp = gen_cmd->add_subcommand("mdp", "episodic MDP instance, spec S,A,H");
  gen_mdp->add_option("spec", gen_spec, "S,A,H")->required();
  gen_mdp->add_option("-o,--output", gen_out, "output file")->required();
  gen_mdp->add_option("--seed", gen_seed, "generator seed");
  auto* gen_pmc = gen_cmd->add_subcommand("pmcgd", "coverage instance, spec U,V,k");
  gen_pmc->add_option("spec", gen_spec, "U,V,k")->required();
  gen_pmc->add_option("-o,--output", gen_out, "output file")->required();
  gen_pmc->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, flags);
    if (*audit_cmd) return cmd_audit(config_path, flags);
    if (*sweep_cmd) return cmd_sweep(config_path, flags, sweep_param);
    if (*gen_cmd) return cmd_gen(static_cast<bool>(*gen_mdp), gen_spec, gen_out, gen_seed);
  } catch (const cmabmt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
