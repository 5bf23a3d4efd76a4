#ifndef CMABMT_PMC_GD_HPP
#define CMABMT_PMC_GD_HPP

// Probabilistic maximum coverage for goods distribution. Each source node
// carries a categorical row over the targets plus a trailing null slot that
// absorbs the mass a source keeps to itself; one selected source covers at
// most one target per round.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmabmt/concentration.hpp"
#include "cmabmt/framework.hpp"
#include "cmabmt/random.hpp"

namespace cmabmt {

/// Up to `budget` distinct source indices, kept sorted.
using SeedSet = std::vector<int>;

inline void validate_seed_set(const SeedSet& pi, int sources, int budget) {
  if (static_cast<int>(pi.size()) > budget) throw std::invalid_argument("SeedSet: over budget");
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] < 0 || pi[i] >= sources) throw std::invalid_argument("SeedSet: index out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (pi[j] == pi[i]) throw std::invalid_argument("SeedSet: duplicate index");
  }
}

class BipartiteInstance {
 public:
  BipartiteInstance(int sources, int targets, int budget)
      : sources_(sources),
        targets_(targets),
        budget_(budget),
        rows_(static_cast<std::size_t>(sources) * (targets + 1), 0.0) {
    if (sources < 1 || targets < 1) throw std::invalid_argument("BipartiteInstance: empty graph");
    if (budget < 1 || budget > sources)
      throw std::invalid_argument("BipartiteInstance: budget must be in [1, sources]");
    for (int u = 0; u < sources; ++u) row(u)[static_cast<std::size_t>(targets)] = 1.0;  // all mass on null
  }

  int sources() const { return sources_; }
  int targets() const { return targets_; }
  int budget() const { return budget_; }

  /// Augmented row of length targets + 1; the last slot is the null outcome.
  std::span<double> row(int u) {
    return {rows_.data() + static_cast<std::size_t>(u) * (targets_ + 1),
            static_cast<std::size_t>(targets_ + 1)};
  }
  std::span<const double> row(int u) const {
    return {rows_.data() + static_cast<std::size_t>(u) * (targets_ + 1),
            static_cast<std::size_t>(targets_ + 1)};
  }

  double edge(int u, int v) const { return row(u)[static_cast<std::size_t>(v)]; }

  /// Sets the target entries of a row; the null slot absorbs the deficit.
  void set_edges(int u, std::span<const double> edges) {
    if (static_cast<int>(edges.size()) != targets_)
      throw std::invalid_argument("BipartiteInstance: row length mismatch");
    double total = 0.0;
    auto r = row(u);
    for (int v = 0; v < targets_; ++v) {
      r[static_cast<std::size_t>(v)] = edges[static_cast<std::size_t>(v)];
      total += edges[static_cast<std::size_t>(v)];
    }
    if (total > 1.0 + 1e-9) throw std::invalid_argument("BipartiteInstance: row mass exceeds 1");
    r[static_cast<std::size_t>(targets_)] = std::max(0.0, 1.0 - total);
  }

  /// Rows as simplex mean vectors of dimension targets + 1.
  MeanMatrix to_mean_matrix() const {
    MeanMatrix m(sources_, targets_ + 1);
    for (int u = 0; u < sources_; ++u) {
      auto src = row(u);
      auto dst = m.row(u);
      for (int j = 0; j <= targets_; ++j) dst[static_cast<std::size_t>(j)] = src[static_cast<std::size_t>(j)];
    }
    return m;
  }

  void validate() const {
    for (int u = 0; u < sources_; ++u) {
      double sum = 0.0, target_sum = 0.0;
      auto r = row(u);
      for (int j = 0; j <= targets_; ++j) {
        if (!(r[static_cast<std::size_t>(j)] >= 0.0 && r[static_cast<std::size_t>(j)] <= 1.0))
          throw std::invalid_argument("BipartiteInstance: entry outside [0,1]");
        sum += r[static_cast<std::size_t>(j)];
        if (j < targets_) target_sum += r[static_cast<std::size_t>(j)];
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("BipartiteInstance: augmented row does not sum to 1");
      if (target_sum > 1.0 + 1e-9)
        throw std::invalid_argument("BipartiteInstance: target mass exceeds 1");
    }
  }

  /// Seeded instance with Dirichlet(1,...,1) rows over targets + null.
  static BipartiteInstance generate(int sources, int targets, int budget, std::uint64_t seed) {
    BipartiteInstance inst(sources, targets, budget);
    for (int u = 0; u < sources; ++u) {
      CounterRng rng = substream(seed, 3, static_cast<std::uint64_t>(u));
      auto r = inst.row(u);
      double total = 0.0;
      for (int j = 0; j <= targets; ++j) {
        r[static_cast<std::size_t>(j)] = rng.exponential();
        total += r[static_cast<std::size_t>(j)];
      }
      for (int j = 0; j <= targets; ++j) r[static_cast<std::size_t>(j)] /= total;
    }
    inst.validate();
    return inst;
  }

  /// Plain-text format: header "U V k", then U rows of V edge probabilities;
  /// the null mass is the deficit from 1.
  static BipartiteInstance load(std::istream& in) {
    int sources = 0, targets = 0, budget = 0;
    if (!(in >> sources >> targets >> budget))
      throw std::runtime_error("BipartiteInstance: malformed header");
    if (sources < 1 || targets < 1 || budget < 1 || budget > sources)
      throw std::runtime_error("BipartiteInstance: invalid header values");
    BipartiteInstance inst(sources, targets, budget);
    std::vector<double> edges(static_cast<std::size_t>(targets), 0.0);
    for (int u = 0; u < sources; ++u) {
      for (auto& e : edges)
        if (!(in >> e)) throw std::runtime_error("BipartiteInstance: truncated edge table");
      inst.set_edges(u, edges);
    }
    inst.validate();
    return inst;
  }

  static BipartiteInstance load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("BipartiteInstance: cannot open " + path);
    return load(in);
  }

  void save(std::ostream& out) const {
    out << sources_ << ' ' << targets_ << ' ' << budget_ << '\n';
    char buf[32];
    for (int u = 0; u < sources_; ++u) {
      auto r = row(u);
      for (int v = 0; v < targets_; ++v) {
        std::snprintf(buf, sizeof buf, "%.17g", r[static_cast<std::size_t>(v)]);
        out << buf << (v + 1 == targets_ ? '\n' : ' ');
      }
    }
  }

 private:
  int sources_, targets_, budget_;
  std::vector<double> rows_;  // [u * (targets + 1) + j]
};

/// Expected number of covered targets under edge matrix p (rows of dimension
/// >= num_targets; only the first num_targets columns are edges):
/// sum_v (1 - prod_{u in pi} (1 - p(u, v))).
inline double coverage_reward(const MeanMatrix& p, int num_targets, const SeedSet& pi) {
  if (num_targets > p.dim()) throw std::invalid_argument("coverage_reward: too few columns");
  double total = 0.0;
  for (int v = 0; v < num_targets; ++v) {
    double miss = 1.0;
    for (int u : pi) miss *= 1.0 - p.at(u, v);
    total += 1.0 - miss;
  }
  return total;
}

struct L1Deviation {
  std::vector<double> row;  // the farthest row inside the ball
  double distance = 0.0;    // its L1 distance from the empirical row
};

/// Farthest simplex point from p_hat_row within an L1 ball of the given
/// radius: distance min(radius, 2 (1 - min entry)), attained by piling half
/// of it onto the lowest entry and draining the rest in ascending entry
/// order. The infinite sentinel (or an unvisited arm's all-zero placeholder
/// row) yields the one-hot on the lowest entry without a simplex check.
inline L1Deviation max_l1_deviation(std::span<const double> p_hat_row, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("max_l1_deviation: negative radius");
  const int n = static_cast<int>(p_hat_row.size());
  if (n == 0) throw std::invalid_argument("max_l1_deviation: empty support");
  int lowest = 0;
  for (int i = 1; i < n; ++i)
    if (p_hat_row[static_cast<std::size_t>(i)] < p_hat_row[static_cast<std::size_t>(lowest)]) lowest = i;

  L1Deviation out;
  if (std::isinf(radius)) {
    out.row.assign(static_cast<std::size_t>(n), 0.0);
    out.row[static_cast<std::size_t>(lowest)] = 1.0;
    out.distance = 2.0 * (1.0 - p_hat_row[static_cast<std::size_t>(lowest)]);
    return out;
  }
  check_simplex(p_hat_row, "max_l1_deviation");

  const double q = std::min(radius, 2.0 * (1.0 - p_hat_row[static_cast<std::size_t>(lowest)]));
  out.row.assign(p_hat_row.begin(), p_hat_row.end());
  out.row[static_cast<std::size_t>(lowest)] += q / 2.0;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (p_hat_row[static_cast<std::size_t>(i)] != p_hat_row[static_cast<std::size_t>(j)])
      return p_hat_row[static_cast<std::size_t>(i)] < p_hat_row[static_cast<std::size_t>(j)];
    return i < j;
  });
  double need = q / 2.0;
  for (int i : order) {
    if (i == lowest) continue;
    if (need <= 0.0) break;
    const double take = std::min(out.row[static_cast<std::size_t>(i)], need);
    out.row[static_cast<std::size_t>(i)] -= take;
    need -= take;
  }
  out.distance = q;
  return out;
}

/// Greedy maximization of a monotone set function over {0..num_sources-1}
/// with cardinality budget: k rounds of adding the element with the largest
/// marginal gain, ties toward the lowest index. The lazy variant keeps a
/// priority queue of stale gains and matches the plain variant exactly on
/// submodular objectives.
inline SeedSet greedy_max(const std::function<double(const SeedSet&)>& objective, int num_sources,
                          int budget, bool lazy = false) {
  if (budget < 0 || budget > num_sources) throw std::invalid_argument("greedy_max: bad budget");
  SeedSet chosen;
  if (!lazy) {
    for (int round = 0; round < budget; ++round) {
      int best = -1;
      double best_value = 0.0;
      for (int u = 0; u < num_sources; ++u) {
        if (std::find(chosen.begin(), chosen.end(), u) != chosen.end()) continue;
        SeedSet trial = chosen;
        trial.insert(std::lower_bound(trial.begin(), trial.end(), u), u);
        const double value = objective(trial);
        if (best < 0 || value > best_value) {
          best = u;
          best_value = value;
        }
      }
      chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), best), best);
    }
    return chosen;
  }

  // Lazy evaluation: entries are (stale gain, index, stamp). Gains can only
  // shrink as the set grows, so a re-evaluated top that stays on top is the
  // true argmax. Ordering (gain desc, index asc) preserves the tie-break.
  struct Entry {
    double gain;
    int index;
    int stamp;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.index > b.index;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  double base = objective(chosen);
  for (int u = 0; u < num_sources; ++u) {
    SeedSet trial{u};
    heap.push({objective(trial) - base, u, 0});
  }
  for (int round = 0; round < budget; ++round) {
    while (true) {
      Entry top = heap.top();
      heap.pop();
      if (top.stamp == static_cast<int>(chosen.size())) {
        chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), top.index), top.index);
        base += top.gain;
        break;
      }
      SeedSet trial = chosen;
      trial.insert(std::lower_bound(trial.begin(), trial.end(), top.index), top.index);
      heap.push({objective(trial) - base, top.index, static_cast<int>(chosen.size())});
    }
  }
  return chosen;
}

/// Exhaustive optimum over all seed sets of size <= budget; ties resolve to
/// the lexicographically smallest set. Intended for audits at desk scale.
inline std::pair<SeedSet, double> brute_force_best(const BipartiteInstance& instance, int budget,
                                                   const MeanMatrix& p) {
  const int n = instance.sources();
  if (n > 15)
    throw std::invalid_argument("brute_force_best: instance too large (" + std::to_string(n) +
                                " sources, limit 15)");
  if (budget < 0 || budget > n) throw std::invalid_argument("brute_force_best: bad budget");
  SeedSet best_set;
  double best_value = 0.0;  // the empty set scores 0
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) > budget) continue;
    SeedSet pi;
    for (int u = 0; u < n; ++u)
      if (mask & (1u << static_cast<unsigned>(u))) pi.push_back(u);
    const double value = coverage_reward(p, instance.targets(), pi);
    if (value > best_value ||
        (value == best_value && std::lexicographical_compare(pi.begin(), pi.end(),
                                                             best_set.begin(), best_set.end()))) {
      best_set = pi;
      best_value = value;
    }
  }
  return {best_set, best_value};
}

}  // namespace cmabmt

#endif  // CMABMT_PMC_GD_HPP
