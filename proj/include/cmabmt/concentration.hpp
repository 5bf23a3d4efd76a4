#ifndef CMABMT_CONCENTRATION_HPP
#define CMABMT_CONCENTRATION_HPP

// Confidence-radius formulas shared by the oracles and the coverage audits.
// Everything here is a pure function of its arguments.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "cmabmt/framework.hpp"

namespace cmabmt {

/// The log factor appearing inside radii, e.g. log(S*A*H*T/delta') for the
/// transition radii. Always non-negative.
class LogTerm {
 public:
  LogTerm() = default;
  explicit LogTerm(double value) : value_(value) {
    if (!(value >= 0.0)) throw std::invalid_argument("LogTerm: negative value");
  }

  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

inline LogTerm rl_log_term(int states, int actions, int horizon, std::int64_t rounds,
                           double delta_prime) {
  return LogTerm(std::log(static_cast<double>(states) * actions * horizon *
                          static_cast<double>(rounds) / delta_prime));
}

inline LogTerm pmc_log_term(int sources, int targets, std::int64_t rounds, double delta_prime) {
  return LogTerm(std::log(static_cast<double>(sources) * targets *
                          static_cast<double>(rounds) / delta_prime));
}

/// L1 deviation radius for an empirical d-outcome categorical distribution:
/// sqrt(2 d log_term / n). n = 0 yields the infinite sentinel.
inline double l1_multinoulli_radius(int dim, std::int64_t n, double log_term) {
  if (dim < 1) throw std::invalid_argument("l1_multinoulli_radius: dim must be >= 1");
  if (log_term < 0.0) throw std::invalid_argument("l1_multinoulli_radius: negative log term");
  if (n < 0) throw std::invalid_argument("l1_multinoulli_radius: negative counter");
  if (n == 0) return kInfiniteRadius;
  return std::sqrt(2.0 * static_cast<double>(dim) * log_term / static_cast<double>(n));
}

/// Bernstein radius for a single Bernoulli entry with true mean p_entry:
/// sqrt(p(1-p) L / n) + L/n. Takes the true p, so it is audit-plane only.
inline double bernstein_entry_radius(double p_entry, std::int64_t n, double log_term) {
  if (!(p_entry >= 0.0 && p_entry <= 1.0))
    throw std::invalid_argument("bernstein_entry_radius: p outside [0,1]");
  if (log_term < 0.0) throw std::invalid_argument("bernstein_entry_radius: negative log term");
  if (n < 0) throw std::invalid_argument("bernstein_entry_radius: negative counter");
  if (n == 0) return kInfiniteRadius;
  const double dn = static_cast<double>(n);
  return std::sqrt(p_entry * (1.0 - p_entry) * log_term / dn) + log_term / dn;
}

inline void check_simplex(std::span<const double> dist, const char* who) {
  double sum = 0.0;
  for (double v : dist) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(who) + ": negative mass");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": distribution does not sum to 1");
}

inline double mean_under(std::span<const double> dist, std::span<const double> values) {
  double m = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) m += dist[i] * values[i];
  return m;
}

/// Var_{x ~ dist}(values[x]) = E[v^2] - (E[v])^2. Tiny negative results from
/// cancellation are clamped to 0.
inline double empirical_variance(std::span<const double> dist, std::span<const double> values) {
  if (dist.size() != values.size())
    throw std::invalid_argument("empirical_variance: size mismatch");
  check_simplex(dist, "empirical_variance");
  double m = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    m += dist[i] * values[i];
    m2 += dist[i] * values[i] * values[i];
  }
  const double var = m2 - m * m;
  return var > 0.0 ? var : 0.0;
}

/// Variance-aware exploration bonus built from an upper table v_upper and a
/// lower table v_lower of future values:
///
///   2 sqrt(Var_{p_hat}(v_upper) L / n)
/// + 2 sqrt(E_{p_hat}[(v_upper - v_lower)^2] L / n)
/// + 5 H L / n.
///
/// n = 0 yields the infinite sentinel before p_hat is read, so the all-zero
/// placeholder row of an unobserved arm is acceptable there.
inline double variance_aware_bonus(std::span<const double> p_hat, std::span<const double> v_upper,
                                   std::span<const double> v_lower, std::int64_t n, LogTerm log_term,
                                   int horizon) {
  if (v_upper.size() != v_lower.size() || p_hat.size() != v_upper.size())
    throw std::invalid_argument("variance_aware_bonus: size mismatch");
  for (std::size_t i = 0; i < v_upper.size(); ++i)
    if (v_lower[i] > v_upper[i] + 1e-12)
      throw std::invalid_argument("variance_aware_bonus: v_lower exceeds v_upper");
  if (n < 0) throw std::invalid_argument("variance_aware_bonus: negative counter");
  if (n == 0) return kInfiniteRadius;
  check_simplex(p_hat, "variance_aware_bonus");

  const double dn = static_cast<double>(n);
  const double var = empirical_variance(p_hat, v_upper);
  double gap_sq = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const double g = v_upper[i] - v_lower[i];
    gap_sq += p_hat[i] * g * g;
  }
  const double ell = log_term.value();
  return 2.0 * std::sqrt(var * ell / dn) + 2.0 * std::sqrt(gap_sq * ell / dn) +
         5.0 * static_cast<double>(horizon) * ell / dn;
}

}  // namespace cmabmt

#endif  // CMABMT_CONCENTRATION_HPP
