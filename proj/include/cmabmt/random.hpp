#ifndef CMABMT_RANDOM_HPP
#define CMABMT_RANDOM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace cmabmt {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator. The stream is a pure function of the seed and the
/// identifiers it was derived with, so a draw for (seed, round, arm, step)
/// never depends on how many draws happened elsewhere.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed + kGamma)) {}

  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
      : key_(mix64(seed + kGamma)) {
    for (std::uint64_t id : ids) key_ = mix64(key_ ^ (id + kGamma));
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Inverse-CDF draw; any mass deficit falls through to the last index.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  /// Exp(1) variate.
  double exponential() { return -std::log1p(-uniform()); }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Derives an independent stream from (seed, a, b, c, d).
inline CounterRng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0, std::uint64_t d = 0) {
  return CounterRng(seed, {a, b, c, d});
}

}  // namespace cmabmt

#endif  // CMABMT_RANDOM_HPP
