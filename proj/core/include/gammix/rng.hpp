#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace gammix {

/// Portable random stream. std::mt19937_64 is fully specified by the standard,
/// and every variate below is generated here rather than through the
/// implementation-defined <random> distributions, so streams are bit-identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x5eedULL) : engine_(seed) {}

  /// Stream `index` of master seed `seed`: the engine is seeded with
  /// splitmix64(seed ^ splitmix64(index + 1)).
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Gamma(shape, rate = 1), Marsaglia-Tsang with the U^(1/shape) boost below 1.
  double gamma(double shape);
  double gamma(double shape, double rate) { return gamma(shape) / rate; }
  double beta(double a, double b);
  double exponential() { return -std::log(uniform()); }
  /// Index drawn with probability proportional to weights[k].
  template <typename Range>
  std::size_t categorical(const Range& weights, double total);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

template <typename Range>
std::size_t Rng::categorical(const Range& weights, double total) {
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t k = 0;
  std::size_t last_positive = 0;
  for (double w : weights) {
    if (w > 0.0) last_positive = k;
    acc += w;
    if (target < acc) return k;
    ++k;
  }
  return last_positive;
}

}  // namespace gammix
