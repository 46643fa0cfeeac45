#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>

namespace sthawkes {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic generator. mt19937_64 output is bit-specified by the standard;
// the distribution helpers are hand-rolled because the <random> distribution
// classes are implementation-defined and would break byte-identical artifacts
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Stream for a worker (per-user trajectories etc.), derived from the master
  // seed so results do not depend on scheduling order.
  static Rng substream(uint64_t master_seed, uint64_t index) {
    return Rng(splitmix64(master_seed ^ splitmix64(index + 1)));
  }

  uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection sampled (unbiased).
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double exponential(double rate) {
    if (!(rate > 0)) throw std::invalid_argument("Rng::exponential: rate must be positive");
    return -std::log1p(-uniform()) / rate;
  }

  double normal(double mean, double sd) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return mean + sd * u * m;
  }

  // Draw an index proportional to non-negative weights.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0 || !std::isfinite(w)) throw std::invalid_argument("Rng::categorical: bad weight");
      total += w;
    }
    if (!(total > 0)) throw std::invalid_argument("Rng::categorical: all weights zero");
    double u = uniform() * total;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sthawkes
