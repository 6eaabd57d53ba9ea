#pragma once

#include <cstdint>
#include <random>

namespace deid {

// Portable seeded generator. The engine is std::mt19937_64, whose output
// stream is fixed by the standard; the real-valued draws below are computed
// here rather than through <random> distributions, whose algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n) by rejection, n >= 1.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via the Box-Muller transform; the second variate of each
  // pair is cached.
  double normal();

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace deid
