#pragma once

#include <cmath>
#include <cstdint>

namespace zapsa {

// Counter-based generator (SplitMix64 core). Chosen over <random> engines so
// that trajectories are bit-identical across standard libraries, and so that
// independent streams can be derived from (seed, index) pairs: split(i) hashes
// the pair into a fresh state, which is the documented stream-splitting
// contract used for per-trial and per-path seeding.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on {0, ..., n-1}; n must be positive. Modulo bias is
  // below 2^-32 for the small n used here.
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via the polar (Marsaglia) method; one spare is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Derived stream for sub-task `index`; independent of further draws from
  // this generator.
  Rng split(std::uint64_t index) const {
    Rng probe(state_ ^ (0x2545f4914f6cdd1dULL * (index + 1)));
    return Rng(probe.next_u64());
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace zapsa
