#pragma once

#include <cmath>
#include <cstdint>

namespace npw {

// Counter-based stream RNG (SplitMix64 discipline).  A stream is keyed by
// (seed, stream index); draws walk a Weyl sequence through the SplitMix64
// finalizer, so a stream's output depends only on its key and never on
// execution order or thread placement.  Statistical quality is adequate for
// Monte Carlo averaging; this is not a cryptographic generator.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : state_(derive(seed, stream)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return finalize(state_);
  }

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal deviate, Box-Muller with one cached value
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692528676655900577 * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t s = seed ^ finalize(stream + 0x9e3779b97f4a7c15ull);
    return finalize(s + 0xbf58476d1ce4e5b9ull);
  }

  std::uint64_t state_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace npw
