#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scorecal {

/// Deterministic random stream. All variate transforms are implemented here
/// rather than with std:: distributions so that identical seeds produce
/// identical streams on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Two uniforms are consumed per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) {
    return -std::log(1.0 - uniform()) / rate;
  }

  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t next_index(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Seed for an independent substream, derived from the master seed and a
/// stream index. Work items (calibration datasets, replicates) each get their
/// own substream so results do not depend on the execution schedule.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(seed ^ detail::splitmix64(stream));
}

}  // namespace scorecal
