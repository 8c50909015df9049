#pragma once

#include <cstdint>
#include <random>

#include "fracspec/common.hpp"

namespace fracspec {

// Seeded generator used everywhere randomness appears.  Reports record the
// seed; identical seeds reproduce identical streams.  Floating point values
// are derived from raw 64-bit draws so the stream does not depend on
// library distribution internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed), seed_mix_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double m = std::sqrt(-2.0 * std::log(u1));
    spare_ = m * std::sin(2.0 * pi * u2);
    have_spare_ = true;
    return m * std::cos(2.0 * pi * u2);
  }

  complexd normal_complex() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  // Independent child stream, stable under reordering of sibling draws.
  Rng child(std::uint64_t salt) const {
    std::uint64_t z = seed_mix_ + salt * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return Rng(z ^ (z >> 31));
  }

private:
  std::mt19937_64 eng_;
  std::uint64_t seed_mix_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fracspec
