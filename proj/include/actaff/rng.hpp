#pragma once

#include "actaff/types.hpp"

#include <cmath>
#include <random>

namespace actaff {

// Deterministic random source: all draws are derived from the raw mt19937_64
// stream with fixed arithmetic, so outputs are identical across platforms and
// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  Scalar uniform() {
    return static_cast<Scalar>(eng_() >> 11) * 0x1.0p-53;
  }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(eng_()) * static_cast<unsigned>(n)) >>
        64));
  }

  // Standard normal via Box-Muller; the spare value is replayed.
  Scalar normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    Scalar u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const Scalar u2 = uniform();
    const Scalar r = std::sqrt(-2.0 * std::log(u1));
    const Scalar a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Index drawn from unnormalized non-negative weights.
  int categorical(const Vec& weights) {
    const Scalar total = weights.sum();
    Scalar u = uniform() * total;
    for (int k = 0; k < weights.size(); ++k) {
      u -= weights[k];
      if (u < 0) return k;
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 eng_;
  Scalar spare_ = 0;
  bool has_spare_ = false;
};

} // namespace actaff
