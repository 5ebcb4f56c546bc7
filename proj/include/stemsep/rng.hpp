// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace stemsep {

// Seeded RNG wrapper around mt19937_64. Uniform/normal draws are derived
// from raw 64-bit output so a given seed yields the same stream on every
// platform (std::*_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : eng_(seed), state_hash_(seed ^ 0x243f6a8885a308d3ULL) {}

  uint64_t raw() { return eng_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes two raw draws per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n). n must be positive.
  int64_t next_int(int64_t n) {
    return static_cast<int64_t>(uniform() * static_cast<double>(n)) % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Derives an independent stream; used to give each batch item its own rng.
  Rng fork(uint64_t stream) const {
    uint64_t z = state_hash_ ^ (stream + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::string serialize() const {
    std::ostringstream os;
    os << eng_;
    os << ' ' << (have_spare_ ? 1 : 0) << ' ' << spare_ << ' ' << state_hash_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    int spare_flag = 0;
    is >> spare_flag >> spare_ >> state_hash_;
    have_spare_ = spare_flag != 0;
    if (!is) throw std::runtime_error("Rng::deserialize: malformed state");
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
  uint64_t state_hash_ = 0;
};

}  // namespace stemsep
