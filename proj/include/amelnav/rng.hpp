#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "amelnav/math_util.hpp"

namespace amelnav {

// Seeded random source used everywhere reproducibility matters. The
// distribution transforms are implemented here (rather than through
// std::uniform_*_distribution) so that the stream of values is a pure
// function of the mt19937_64 engine state and survives checkpointing.
class RandomEngine {
 public:
  explicit RandomEngine(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int_range(int lo, int hi) {
    return lo + uniform_int(hi - lo + 1);
  }

  /// Standard normal via Box-Muller. Consumes two draws, keeps no cache so
  /// the engine state alone determines the stream.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  std::string state() const {
    std::ostringstream oss;
    oss << engine_;
    return oss.str();
  }

  void set_state(const std::string& s) {
    std::istringstream iss(s);
    iss >> engine_;
  }

  bool operator==(const RandomEngine& other) const {
    return engine_ == other.engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace amelnav
