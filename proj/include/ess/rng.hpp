#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace ess {

/// Deterministic random stream. Variate generation is written out explicitly
/// (rather than using std::uniform_real_distribution etc.) because the
/// standard leaves those algorithms implementation-defined and the engine's
/// checkpoint/determinism contract needs bit-identical draws everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; stateless (the second variate of the
  /// pair is discarded so serialization captures the full generator state).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(uniform() * n); }

  std::string state() const {
    std::ostringstream ss;
    ss << eng_;
    return ss.str();
  }

  void set_state(const std::string& s) {
    std::istringstream ss(s);
    ss >> eng_;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ess
