#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace bearsim {

/// SplitMix64 generator (Steele, Lea, Flood; public-domain reference
/// algorithm). Chosen over std::mt19937_64 so that seeded draws are
/// reproducible bit-for-bit from the documented recurrence alone.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Vector of (uniform01 - 0.5) * scale entries, drawn componentwise.
  Eigen::VectorXd centered_uniform(Eigen::Index size, double scale) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      v[i] = (uniform01() - 0.5) * scale;
    }
    return v;
  }

private:
  std::uint64_t state_;
};

}  // namespace bearsim
