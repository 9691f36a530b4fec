#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace otp {

/// Counter-based pseudo-random generator (SplitMix64 core). Output i is
/// mix(seed + i*gamma), so the stream is a pure function of (seed, counter)
/// and identical on every platform; std::normal_distribution and friends are
/// implementation-defined and would break bitwise reproducibility.
///
/// split(key) derives an independent child stream from the original seed and
/// the key only, never from the current counter, so the layout of draws in
/// one stream cannot perturb another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (explicit formula, not the stdlib
  /// distribution, for cross-platform determinism).
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Independent derived stream. Distinct keys give distinct streams; the
  /// parent's draw position does not matter.
  [[nodiscard]] Rng split(std::uint64_t key) const {
    return Rng(mix(seed_ + kGamma * (2 * key + 1)) ^ 0x5851F42D4C957F2DULL);
  }

  Eigen::VectorXd gaussian_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = next_gaussian();
    return v;
  }

  /// Gaussian direction normalized to unit length.
  Eigen::VectorXd unit_vector(int n) {
    for (;;) {
      Eigen::VectorXd v = gaussian_vector(n);
      double norm = v.norm();
      if (norm > 1e-30) return v / norm;
    }
  }

  /// Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace otp
