#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace rsma {

// Counter-based splittable generator. Each stream is a splitmix64 walk whose
// starting state is a hash of (base seed, stream index), so Monte Carlo
// samples can be generated in any order and still be bit-identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t derive(std::uint64_t base, std::uint64_t index) {
    // splitmix64 finalizer over the mixed pair
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static Rng split(std::uint64_t base, std::uint64_t index) {
    return Rng(derive(base, index));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1].
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard circularly-symmetric complex normal CN(0, 1): two independent
  // real normals scaled by sqrt(1/2), via Box-Muller.
  std::complex<double> cnormal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-std::log(u1));  // == sqrt(-2 ln u1) * sqrt(1/2)
    double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  std::complex<double> cnormal(double variance) {
    return std::sqrt(variance) * cnormal();
  }

 private:
  std::uint64_t state_;
};

}  // namespace rsma
