#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace iwfa {

// Deterministic random stream: mt19937_64 state, uniforms taken from the top
// 53 bits, gaussians via Box-Muller. distribution sampling is done by hand so
// output sequences do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Independent per-trial stream derived from (seed, stream) by splitmix64.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Modulo bias is negligible for the small n used here.
    return gen_() % n;
  }

  // Standard normal.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Circularly symmetric complex gaussian CN(0, variance).
  std::complex<double> cgaussian(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    return {s * gaussian(), s * gaussian()};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace iwfa
