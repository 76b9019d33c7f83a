#pragma once

#include <cstdint>
#include <random>

namespace jointspar {

// Deterministic random source. The generator is std::mt19937_64, whose bit
// stream is fully specified by the C++ standard, so identical seeds produce
// identical streams on every platform. Normal variates use the trigonometric
// Box-Muller transform on 53-bit uniforms:
//
//   u1 = ((x >> 11) + 1) * 2^-53   in (0, 1]
//   u2 = ((y >> 11)    ) * 2^-53   in [0, 1)
//   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
//
// Each pair of 64-bit draws yields two normals; the second is cached. Matrix
// fills consume the stream in row-major order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw.
  double normal();

  /// Uniform integer in [0, n), unbiased via rejection sampling.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Stateless child-seed derivation (splitmix64 output function), used to
  /// hand independent streams to trials, solver starts and parallel workers.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace jointspar
