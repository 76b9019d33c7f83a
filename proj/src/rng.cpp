#include "jointspar/rng.hpp"

#include <cmath>
#include <numbers>

namespace jointspar {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // (x >> 11) + 1 keeps u1 strictly positive so the log is finite.
  const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) return 0;
  // Reject draws from the final incomplete block of size 2^64 mod n.
  std::uint64_t x, v;
  do {
    x = gen_();
    v = x % n;
  } while (x - v > std::uint64_t(-1) - (n - 1));
  return v;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace jointspar
