#include "kdl/rng.hpp"

#include <cmath>
#include <numbers>

namespace kdl {

std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

std::uint64_t Stream::uniform_int(std::uint64_t k) noexcept {
  if (k <= 1) return 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return 1 + x % k;
}

void Stream::normal_pair(double& a, double& b) noexcept {
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  a = r * std::cos(phase);
  b = r * std::sin(phase);
}

}  // namespace kdl
