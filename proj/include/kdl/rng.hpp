#pragma once

#include <cstdint>
#include <initializer_list>

namespace kdl {

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of words into one stream key. Order matters.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept;

/// Counter-based SplitMix64 stream. Draw i of the stream is a pure function of
/// (key, i), so trial streams never depend on scheduling.
class Stream {
 public:
  explicit Stream(std::uint64_t key) noexcept : state_(key) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1); never returns 0 so it is safe under log.
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on {1, ..., k} by rejection (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t k) noexcept;

  bool coin() noexcept { return (next_u64() >> 63) != 0; }

  /// Pair of independent N(0,1) draws (Box-Muller).
  void normal_pair(double& a, double& b) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace kdl
