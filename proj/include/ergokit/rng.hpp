#pragma once

#include <cstdint>
#include <random>

namespace ergokit {

/// SplitMix64 finalizer applied to master + (index + 1) * 0x9E3779B97F4A7C15:
///
///   z = master + (index + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Used to derive independent per-trajectory seeds, so any trajectory can be
/// regenerated without touching the others.
constexpr std::uint64_t mix64(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Caller-owned generator state. mt19937_64's output sequence is fixed by
/// the standard; the real-valued transforms below are written out here
/// rather than taken from <random> so draws are identical on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal, Marsaglia polar method; the second variate of each
  /// pair is kept for the next call.
  double normal();

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the U^(1/shape) boost for
  /// shape < 1.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ergokit
