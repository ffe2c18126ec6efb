#pragma once

#include <cstdint>
#include <random>

namespace eclat {

/// SplitMix64 step; used to derive independent stream seeds from one seed.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Mixes a base seed with a stream tag into a fresh 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept;

/// Deterministic random stream. Variates are produced from raw mt19937_64
/// output by explicit inverse transforms, so a seed reproduces the same
/// sequence on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }

  /// Uniform integer on [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Exponential with the given rate.
  double exponential(double rate) noexcept;

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eclat
