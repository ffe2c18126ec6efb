#include "eclat/rng.hpp"

#include <cmath>

namespace eclat {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
  std::uint64_t state = base ^ (tag * 0xd1342543de82ef95ULL);
  splitmix64(state);
  return splitmix64(state);
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  __extension__ using u128 = unsigned __int128;
  std::uint64_t x = engine_();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = engine_();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::exponential(double rate) noexcept {
  return -std::log(uniform_open_zero()) / rate;
}

}  // namespace eclat
