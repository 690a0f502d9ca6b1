#pragma once

#include <cstdint>

namespace emma::sampler {

// Stateless counter-based generator: every variate is a pure function of
// (seed, step, slot, stream), so any batch can be reproduced without
// replaying the ones before it and workers never share state.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t step, std::uint64_t slot, std::uint64_t stream) const noexcept {
    std::uint64_t h = mix(seed_);
    h = mix(h ^ step);
    h = mix(h ^ slot);
    return mix(h ^ stream);
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t step, std::uint64_t slot, std::uint64_t stream) const noexcept {
    return static_cast<double>(bits(step, slot, stream) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace emma::sampler
