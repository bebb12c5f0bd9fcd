#pragma once

#include <cstdint>
#include <random>

namespace dyscreen {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (seed, index, purpose).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                           std::uint64_t purpose = 0) noexcept {
  return splitmix64(splitmix64(seed ^ index) + purpose);
}

/// mt19937_64 with portable bounded draws (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound). bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  /// Sum of n Bernoulli(p) draws.
  int binomial(int n, double p);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dyscreen
