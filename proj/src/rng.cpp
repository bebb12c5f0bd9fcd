#include "dyscreen/rng.hpp"

namespace dyscreen {

std::uint64_t Rng::below(std::uint64_t bound) {
  // reject the low tail so every residue is equally likely
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

int Rng::binomial(int n, double p) {
  int k = 0;
  for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
  return k;
}

}  // namespace dyscreen
