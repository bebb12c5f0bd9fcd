#pragma once

#include <cstddef>
#include <cstdint>

#include "dyscreen/types.hpp"

namespace dyscreen {

struct SynthOptions {
  std::size_t n = 2000;
  double prevalence = 0.108;
  /// Downward shift of the dyslexia class's per-question hit probability. 0 makes the classes
  /// indistinguishable; 1 makes every dyslexia hit count zero.
  double separation = 0.15;
  std::uint64_t seed = 7;
  AgeVariant variant = AgeVariant::full();
};

/// Number of positives: n * prevalence rounded half away from zero.
std::size_t synth_positive_count(std::size_t n, double prevalence);

/// Class-conditional generator of labeled feature rows. Throws DataError for n < 10,
/// prevalence outside (0,1), separation outside [0,1], or a count that leaves a class empty.
Dataset synth_generate(const SynthOptions& options);

}  // namespace dyscreen
