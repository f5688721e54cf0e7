#pragma once

// Deterministic counter-based generator used for perturbation sampling
// and evaluation-set draws. Bit-exact across platforms: every value is a
// pure function of (seed, stream, counter); see README for the exact
// algorithm so runs can be reproduced outside this library.

#include <cmath>
#include <cstdint>

namespace corec {

inline std::uint64_t sm64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Word at (seed, stream, counter).
inline std::uint64_t rng_word(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
  return sm64_mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1) +
                  0xD1B54A32D192ED03ull * (counter + 1));
}

// Uniform in [0,1): top 53 bits of the word.
inline double rng_uniform(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
  return double(rng_word(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Standard Gaussian via Box-Muller on the word pair (2i, 2i+1); the
// first uniform is shifted into (0,1] so the log is finite.
inline double rng_gaussian(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t pair_index) {
  const double u1 =
      double((rng_word(seed, stream, 2 * pair_index) >> 11) + 1) * 0x1.0p-53;
  const double u2 = rng_uniform(seed, stream, 2 * pair_index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace corec
