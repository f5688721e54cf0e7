#pragma once

// Shared helpers for the test suites: a small deterministic generator and
// seeded random matrices. Kept independent of the library's scenario
// generator so tests do not lean on the code under test.

#include <cmath>
#include <cstdint>
#include <vector>

#include "corec/linalg.hpp"

namespace testutil {

// splitmix64; fixed across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() {  // [0,1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    // Box-Muller; u1 in (0,1].
    const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

inline corec::Matrix random_matrix(Rng& rng, std::size_t n,
                                   corec::Field field = corec::Field::Real) {
  corec::Matrix m(n, n, field);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double re = rng.gaussian();
      const double im = (field == corec::Field::Complex) ? rng.gaussian() : 0.0;
      m.at(i, j) = corec::cxd(re, im);
    }
  }
  return m;
}

// Random matrix rescaled to a given spectral norm.
inline corec::Matrix random_with_norm(Rng& rng, std::size_t n, double norm,
                                      corec::Field field = corec::Field::Real) {
  corec::Matrix m = random_matrix(rng, n, field);
  const double s = corec::op_norm(m, corec::NormKind::Spectral);
  return corec::mat_scale(m, norm / s);
}

// Random invertible matrix with modest condition number: I + small noise.
inline corec::Matrix random_well_conditioned(Rng& rng, std::size_t n,
                                             corec::Field field = corec::Field::Real) {
  corec::Matrix noise = random_with_norm(rng, n, 0.5, field);
  return corec::mat_add(corec::Matrix::identity(n, field), noise);
}

}  // namespace testutil
