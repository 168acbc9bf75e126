#pragma once

// Deterministic randomness helpers. std::uniform_real_distribution is
// implementation-defined, so uniform doubles are derived from raw mt19937_64
// output; identical seeds give bit-identical streams on every platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace nbc {

inline constexpr const char* kRngId = "mt19937_64";

inline double uniform01(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng() >> 11), -53);  // [0, 1)
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Radical-inverse (Halton) low-discrepancy sequence.
inline double halton(uint64_t index, uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline std::vector<double> halton_point(uint64_t index, size_t dim) {
  static constexpr uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                        31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  std::vector<double> x(dim);
  for (size_t i = 0; i < dim; ++i) x[i] = halton(index, primes[i % 20]);
  return x;
}

}  // namespace nbc
