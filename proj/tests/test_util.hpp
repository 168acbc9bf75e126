#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "nbc/linalg.hpp"
#include "nbc/rng.hpp"
#include "nbc/zonotope.hpp"

namespace nbc::testutil {

inline double rand_in(std::mt19937_64& rng, double lo, double hi) {
  return uniform(rng, lo, hi);
}

inline Vec<double> rand_vector(std::mt19937_64& rng, int n, double scale = 2.0) {
  Vec<double> v(n);
  for (auto& x : v) x = rand_in(rng, -scale, scale);
  return v;
}

inline Matrix<double> rand_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 2.0) {
  Matrix<double> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rand_in(rng, -scale, scale);
  return m;
}

inline Zonotope rand_zonotope(std::mt19937_64& rng, int dim, int q, double scale = 2.0) {
  Zonotope z;
  z.center = rand_vector(rng, dim, scale);
  z.generators = rand_matrix(rng, dim, q, scale);
  return z;
}

inline std::vector<double> rand_factors(std::mt19937_64& rng, int q) {
  std::vector<double> beta(q);
  for (auto& b : beta) b = rand_in(rng, -1.0, 1.0);
  return beta;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::vector<double> sample_in_box(const nbc::IntervalVector& box, std::mt19937_64& rng) {
  std::vector<double> x(box.size());
  for (size_t i = 0; i < box.size(); ++i) x[i] = uniform(rng, box[i].lo, box[i].hi);
  return x;
}

// Bisect along the chord from a to b until |f| <= tol; requires a sign change.
template <class F>
std::vector<double> chord_bisect(F&& f, std::vector<double> a, std::vector<double> b,
                                 double tol = 1e-10) {
  double fa = f(a);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> mid(a.size());
    for (size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
    const double fm = f(mid);
    if (std::abs(fm) <= tol) return mid;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return a;
}

}  // namespace nbc::testutil
