#pragma once

// Zonotopes <c, G> = { c + G*beta | beta in [-1,1]^q } and the operations the
// training pipeline needs: exact affine maps and Minkowski sums, a sound
// inner-product enclosure, interval hulls, box splitting, and the scalar
// factor-band constraint used to prune regions of the zero-level set.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nbc/errors.hpp"
#include "nbc/interval.hpp"
#include "nbc/linalg.hpp"

namespace nbc {

template <class S>
struct BasicZonotope {
  Vec<S> center;
  Matrix<S> generators;  // dim x q, q >= 0

  int dim() const { return static_cast<int>(center.size()); }
  int num_generators() const { return generators.cols(); }
};

using Zonotope = BasicZonotope<double>;

// Construction entry point: all-zero generator columns are dropped here (and
// only here; the propagation operators keep columns positionally stable).
inline Zonotope make_zonotope(Vec<double> center, const Matrix<double>& gens) {
  const int n = static_cast<int>(center.size());
  if (!gens.empty() && gens.rows() != n)
    throw InvalidInputError("make_zonotope: generator matrix must have dim rows");
  std::vector<int> keep;
  for (int j = 0; j < gens.cols(); ++j) {
    bool nonzero = false;
    for (int i = 0; i < n; ++i)
      if (gens(i, j) != 0.0) { nonzero = true; break; }
    if (nonzero) keep.push_back(j);
  }
  Zonotope z;
  z.center = std::move(center);
  z.generators = Matrix<double>(n, static_cast<int>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j)
    for (int i = 0; i < n; ++i) z.generators(i, static_cast<int>(j)) = gens(i, keep[j]);
  return z;
}

inline Zonotope point_zonotope(Vec<double> center) {
  Zonotope z;
  const int n = static_cast<int>(center.size());
  z.center = std::move(center);
  z.generators = Matrix<double>(n, 0);
  return z;
}

// Box as a zonotope: midpoint center, one diagonal generator per
// non-degenerate dimension.
inline Zonotope zono_from_interval(const IntervalVector& box) {
  const int n = static_cast<int>(box.size());
  Vec<double> c(n);
  Matrix<double> g(n, n);
  for (int i = 0; i < n; ++i) {
    if (!box[i].valid()) throw InvalidInputError("zono_from_interval: interval with lo > hi");
    c[i] = box[i].mid();
    g(i, i) = box[i].rad();
  }
  return make_zonotope(std::move(c), g);
}

// Exact image W*Z + b.
template <class S>
BasicZonotope<S> affine_map(const Matrix<S>& w, const Vec<S>& b, const BasicZonotope<S>& z) {
  if (w.cols() != z.dim()) throw InvalidInputError("affine_map: W columns must match set dimension");
  if (static_cast<int>(b.size()) != w.rows())
    throw InvalidInputError("affine_map: offset length must match W rows");
  BasicZonotope<S> out;
  out.center = vec_add(matvec(w, z.center), b);
  out.generators = z.num_generators() == 0 ? Matrix<S>(w.rows(), 0) : matmul(w, z.generators);
  return out;
}

// Exact image W^T * Z (no offset).
template <class S>
BasicZonotope<S> affine_map_transposed(const Matrix<S>& w, const BasicZonotope<S>& z) {
  if (w.rows() != z.dim())
    throw InvalidInputError("affine_map_transposed: W rows must match set dimension");
  BasicZonotope<S> out;
  out.center = matvec_transposed(w, z.center);
  out.generators =
      z.num_generators() == 0 ? Matrix<S>(w.cols(), 0) : matmul_transposed(w, z.generators);
  return out;
}

// Exact Minkowski sum <c1+c2, [G1 G2]>.
template <class S>
BasicZonotope<S> minkowski_sum(const BasicZonotope<S>& a, const BasicZonotope<S>& b) {
  if (a.dim() != b.dim()) throw InvalidInputError("minkowski_sum: dimension mismatch");
  BasicZonotope<S> out;
  out.center = vec_add(a.center, b.center);
  const int n = a.dim(), qa = a.num_generators(), qb = b.num_generators();
  out.generators = Matrix<S>(n, qa + qb);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < qa; ++j) out.generators(i, j) = a.generators(i, j);
    for (int j = 0; j < qb; ++j) out.generators(i, qa + j) = b.generators(i, j);
  }
  return out;
}

// Sound enclosure of the inner product { x1^T x2 | x1 in Z1, x2 in Z2 } as a
// one-dimensional zonotope. Generator layout: [c1^T G2, G1^T c2, then the
// cross terms G1(.,j)^T G2 for j = 1..q1].
template <class S>
BasicZonotope<S> inner_product(const BasicZonotope<S>& a, const BasicZonotope<S>& b) {
  if (a.dim() != b.dim()) throw InvalidInputError("inner_product: dimension mismatch");
  const int n = a.dim(), qa = a.num_generators(), qb = b.num_generators();
  BasicZonotope<S> out;
  out.center.resize(1);
  out.center[0] = dot(a.center, b.center);
  out.generators = Matrix<S>(1, qb + qa + qa * qb);
  int col = 0;
  for (int j = 0; j < qb; ++j) {
    S acc(0.0);
    for (int i = 0; i < n; ++i) acc = acc + a.center[i] * b.generators(i, j);
    out.generators(0, col++) = acc;
  }
  for (int j = 0; j < qa; ++j) {
    S acc(0.0);
    for (int i = 0; i < n; ++i) acc = acc + a.generators(i, j) * b.center[i];
    out.generators(0, col++) = acc;
  }
  for (int j = 0; j < qa; ++j)
    for (int k = 0; k < qb; ++k) {
      S acc(0.0);
      for (int i = 0; i < n; ++i) acc = acc + a.generators(i, j) * b.generators(i, k);
      out.generators(0, col++) = acc;
    }
  return out;
}

// Sum of |G(i,.)| in ascending column order (bit-reproducible).
template <class S>
S row_abs_sum(const Matrix<S>& g, int i) {
  using std::abs;
  S acc(0.0);
  for (int j = 0; j < g.cols(); ++j) acc = acc + abs(g(i, j));
  return acc;
}

template <class S>
struct BoxBounds {
  Vec<S> lo, hi;
};

template <class S>
BoxBounds<S> hull_bounds(const BasicZonotope<S>& z) {
  BoxBounds<S> b;
  const int n = z.dim();
  b.lo.resize(n);
  b.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const S r = row_abs_sum(z.generators, i);
    b.lo[i] = z.center[i] - r;
    b.hi[i] = z.center[i] + r;
  }
  return b;
}

// Tight axis-aligned hull [c_i - sum_j |G_ij|, c_i + sum_j |G_ij|].
inline IntervalVector interval_hull(const Zonotope& z) {
  IntervalVector box(z.dim());
  for (int i = 0; i < z.dim(); ++i) {
    const double r = row_abs_sum(z.generators, i);
    box[i] = Interval{z.center[i] - r, z.center[i] + r};
  }
  return box;
}

inline std::vector<double> instantiate(const Zonotope& z, const std::vector<double>& beta) {
  if (static_cast<int>(beta.size()) != z.num_generators())
    throw InvalidInputError("instantiate: factor count mismatch");
  std::vector<double> x = z.center;
  for (int j = 0; j < z.num_generators(); ++j)
    for (int i = 0; i < z.dim(); ++i) x[i] += z.generators(i, j) * beta[j];
  return x;
}

template <class Rng>
std::vector<double> sample_member(const Zonotope& z, Rng& rng) {
  std::vector<double> beta(z.num_generators());
  for (auto& b : beta) b = 2.0 * std::ldexp(static_cast<double>(rng() >> 11), -53) - 1.0;
  return instantiate(z, beta);
}

namespace detail {
// For an axis-aligned box zonotope, returns per dimension the index of its
// generator column (or -1 when the dimension is degenerate). Throws if any
// column touches more than one dimension.
inline std::vector<int> box_columns(const Zonotope& z) {
  std::vector<int> col_of_dim(z.dim(), -1);
  for (int j = 0; j < z.num_generators(); ++j) {
    int row = -1;
    for (int i = 0; i < z.dim(); ++i) {
      if (z.generators(i, j) != 0.0) {
        if (row >= 0) throw InvalidInputError("expected an axis-aligned box zonotope");
        row = i;
      }
    }
    if (row >= 0) {
      if (col_of_dim[row] >= 0) throw InvalidInputError("expected an axis-aligned box zonotope");
      col_of_dim[row] = j;
    }
  }
  return col_of_dim;
}
}  // namespace detail

// Split an axis-aligned box zonotope into `parts` children of equal width
// along `dim`; their union is the input. A degenerate dimension yields a
// single copy.
inline std::vector<Zonotope> split_box(const Zonotope& z, int dim, int parts) {
  if (dim < 0 || dim >= z.dim()) throw InvalidInputError("split_box: dimension out of range");
  if (parts < 1) throw InvalidInputError("split_box: parts must be >= 1");
  const std::vector<int> cols = detail::box_columns(z);
  const int j = cols[dim];
  if (parts == 1 || j < 0) return {z};
  std::vector<Zonotope> children;
  children.reserve(parts);
  const double g = z.generators(dim, j);
  for (int p = 0; p < parts; ++p) {
    Zonotope child = z;
    const double m = -1.0 + (2.0 * p + 1.0) / parts;
    child.center[dim] += g * m;
    child.generators(dim, j) = g / parts;
    children.push_back(std::move(child));
  }
  return children;
}

// Scalar band constraint g . beta in [band.lo, band.hi] over beta in
// [-1,1]^q. An inverted band is treated as empty (infeasible).
struct FactorConstraint {
  Vec<double> coeffs;
  Interval band;
};

inline bool factor_feasible(const FactorConstraint& con) {
  if (!con.band.valid()) return false;
  double reach = 0.0;
  for (double g : con.coeffs) reach += std::abs(g);
  return con.band.lo <= reach && con.band.hi >= -reach;
}

// Tighten the factor box with interval constraint propagation: two full
// sweeps, each factor j updated against the others' current ranges. The
// result never excludes a feasible factor assignment.
inline IntervalVector factor_contract(const FactorConstraint& con) {
  if (!factor_feasible(con))
    throw ContractError("factor_contract: called on an infeasible constraint");
  const size_t q = con.coeffs.size();
  IntervalVector box(q, Interval{-1.0, 1.0});
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (size_t j = 0; j < q; ++j) {
      const double gj = con.coeffs[j];
      if (gj == 0.0) continue;
      Interval rest{0.0, 0.0};
      for (size_t k = 0; k < q; ++k) {
        if (k == j) continue;
        rest = rest + con.coeffs[k] * box[k];
      }
      const Interval target = con.band - rest;
      Interval scaled = (1.0 / gj) * target;
      scaled = Interval{std::max(scaled.lo, box[j].lo), std::min(scaled.hi, box[j].hi)};
      if (scaled.valid()) box[j] = scaled;
      // an inverted result can only come from rounding; keep the old range
    }
  }
  return box;
}

// Exact membership for two-dimensional zonotopes via their vertex polygon.
inline bool zonogon_contains(const Zonotope& z, const std::vector<double>& x, double tol = 1e-9) {
  if (z.dim() != 2) throw InvalidInputError("zonogon_contains: set must be two-dimensional");
  if (x.size() != 2) throw InvalidInputError("zonogon_contains: point must be two-dimensional");
  std::vector<std::pair<double, double>> gens;
  for (int j = 0; j < z.num_generators(); ++j) {
    double gx = z.generators(0, j), gy = z.generators(1, j);
    if (gx == 0.0 && gy == 0.0) continue;
    if (gy < 0.0 || (gy == 0.0 && gx < 0.0)) { gx = -gx; gy = -gy; }
    gens.emplace_back(gx, gy);
  }
  const double px = x[0] - z.center[0], py = x[1] - z.center[1];
  if (gens.empty()) return std::abs(px) <= tol && std::abs(py) <= tol;
  if (gens.size() == 1) {
    const auto [gx, gy] = gens[0];
    const double cross = gx * py - gy * px;
    const double t = (px * gx + py * gy) / (gx * gx + gy * gy);
    return std::abs(cross) <= tol * (1.0 + std::abs(gx) + std::abs(gy)) && t >= -1.0 - tol &&
           t <= 1.0 + tol;
  }
  std::sort(gens.begin(), gens.end(), [](const auto& a, const auto& b) {
    return std::atan2(a.second, a.first) < std::atan2(b.second, b.first);
  });
  // Counterclockwise boundary: walk up the right chain, then mirror.
  double sx = 0.0, sy = 0.0;
  for (const auto& [gx, gy] : gens) { sx += gx; sy += gy; }
  std::vector<std::pair<double, double>> poly;
  double vx = -sx, vy = -sy;
  poly.emplace_back(vx, vy);
  for (const auto& [gx, gy] : gens) {
    vx += 2.0 * gx;
    vy += 2.0 * gy;
    poly.emplace_back(vx, vy);
  }
  for (const auto& [gx, gy] : gens) {
    vx -= 2.0 * gx;
    vy -= 2.0 * gy;
    poly.emplace_back(vx, vy);
  }
  for (size_t i = 0; i + 1 < poly.size(); ++i) {
    const double ex = poly[i + 1].first - poly[i].first;
    const double ey = poly[i + 1].second - poly[i].second;
    const double cross = ex * (py - poly[i].second) - ey * (px - poly[i].first);
    if (cross < -tol * (1.0 + std::abs(ex) + std::abs(ey))) return false;
  }
  return true;
}

}  // namespace nbc
