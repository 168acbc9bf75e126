#pragma once

// Enclosure of the certificate's zero-level set { x in X | B(x) = 0 } as a
// union of axis-aligned boxes, by recursive splitting with preimage-based
// pruning: the output enclosure of a box constrains the input factors that
// can produce the value zero, so boxes whose factor band is empty provably
// contain no zero and are discarded; feasible boxes are contracted, re-boxed
// and split further.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "nbc/errors.hpp"
#include "nbc/network.hpp"
#include "nbc/zonotope.hpp"

namespace nbc {

struct ZeroParams {
  int iterations = 2;
  int splits = 4;
  int split_dims = 0;  // 0 = split along every dimension
  size_t max_boxes = size_t{1} << 16;

  int resolved_split_dims(int dim) const {
    return split_dims <= 0 ? dim : std::min(split_dims, dim);
  }

  void validate(int dim) const {
    if (iterations < 1) throw InvalidInputError("zero-set params: iterations must be >= 1");
    if (splits < 1) throw InvalidInputError("zero-set params: splits must be >= 1");
    if (split_dims > dim)
      throw InvalidInputError("zero-set params: split dimensions exceed the system dimension");
    if (max_boxes < 1) throw InvalidInputError("zero-set params: box cap must be >= 1");
  }
};

// The cover boxes are stored as flat lo/hi pairs: refined covers can run to
// millions of boxes and per-box containers would dominate memory.
struct ZeroCover {
  int dim = 0;
  std::vector<double> bounds;  // 2*dim entries per box
  int iterations_used = 0;
  int64_t discarded_count = 0;

  size_t size() const { return dim == 0 ? 0 : bounds.size() / (2 * dim); }

  IntervalVector box(size_t i) const {
    IntervalVector b(dim);
    const double* p = bounds.data() + 2 * dim * i;
    for (int d = 0; d < dim; ++d) b[d] = Interval{p[2 * d], p[2 * d + 1]};
    return b;
  }

  Zonotope box_zonotope(size_t i) const { return zono_from_interval(box(i)); }

  void push(const IntervalVector& b) {
    for (const auto& iv : b) {
      bounds.push_back(iv.lo);
      bounds.push_back(iv.hi);
    }
  }

  // Lexicographic order by center, then by radius; evaluation order of the
  // cover is then independent of how the recursion visited the boxes.
  void sort_canonical() {
    const size_t stride = 2 * static_cast<size_t>(dim);
    const size_t n = size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const double* pa = bounds.data() + stride * a;
      const double* pb = bounds.data() + stride * b;
      for (int d = 0; d < dim; ++d) {
        const double ca = pa[2 * d] + pa[2 * d + 1], cb = pb[2 * d] + pb[2 * d + 1];
        if (ca != cb) return ca < cb;
      }
      for (size_t k = 0; k < stride; ++k)
        if (pa[k] != pb[k]) return pa[k] < pb[k];
      return false;
    });
    std::vector<double> sorted(bounds.size());
    for (size_t i = 0; i < n; ++i)
      std::copy_n(bounds.data() + stride * order[i], stride, sorted.data() + stride * i);
    bounds.swap(sorted);
  }
};

// Scalar preimage constraint for the output value zero: with the output
// enclosure <c_y, G_y> of a box with q0 input generators, a zero at input
// factors beta requires  g . beta in [-c_y - r, -c_y + r], where g is the
// first q0 generator entries and r the magnitude sum of the appended ones.
template <class S>
FactorConstraint preimage_constraint_of_output(const BasicZonotope<S>& y, int input_generators) {
  FactorConstraint con;
  con.coeffs.resize(input_generators);
  for (int j = 0; j < input_generators; ++j) con.coeffs[j] = value_of(y.generators(0, j));
  double rest = 0.0;
  for (int j = input_generators; j < y.num_generators(); ++j)
    rest += std::abs(value_of(y.generators(0, j)));
  const double c = value_of(y.center[0]);
  con.band = Interval{-c - rest, -c + rest};
  return con;
}

inline FactorConstraint preimage_constraint(const Network& net, const Zonotope& box_set) {
  const auto [y, trace] = forward_set(net, box_set);
  return preimage_constraint_of_output(y, trace.input_generators);
}

namespace detail {

struct ZeroSearch {
  const Network* net = nullptr;
  ZeroParams params;
  int dim = 0;
  int children_per_box = 1;
  ZeroCover cover;

  void visit(const IntervalVector& box, int depth) {
    const Zonotope z = zono_from_interval(box);
    const FactorConstraint con = preimage_constraint(*net, z);
    if (!factor_feasible(con)) {
      ++cover.discarded_count;
      return;
    }
    if (depth == params.iterations) {
      if (cover.size() >= params.max_boxes)
        throw ResourceLimitError(
            "zero-set enclosure exceeded the box cap (" + std::to_string(params.max_boxes) +
            ") with iterations=" + std::to_string(params.iterations) +
            ", splits=" + std::to_string(params.splits) +
            ", split_dims=" + std::to_string(params.resolved_split_dims(dim)));
      cover.push(box);
      return;
    }

    // Contract the factor box and map it back to state space; re-boxing only
    // grows the set, so no zero is lost.
    const IntervalVector factors = factor_contract(con);
    IntervalVector shrunk = box;
    int col = 0;
    for (int d = 0; d < dim; ++d) {
      const double rad = z.generators.cols() > col ? z.generators(d, col) : 0.0;
      if (rad == 0.0) continue;  // degenerate dimension has no generator column
      const double mid = z.center[d];
      const double lo = std::clamp(mid + rad * factors[col].lo, box[d].lo, box[d].hi);
      const double hi = std::clamp(mid + rad * factors[col].hi, box[d].lo, box[d].hi);
      shrunk[d] = Interval{lo, hi};
      ++col;
    }

    // Split into `splits` equal parts along each of the widest dimensions;
    // ties resolve to the lowest index, zero-width dimensions never split.
    const int want = params.resolved_split_dims(dim);
    std::vector<int> dims_by_width(dim);
    for (int d = 0; d < dim; ++d) dims_by_width[d] = d;
    std::stable_sort(dims_by_width.begin(), dims_by_width.end(), [&](int a, int b) {
      return shrunk[a].width() > shrunk[b].width();
    });
    std::vector<int> split_dims;
    for (int d : dims_by_width) {
      if (static_cast<int>(split_dims.size()) == want) break;
      if (shrunk[d].width() > 0.0) split_dims.push_back(d);
    }

    IntervalVector child = shrunk;
    enumerate_children(shrunk, split_dims, 0, child, con, z, depth);
  }

  void enumerate_children(const IntervalVector& shrunk, const std::vector<int>& dims, size_t level,
                          IntervalVector& child, const FactorConstraint& parent_con,
                          const Zonotope& parent_box, int depth) {
    if (level == dims.size()) {
      if (!child_band_feasible(parent_con, parent_box, child)) {
        ++cover.discarded_count;
        return;
      }
      visit(child, depth + 1);
      return;
    }
    const int d = dims[level];
    const double lo = shrunk[d].lo, w = shrunk[d].width() / params.splits;
    for (int p = 0; p < params.splits; ++p) {
      child[d] = Interval{lo + p * w, p + 1 == params.splits ? shrunk[d].hi : lo + (p + 1) * w};
      enumerate_children(shrunk, dims, level + 1, child, parent_con, parent_box, depth);
    }
    child[d] = shrunk[d];
  }

  // Cheap sound pre-filter: a child inherits the parent's constraint on the
  // parent's factors, restricted to the child's factor ranges. If the band
  // is unreachable there, the child cannot contain a zero.
  bool child_band_feasible(const FactorConstraint& con, const Zonotope& parent,
                           const IntervalVector& child) const {
    double lo = 0.0, hi = 0.0;
    int col = 0;
    for (int d = 0; d < dim; ++d) {
      if (parent.generators.cols() <= col) break;
      const double rad = parent.generators(d, col);
      if (rad == 0.0) continue;
      const double g = con.coeffs[col];
      const double blo = (child[d].lo - parent.center[d]) / rad;
      const double bhi = (child[d].hi - parent.center[d]) / rad;
      const Interval r = g * Interval{std::min(blo, bhi), std::max(blo, bhi)};
      lo += r.lo;
      hi += r.hi;
      ++col;
    }
    const double slack = 1e-12 * (1.0 + std::abs(con.band.lo) + std::abs(con.band.hi));
    return lo <= con.band.hi + slack && hi >= con.band.lo - slack;
  }
};

}  // namespace detail

// Enclose the zero-level set of the network over the state space X. The
// result is sound: no discarded region contains a zero of the certificate,
// so every zero in X lies in the union of the returned boxes.
inline ZeroCover enclose_zero_set(const Network& net, const IntervalVector& X,
                                  const ZeroParams& params) {
  const int dim = static_cast<int>(X.size());
  if (net.input_dim() != dim)
    throw InvalidInputError("enclose_zero_set: network and state space dimensions differ");
  params.validate(dim);
  detail::ZeroSearch search;
  search.net = &net;
  search.params = params;
  search.dim = dim;
  search.cover.dim = dim;
  search.cover.iterations_used = params.iterations;
  search.visit(X, 0);
  search.cover.sort_canonical();
  return search.cover;
}

}  // namespace nbc
