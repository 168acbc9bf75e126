#pragma once

// Continuous dynamical systems dx/dt = f(x) on a compact state space, given
// as one expression per coordinate, together with initial and unsafe sets.
// Exactly linear systems additionally carry their system matrix so the flow
// of a set can be computed as an exact affine image; all other systems are
// enclosed by interval range bounding over a split hull.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nbc/errors.hpp"
#include "nbc/expr.hpp"
#include "nbc/interval.hpp"
#include "nbc/zonotope.hpp"

namespace nbc {

struct SystemSpec {
  std::string name;
  int dim = 0;
  std::vector<Expr> dynamics;
  std::vector<std::string> dynamics_src;
  IntervalVector state_space;
  std::vector<Zonotope> initial_sets;
  std::vector<Zonotope> unsafe_sets;
  // System matrix for exactly linear dynamics (f(x) = A x).
  std::optional<Matrix<double>> linear;

  bool is_linear() const { return linear.has_value(); }

  std::vector<double> flow_at(const std::vector<double>& x) const {
    std::vector<double> scratch;
    return flow_at(x, scratch);
  }

  std::vector<double> flow_at(const std::vector<double>& x, std::vector<double>& scratch) const {
    std::vector<double> f(dim);
    for (int i = 0; i < dim; ++i) f[i] = dynamics[i].eval(x, scratch);
    return f;
  }
};

// Initial sets must live inside the state space. Unsafe sets only need to
// intersect it: a benchmark may over-approximate its unsafe region with a
// zonotope that pokes outside the state space, which merely strengthens the
// requirement on the certificate.
inline void validate_system(const SystemSpec& sys) {
  if (sys.dim < 1) throw InvalidInputError("system: dimension must be >= 1");
  if (static_cast<int>(sys.dynamics.size()) != sys.dim)
    throw InvalidInputError("system: dynamics length must equal the dimension");
  if (static_cast<int>(sys.state_space.size()) != sys.dim)
    throw InvalidInputError("system: state space must have one interval per dimension");
  for (const auto& iv : sys.state_space)
    if (!iv.valid()) throw InvalidInputError("system: state-space interval with lo > hi");
  if (sys.initial_sets.empty()) throw InvalidInputError("system: at least one initial set required");
  if (sys.unsafe_sets.empty()) throw InvalidInputError("system: at least one unsafe set required");
  for (const auto& z : sys.initial_sets) {
    if (z.dim() != sys.dim) throw InvalidInputError("system: initial set dimension mismatch");
    if (!box_contains_box(sys.state_space, interval_hull(z), 1e-9))
      throw InvalidInputError("system: initial set exceeds the state space");
  }
  for (const auto& z : sys.unsafe_sets) {
    if (z.dim() != sys.dim) throw InvalidInputError("system: unsafe set dimension mismatch");
    const auto hull = interval_hull(z);
    for (int i = 0; i < sys.dim; ++i)
      if (!hull[i].intersects(sys.state_space[i]))
        throw InvalidInputError("system: unsafe set does not intersect the state space");
  }
  if (sys.linear && (sys.linear->rows() != sys.dim || sys.linear->cols() != sys.dim))
    throw InvalidInputError("system: linear matrix must be dim x dim");
}

// Default number of hull splits used when enclosing the flow of a set.
inline int default_flow_subsplits(const SystemSpec& sys) { return sys.is_linear() ? 0 : 2; }

// Sound enclosure of { f(x) | x in Z }. Linear systems map exactly through
// the affine image A*Z. Otherwise the interval hull of Z is partitioned along
// its widest dimension into 2^subsplits sub-boxes, every dynamics component
// is range-bounded on each sub-box, and the union of the component ranges is
// returned as a box zonotope.
inline Zonotope flow_enclosure(const SystemSpec& sys, const Zonotope& z, int subsplits) {
  if (z.dim() != sys.dim) throw InvalidInputError("flow_enclosure: set dimension mismatch");
  if (subsplits < 0) throw InvalidInputError("flow_enclosure: subsplits must be >= 0");
  if (sys.is_linear()) return affine_map(*sys.linear, Vec<double>(sys.dim, 0.0), z);

  const IntervalVector hull = interval_hull(z);
  int widest = 0;
  for (int i = 1; i < sys.dim; ++i)
    if (hull[i].width() > hull[widest].width()) widest = i;

  const int pieces = 1 << subsplits;
  IntervalVector ranges(sys.dim);
  std::vector<Interval> scratch;
  IntervalVector sub = hull;
  const double w = hull[widest].width() / pieces;
  for (int p = 0; p < pieces; ++p) {
    sub[widest] = Interval{hull[widest].lo + p * w,
                           p + 1 == pieces ? hull[widest].hi : hull[widest].lo + (p + 1) * w};
    for (int i = 0; i < sys.dim; ++i) {
      const Interval r = sys.dynamics[i].range(sub, scratch);
      ranges[i] = p == 0 ? r : interval_hull(ranges[i], r);
    }
  }
  return zono_from_interval(ranges);
}

}  // namespace nbc
