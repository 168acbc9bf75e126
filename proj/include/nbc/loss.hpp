#pragma once

// The sound set-based loss. Three parts, each a hinge on a bound of a sound
// enclosure, so a total of exactly zero is a proof:
//   unsafe term:  the certificate's lower bound on every unsafe set must
//                 clear +eps (unsafe states map to positive values);
//   initial term: the upper bound on every initial set must be <= 0;
//   zero term:    on every box of the zero-level-set cover, the upper bound
//                 of the Lie derivative enclosure must clear -eps.
// All terms are templated on the scalar type so the trainer can record them
// on the tape; the double instantiation performs the identical arithmetic.

#include <utility>
#include <vector>

#include "nbc/autodiff.hpp"
#include "nbc/errors.hpp"
#include "nbc/network.hpp"
#include "nbc/system.hpp"
#include "nbc/zeroset.hpp"
#include "nbc/zonotope.hpp"

namespace nbc {

template <class S>
std::pair<S, S> output_bounds(const BasicNetwork<S>& net, const Zonotope& set) {
  const auto [y, trace] = forward_set(net, set);
  const S r = row_abs_sum(y.generators, 0);
  return {y.center[0] - r, y.center[0] + r};
}

// max(0, -lower_bound + eps) for one unsafe set.
template <class S>
S unsafe_term(const BasicNetwork<S>& net, const Zonotope& unsafe_set, double eps) {
  const auto [lo, hi] = output_bounds(net, unsafe_set);
  return smax(S(0.0), S(eps) - lo);
}

// max(0, upper_bound) for one initial set.
template <class S>
S init_term(const BasicNetwork<S>& net, const Zonotope& initial_set) {
  const auto [lo, hi] = output_bounds(net, initial_set);
  return smax(S(0.0), hi);
}

// Sound bounds on the Lie derivative dB/dx . f over a zero-cover box: the
// gradient-set enclosure multiplied with the flow enclosure through the
// inner-product enclosure.
template <class S>
std::pair<S, S> lie_bounds(const BasicNetwork<S>& net, const SystemSpec& sys,
                           const Zonotope& box_set, int subsplits) {
  const auto [y, trace] = forward_set(net, box_set);
  const BasicZonotope<S> grad = gradient_set(net, trace);
  const BasicZonotope<S> flow = lift_set<S>(flow_enclosure(sys, box_set, subsplits));
  const BasicZonotope<S> prod = inner_product(grad, flow);
  const S r = row_abs_sum(prod.generators, 0);
  return {prod.center[0] - r, prod.center[0] + r};
}

// max(0, upper_bound + eps) for one zero-cover box.
template <class S>
S zero_term(const BasicNetwork<S>& net, const SystemSpec& sys, const Zonotope& box_set,
            double eps, int subsplits) {
  const auto [lo, hi] = lie_bounds(net, sys, box_set, subsplits);
  return smax(S(0.0), hi + S(eps));
}

inline Interval lie_enclosure(const Network& net, const SystemSpec& sys, const Zonotope& box_set,
                              int subsplits) {
  const auto [lo, hi] = lie_bounds(net, sys, box_set, subsplits);
  return Interval{lo, hi};
}

struct LossBreakdown {
  struct SetTerm {
    size_t index = 0;
    double bound = 0.0;  // the penalized bound (lower for unsafe, upper otherwise)
    double hinge = 0.0;
  };

  double l_unsafe = 0.0;
  double l_init = 0.0;
  double l_zero = 0.0;
  double eps = 1e-3;
  size_t cover_size = 0;
  std::vector<SetTerm> unsafe_terms;
  std::vector<SetTerm> init_terms;
  std::vector<SetTerm> zero_terms;

  double total() const { return l_unsafe + l_init + l_zero; }
  bool verified() const { return total() == 0.0; }
};

// Full loss on a given (already computed) zero cover. Terms accumulate in
// canonical order: unsafe sets, then initial sets, then cover boxes.
inline LossBreakdown total_loss(const Network& net, const SystemSpec& sys, const ZeroCover& cover,
                                double eps, int subsplits) {
  if (eps <= 0.0) throw InvalidInputError("total_loss: eps must be > 0");
  LossBreakdown out;
  out.eps = eps;
  out.cover_size = cover.size();
  for (size_t i = 0; i < sys.unsafe_sets.size(); ++i) {
    const auto [lo, hi] = output_bounds(net, sys.unsafe_sets[i]);
    const double hinge = smax(0.0, eps - lo);
    out.unsafe_terms.push_back({i, lo, hinge});
    out.l_unsafe += hinge;
  }
  for (size_t i = 0; i < sys.initial_sets.size(); ++i) {
    const auto [lo, hi] = output_bounds(net, sys.initial_sets[i]);
    const double hinge = smax(0.0, hi);
    out.init_terms.push_back({i, hi, hinge});
    out.l_init += hinge;
  }
  for (size_t i = 0; i < cover.size(); ++i) {
    const auto [lo, hi] = lie_bounds(net, sys, cover.box_zonotope(i), subsplits);
    const double hinge = smax(0.0, hi + eps);
    out.zero_terms.push_back({i, hi, hinge});
    out.l_zero += hinge;
  }
  if (out.l_unsafe < 0.0 || out.l_init < 0.0 || out.l_zero < 0.0)
    throw ContractError("total_loss: a loss component is negative");
  return out;
}

}  // namespace nbc
