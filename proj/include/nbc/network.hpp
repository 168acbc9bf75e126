#pragma once

// Feed-forward certificate networks: alternating linear and tanh layers with
// a scalar output. Besides pointwise evaluation, the network supports sound
// set-based forward propagation (each tanh neuron is replaced by a secant
// line plus a remainder generator, keeping the input generator columns
// positionally intact) and a sound enclosure of the set of input gradients
// obtained by propagating a zonotope backward through the layers.
//
// Everything is templated on the scalar type; instantiating with Rev records
// the computation for reverse-mode parameter gradients.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "nbc/autodiff.hpp"
#include "nbc/errors.hpp"
#include "nbc/linalg.hpp"
#include "nbc/rng.hpp"
#include "nbc/zonotope.hpp"

namespace nbc {

template <class S>
struct BasicNetwork {
  std::vector<Matrix<S>> weights;
  std::vector<Vec<S>> biases;
  // Activation between consecutive linear layers: 1 = tanh, 0 = identity
  // (adjacent linear layers, an overparametrized linear map). One entry per
  // gap, so size is linear_layers() - 1.
  std::vector<uint8_t> tanh_after;
  uint64_t version = 0;

  int linear_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return weights.front().cols(); }
  int output_dim() const { return weights.back().rows(); }
  bool has_tanh(int gap) const { return tanh_after[gap] != 0; }

  int total_layers() const {
    int n = linear_layers();
    for (uint8_t t : tanh_after) n += t != 0;
    return n;
  }

  // Per-layer output widths including the input width, with tanh layers
  // repeating the width of the preceding linear layer.
  std::vector<int> arch_widths() const {
    std::vector<int> w{input_dim()};
    for (int j = 0; j < linear_layers(); ++j) {
      w.push_back(weights[j].rows());
      if (j + 1 < linear_layers() && has_tanh(j)) w.push_back(weights[j].rows());
    }
    return w;
  }

  // Total tanh neurons; a set-based forward pass appends one generator each.
  int enclosure_neurons() const {
    int total = 0;
    for (int j = 0; j + 1 < linear_layers(); ++j)
      if (has_tanh(j)) total += weights[j].rows();
    return total;
  }
};

using Network = BasicNetwork<double>;

// Glorot-uniform initialization from a seeded deterministic generator;
// identical seeds give bit-identical parameters. `hidden` lists the hidden
// linear widths (empty = a single linear layer); `tanh_gaps` controls whether
// hidden layers are followed by tanh (the default) or chained linearly.
inline Network init_network(int input_dim, const std::vector<int>& hidden, uint64_t seed,
                            bool tanh_gaps = true) {
  if (input_dim < 1) throw InvalidInputError("init_network: input dimension must be >= 1");
  for (int h : hidden)
    if (h < 1) throw InvalidInputError("init_network: hidden widths must be >= 1");
  std::vector<int> outs(hidden);
  outs.push_back(1);
  Network net;
  std::mt19937_64 rng(seed);
  int fan_in = input_dim;
  for (int out : outs) {
    const double bound = std::sqrt(6.0 / (fan_in + out));
    Matrix<double> w(out, fan_in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < fan_in; ++j) w(i, j) = uniform(rng, -bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
    fan_in = out;
  }
  net.tanh_after.assign(hidden.size(), tanh_gaps ? 1 : 0);
  return net;
}

inline size_t param_count(const Network& net) {
  size_t n = 0;
  for (int j = 0; j < net.linear_layers(); ++j)
    n += net.weights[j].data().size() + net.biases[j].size();
  return n;
}

// Flattening order: per linear layer, W row-major then b.
inline std::vector<double> get_params(const Network& net) {
  std::vector<double> theta;
  theta.reserve(param_count(net));
  for (int j = 0; j < net.linear_layers(); ++j) {
    theta.insert(theta.end(), net.weights[j].data().begin(), net.weights[j].data().end());
    theta.insert(theta.end(), net.biases[j].begin(), net.biases[j].end());
  }
  return theta;
}

inline void set_params(Network& net, const std::vector<double>& theta) {
  if (theta.size() != param_count(net))
    throw InvalidInputError("set_params: parameter count mismatch");
  size_t k = 0;
  for (int j = 0; j < net.linear_layers(); ++j) {
    for (auto& w : net.weights[j].data()) w = theta[k++];
    for (auto& b : net.biases[j]) b = theta[k++];
  }
  ++net.version;
}

// Mirror the network onto a tape, one leaf per parameter in flattening order.
inline BasicNetwork<Rev> lift_network(const Network& net, Tape& tape) {
  BasicNetwork<Rev> out;
  out.version = net.version;
  out.tanh_after = net.tanh_after;
  for (int j = 0; j < net.linear_layers(); ++j) {
    Matrix<Rev> w(net.weights[j].rows(), net.weights[j].cols());
    for (size_t k = 0; k < w.data().size(); ++k)
      w.data()[k] = Rev::variable(tape, net.weights[j].data()[k]);
    Vec<Rev> b(net.biases[j].size());
    for (size_t k = 0; k < b.size(); ++k) b[k] = Rev::variable(tape, net.biases[j][k]);
    out.weights.push_back(std::move(w));
    out.biases.push_back(std::move(b));
  }
  return out;
}

template <class S>
S forward(const BasicNetwork<S>& net, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != net.input_dim())
    throw InvalidInputError("forward: input dimension mismatch");
  using std::tanh;
  Vec<S> h(x.size());
  for (size_t i = 0; i < x.size(); ++i) h[i] = S(x[i]);
  for (int j = 0; j < net.linear_layers(); ++j) {
    h = vec_add(matvec(net.weights[j], h), net.biases[j]);
    if (j + 1 < net.linear_layers() && net.has_tanh(j))
      for (auto& v : h) v = tanh(v);
  }
  return h[0];
}

// Pointwise input gradient by plain backpropagation; the independent
// reference for the set-based gradient enclosure.
inline std::vector<double> input_gradient(const Network& net, const std::vector<double>& x) {
  std::vector<std::vector<double>> pre(net.linear_layers());  // tanh pre-activations per gap
  std::vector<double> h = x;
  for (int j = 0; j < net.linear_layers(); ++j) {
    h = vec_add(matvec(net.weights[j], h), net.biases[j]);
    if (j + 1 < net.linear_layers() && net.has_tanh(j)) {
      pre[j] = h;
      for (auto& v : h) v = std::tanh(v);
    }
  }
  std::vector<double> g{1.0};
  for (int j = net.linear_layers() - 1; j >= 0; --j) {
    g = matvec_transposed(net.weights[j], g);
    if (j > 0 && net.has_tanh(j - 1)) {
      const auto& p = pre[j - 1];
      for (size_t i = 0; i < g.size(); ++i) {
        const double t = std::tanh(p[i]);
        g[i] *= 1.0 - t * t;
      }
    }
  }
  return g;
}

// Secant-plus-remainder enclosure of tanh on [lo, hi]:
// |tanh(x) - (slope*x + offset)| <= radius for all x in the interval.
template <class S>
struct ActEnclosure {
  S slope, offset, radius;
};

template <class S>
ActEnclosure<S> secant_enclosure(const S& lo, const S& hi) {
  using std::atanh;
  using std::sqrt;
  using std::tanh;
  S slope;
  const S tlo = tanh(lo), thi = tanh(hi);
  if (value_of(hi) > value_of(lo)) {
    slope = (thi - tlo) / (hi - lo);
  } else {
    slope = S(1.0) - tlo * tlo;
    return {slope, tlo - slope * lo, S(0.0)};
  }
  // Extrema of d(x) = tanh(x) - slope*x: endpoints plus the interior points
  // where tanh'(x) = slope, clipped into the interval.
  S dmin = tlo - slope * lo;
  S dmax = dmin;
  const S dhi = thi - slope * hi;
  dmin = smin(dmin, dhi);
  dmax = smax(dmax, dhi);
  if (value_of(slope) > 0.0 && value_of(slope) < 1.0) {
    const S root = sqrt(smax(S(0.0), S(1.0) - slope));
    const S xstar = atanh(root);
    for (const S& cand : {sclamp(xstar, lo, hi), sclamp(-xstar, lo, hi)}) {
      const S d = tanh(cand) - slope * cand;
      dmin = smin(dmin, d);
      dmax = smax(dmax, d);
    }
  }
  return {slope, S(0.5) * (dmax + dmin), S(0.5) * (dmax - dmin)};
}

// Exact range of tanh'(x) = 1 - tanh(x)^2 over [lo, hi]: tanh' is even and
// peaks at 0, so the maximum sits at the point closest to 0 and the minimum
// at the endpoint of larger magnitude.
template <class S>
std::pair<S, S> tanh_deriv_range(const S& lo, const S& hi) {
  using std::abs;
  using std::tanh;
  const double l = value_of(lo), h = value_of(hi);
  S near_zero = l <= 0.0 && h >= 0.0 ? S(0.0) : (std::abs(l) <= std::abs(h) ? lo : hi);
  S far = std::abs(l) >= std::abs(h) ? lo : hi;
  const S tn = tanh(near_zero), tf = tanh(far);
  return {S(1.0) - tf * tf, S(1.0) - tn * tn};
}

// Everything recorded during a set-based forward pass: the per-layer sets,
// and per tanh layer the pre-activation hulls and enclosure coefficients.
// The first `input_generators` generator columns of every recorded set
// correspond positionally to the input set's generators.
template <class S>
struct ForwardTrace {
  struct ActLayer {
    Vec<S> lo, hi, slope, offset, radius;
  };
  std::vector<BasicZonotope<S>> layer_sets;
  std::vector<ActLayer> act;
  int input_generators = 0;
  uint64_t net_version = 0;
};

template <class S>
BasicZonotope<S> lift_set(const Zonotope& z) {
  BasicZonotope<S> out;
  out.center.assign(z.center.begin(), z.center.end());
  out.generators = Matrix<S>(z.generators.rows(), z.generators.cols());
  for (size_t k = 0; k < z.generators.data().size(); ++k)
    out.generators.data()[k] = S(z.generators.data()[k]);
  return out;
}

// Sound set-based forward propagation. Linear layers are exact affine maps;
// each tanh layer applies the per-neuron secant enclosure, scaling the
// existing generator columns in place and appending one fresh remainder
// generator per neuron.
template <class S>
std::pair<BasicZonotope<S>, ForwardTrace<S>> forward_set(const BasicNetwork<S>& net,
                                                         const Zonotope& input) {
  if (input.dim() != net.input_dim())
    throw InvalidInputError("forward_set: input set dimension mismatch");
  ForwardTrace<S> trace;
  trace.input_generators = input.num_generators();
  trace.net_version = net.version;
  BasicZonotope<S> h = lift_set<S>(input);
  trace.layer_sets.push_back(h);
  trace.act.resize(net.linear_layers() - 1);  // one slot per gap, empty if identity
  for (int j = 0; j < net.linear_layers(); ++j) {
    h = affine_map(net.weights[j], net.biases[j], h);
    trace.layer_sets.push_back(h);
    if (j + 1 == net.linear_layers()) break;
    if (!net.has_tanh(j)) continue;
    const int nu = h.dim(), q = h.num_generators();
    typename ForwardTrace<S>::ActLayer act;
    act.lo.resize(nu);
    act.hi.resize(nu);
    act.slope.resize(nu);
    act.offset.resize(nu);
    act.radius.resize(nu);
    BasicZonotope<S> out;
    out.center.resize(nu);
    out.generators = Matrix<S>(nu, q + nu);
    for (int i = 0; i < nu; ++i) {
      const S r = row_abs_sum(h.generators, i);
      act.lo[i] = h.center[i] - r;
      act.hi[i] = h.center[i] + r;
      const auto enc = secant_enclosure(act.lo[i], act.hi[i]);
      act.slope[i] = enc.slope;
      act.offset[i] = enc.offset;
      act.radius[i] = enc.radius;
      out.center[i] = enc.slope * h.center[i] + enc.offset;
      for (int k = 0; k < q; ++k) out.generators(i, k) = enc.slope * h.generators(i, k);
      out.generators(i, q + i) = enc.radius;
    }
    trace.act[j] = std::move(act);
    h = std::move(out);
    trace.layer_sets.push_back(h);
  }
  return {h, trace};
}

// Sound enclosure of { dB/dx (x) | x in the traced input set }, computed by
// propagating a zonotope backward: transposed weights through linear layers,
// and per neuron the derivative range [m - r, m + r] multiplied into the
// coordinate via the inner-product enclosure. The slope part diag(m)*G keeps
// the shared factors; the center and cross terms get fresh generators.
template <class S>
BasicZonotope<S> gradient_set(const BasicNetwork<S>& net, const ForwardTrace<S>& trace) {
  if (trace.net_version != net.version)
    throw ContractError("gradient_set: trace is stale, network parameters changed");
  BasicZonotope<S> g;
  g.center = {S(1.0)};
  g.generators = Matrix<S>(1, 0);
  for (int j = net.linear_layers() - 1; j >= 0; --j) {
    g = affine_map_transposed(net.weights[j], g);
    if (j == 0) break;
    if (!net.has_tanh(j - 1)) continue;
    const auto& act = trace.act[j - 1];
    const int nu = g.dim(), q = g.num_generators();
    BasicZonotope<S> out;
    out.center.resize(nu);
    out.generators = Matrix<S>(nu, q + nu + nu * q);
    for (int i = 0; i < nu; ++i) {
      const auto [dlo, dhi] = tanh_deriv_range(act.lo[i], act.hi[i]);
      const S m = S(0.5) * (dhi + dlo);
      const S r = S(0.5) * (dhi - dlo);
      out.center[i] = m * g.center[i];
      for (int k = 0; k < q; ++k) out.generators(i, k) = m * g.generators(i, k);
      out.generators(i, q + i) = r * g.center[i];
      for (int k = 0; k < q; ++k)
        out.generators(i, q + nu + i * q + k) = r * g.generators(i, k);
    }
    g = std::move(out);
  }
  return g;
}

}  // namespace nbc
