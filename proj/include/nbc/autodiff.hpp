#pragma once

// Reverse-mode automatic differentiation on a tape of scalar operations.
//
// The set-based losses are compositions of +, *, |.|, max and tanh applied to
// zonotope centers and generators, so a scalar tape is all we need. Every set
// operation is templated on the scalar type; instantiating it with `Rev`
// records the computation, instantiating it with `double` replays exactly the
// same arithmetic. Constants are kept off the tape entirely.

#include <cmath>
#include <cstdint>
#include <vector>

#include "nbc/errors.hpp"

namespace nbc {

class Tape {
 public:
  struct Node {
    int32_t a = -1, b = -1;  // parent indices, -1 if absent
    double da = 0.0, db = 0.0;
  };

  int32_t leaf(double v) {
    nodes_.push_back(Node{});
    vals_.push_back(v);
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  int32_t unary(int32_t a, double da, double v) {
    nodes_.push_back(Node{a, -1, da, 0.0});
    vals_.push_back(v);
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  int32_t binary(int32_t a, double da, int32_t b, double db, double v) {
    nodes_.push_back(Node{a, b, da, db});
    vals_.push_back(v);
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  size_t size() const { return nodes_.size(); }
  double value(int32_t i) const { return vals_[i]; }

  // Drop every node at or after `mark`, keeping earlier nodes (parameters)
  // intact. Used to evaluate independent loss terms one at a time.
  void rewind(size_t mark) {
    nodes_.resize(mark);
    vals_.resize(mark);
  }

  void clear() {
    nodes_.clear();
    vals_.clear();
  }

  void reserve(size_t n) {
    nodes_.reserve(n);
    vals_.reserve(n);
  }

  // Accumulate seed * d(root)/d(node_i) into out[i] for all i < out.size().
  // Nodes are in topological order by construction, so a single reverse sweep
  // suffices.
  void accumulate_gradient(int32_t root, double seed, std::vector<double>& out) {
    if (root < 0 || static_cast<size_t>(root) >= nodes_.size())
      throw ContractError("accumulate_gradient: root is not on the tape");
    adj_.assign(static_cast<size_t>(root) + 1, 0.0);
    adj_[root] = seed;
    for (int32_t i = root; i >= 0; --i) {
      const double a = adj_[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a >= 0) adj_[n.a] += n.da * a;
      if (n.b >= 0) adj_[n.b] += n.db * a;
    }
    const size_t k = std::min(out.size(), adj_.size());
    for (size_t i = 0; i < k; ++i) out[i] += adj_[i];
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> vals_;
  std::vector<double> adj_;
};

// A scalar on the tape. A default-constructed or double-constructed Rev is a
// constant and never touches the tape; mixing constants and tracked values is
// free.
struct Rev {
  Tape* tape = nullptr;
  int32_t idx = -1;
  double v = 0.0;

  Rev() = default;
  Rev(double c) : v(c) {}
  Rev(Tape* t, int32_t i, double val) : tape(t), idx(i), v(val) {}

  bool tracked() const { return tape != nullptr; }

  static Rev variable(Tape& t, double v) { return Rev(&t, t.leaf(v), v); }
};

inline double value_of(double x) { return x; }
inline double value_of(const Rev& x) { return x.v; }

inline Rev operator+(const Rev& x, const Rev& y) {
  const double v = x.v + y.v;
  if (x.tracked() && y.tracked()) return {x.tape, x.tape->binary(x.idx, 1.0, y.idx, 1.0, v), v};
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, 1.0, v), v};
  if (y.tracked()) return {y.tape, y.tape->unary(y.idx, 1.0, v), v};
  return v;
}

inline Rev operator-(const Rev& x, const Rev& y) {
  const double v = x.v - y.v;
  if (x.tracked() && y.tracked()) return {x.tape, x.tape->binary(x.idx, 1.0, y.idx, -1.0, v), v};
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, 1.0, v), v};
  if (y.tracked()) return {y.tape, y.tape->unary(y.idx, -1.0, v), v};
  return v;
}

inline Rev operator-(const Rev& x) {
  const double v = -x.v;
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, -1.0, v), v};
  return v;
}

inline Rev operator*(const Rev& x, const Rev& y) {
  const double v = x.v * y.v;
  if (x.tracked() && y.tracked()) return {x.tape, x.tape->binary(x.idx, y.v, y.idx, x.v, v), v};
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, y.v, v), v};
  if (y.tracked()) return {y.tape, y.tape->unary(y.idx, x.v, v), v};
  return v;
}

inline Rev operator/(const Rev& x, const Rev& y) {
  const double v = x.v / y.v;
  if (x.tracked() && y.tracked())
    return {x.tape, x.tape->binary(x.idx, 1.0 / y.v, y.idx, -x.v / (y.v * y.v), v), v};
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, 1.0 / y.v, v), v};
  if (y.tracked()) return {y.tape, y.tape->unary(y.idx, -x.v / (y.v * y.v), v), v};
  return v;
}

inline Rev& operator+=(Rev& x, const Rev& y) { return x = x + y; }
inline Rev& operator-=(Rev& x, const Rev& y) { return x = x - y; }
inline Rev& operator*=(Rev& x, const Rev& y) { return x = x * y; }

inline Rev tanh(const Rev& x) {
  const double t = std::tanh(x.v);
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, 1.0 - t * t, t), t};
  return t;
}

inline Rev sqrt(const Rev& x) {
  const double r = std::sqrt(x.v);
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, r > 0.0 ? 0.5 / r : 0.0, r), r};
  return r;
}

inline Rev atanh(const Rev& x) {
  const double r = std::atanh(x.v);
  if (x.tracked()) return {x.tape, x.tape->unary(x.idx, 1.0 / (1.0 - x.v * x.v), r), r};
  return r;
}

// |x| with subgradient 0 at x = 0.
inline Rev abs(const Rev& x) {
  if (x.v > 0.0) return x;
  if (x.v < 0.0) return -x;
  return Rev(0.0);
}

// Branch-selecting max/min; at a tie the first argument is chosen, so
// smax(S(0), x) has derivative 0 at x = 0.
template <class S>
S smax(const S& a, const S& b) {
  return value_of(a) >= value_of(b) ? a : b;
}

template <class S>
S smin(const S& a, const S& b) {
  return value_of(a) <= value_of(b) ? a : b;
}

template <class S>
S sclamp(const S& x, const S& lo, const S& hi) {
  return smin(smax(x, lo), hi);
}

}  // namespace nbc
