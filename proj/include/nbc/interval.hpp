#pragma once

// Scalar intervals and inclusion-preserving interval arithmetic. Used for
// range bounding of dynamics and for the axis-aligned hulls of zonotopes.

#include <algorithm>
#include <cmath>
#include <vector>

#include "nbc/errors.hpp"

namespace nbc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double point) : lo(point), hi(point) {}
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {}

  bool valid() const { return lo <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
  double rad() const { return 0.5 * (hi - lo); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

using IntervalVector = std::vector<Interval>;

inline Interval operator+(const Interval& a, const Interval& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}

inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval operator*(double s, const Interval& a) {
  return s >= 0.0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
}

inline Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains(0.0)) throw NumericError("interval division by an interval containing 0");
  const double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval interval_hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// x^k by binary exponentiation; bit-reproducible across runs.
inline double ipow(double x, int k) {
  double r = 1.0, base = x;
  for (int e = k; e > 0; e >>= 1) {
    if (e & 1) r *= base;
    base *= base;
  }
  return r;
}

// Exact range of x^k over an interval, using the even/odd power rules.
inline Interval int_pow(const Interval& a, int k) {
  if (k < 0) throw InvalidInputError("int_pow: exponent must be >= 0");
  if (k == 0) return {1.0, 1.0};
  if (k % 2 == 1) return {ipow(a.lo, k), ipow(a.hi, k)};
  const double pl = ipow(a.lo, k), ph = ipow(a.hi, k);
  if (a.contains(0.0)) return {0.0, std::max(pl, ph)};
  return {std::min(pl, ph), std::max(pl, ph)};
}

inline Interval int_exp(const Interval& a) { return {std::exp(a.lo), std::exp(a.hi)}; }

namespace detail {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Does any point congruent to `target` (mod 2*pi) fall inside [lo, hi]?
inline bool angle_in(double lo, double hi, double target) {
  const double k = std::ceil((lo - target) / kTwoPi);
  return target + k * kTwoPi <= hi;
}
}  // namespace detail

// Range of sin over an interval: the endpoints plus +/-1 whenever a critical
// point lies inside.
inline Interval int_sin(const Interval& a) {
  if (a.width() >= detail::kTwoPi) return {-1.0, 1.0};
  const double slo = std::sin(a.lo), shi = std::sin(a.hi);
  double lo = std::min(slo, shi), hi = std::max(slo, shi);
  if (detail::angle_in(a.lo, a.hi, 1.5707963267948966)) hi = 1.0;
  if (detail::angle_in(a.lo, a.hi, -1.5707963267948966)) lo = -1.0;
  return {lo, hi};
}

inline Interval int_cos(const Interval& a) {
  if (a.width() >= detail::kTwoPi) return {-1.0, 1.0};
  const double clo = std::cos(a.lo), chi = std::cos(a.hi);
  double lo = std::min(clo, chi), hi = std::max(clo, chi);
  if (detail::angle_in(a.lo, a.hi, 0.0)) hi = 1.0;
  if (detail::angle_in(a.lo, a.hi, 3.1415926535897932)) lo = -1.0;
  return {lo, hi};
}

inline bool box_contains(const IntervalVector& box, const std::vector<double>& x,
                         double slack = 0.0) {
  if (box.size() != x.size()) return false;
  for (size_t i = 0; i < box.size(); ++i)
    if (x[i] < box[i].lo - slack || x[i] > box[i].hi + slack) return false;
  return true;
}

inline bool box_contains_box(const IntervalVector& outer, const IntervalVector& inner,
                             double slack = 0.0) {
  if (outer.size() != inner.size()) return false;
  for (size_t i = 0; i < outer.size(); ++i)
    if (inner[i].lo < outer[i].lo - slack || inner[i].hi > outer[i].hi + slack) return false;
  return true;
}

}  // namespace nbc
