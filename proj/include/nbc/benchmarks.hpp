#pragma once

// Built-in benchmark systems, their per-benchmark training defaults, and the
// published reference statistics that the bench command echoes next to its
// own measurements.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nbc/errors.hpp"
#include "nbc/system.hpp"

namespace nbc {

struct BenchmarkDefaults {
  std::vector<int> hidden;  // hidden linear widths
  bool tanh_gaps = true;    // false: linearly chained hidden layer
  double eta = 0.1;
  double beta1 = 0.3;
  int zero_iterations = 2;
  int zero_splits = 4;
  int zero_split_dims = 0;  // 0 = split along every dimension
};

// Reference results for this family of benchmarks (mean +/- sample std over
// ten seeds): training wall time in seconds and epochs to a valid
// certificate.
struct ReferenceStats {
  double time_mean = 0.0, time_std = 0.0;
  double epochs_mean = 0.0, epochs_std = 0.0;
};

namespace detail {

inline IntervalVector cube(double lo, double hi, int n) {
  return IntervalVector(n, Interval{lo, hi});
}

inline Zonotope box_set(const IntervalVector& box) { return zono_from_interval(box); }

inline std::string peruffo_last_row(int n) {
  static constexpr double w[8] = {576, 2400, 4180, 3980, 2273, 800, 170, 20};
  std::string s = "-(";
  for (int i = 0; i < n; ++i) {
    if (i) s += " + ";
    s += std::to_string(static_cast<long long>(w[i])) + "*x" + std::to_string(i + 1);
  }
  s += ")";
  return s;
}

inline std::string ratschan_first_row(int pairs) {
  // 1 + (sum over i in [pairs] of x_{i+1} + x_{i+2}) / 100
  std::string sum;
  for (int i = 1; i <= pairs; ++i) {
    if (i > 1) sum += " + ";
    sum += "x" + std::to_string(i + 1) + " + x" + std::to_string(i + 2);
  }
  return "1 + 1/100*(" + sum + ")";
}

}  // namespace detail

inline std::vector<std::string> benchmark_names() {
  return {"three-sets", "two-barriers", "peruffo", "darboux",
          "polynomial", "lyapunov",     "exponential", "ratschan"};
}

// Sizes accepted for the parametric families; scalar benchmarks accept only
// their native dimension.
inline std::vector<int> benchmark_sizes(const std::string& name) {
  if (name == "peruffo") return {4, 6, 8};
  if (name == "ratschan") return {3, 5, 7, 9};
  if (name == "lyapunov") return {3};
  return {2};
}

inline SystemSpec benchmark(const std::string& name, std::optional<int> size = std::nullopt) {
  using detail::box_set;
  using detail::cube;

  SystemSpec sys;
  sys.name = name;

  const auto check_size = [&](int native) {
    if (size && *size != native)
      throw InvalidInputError("benchmark '" + name + "' has fixed dimension " +
                              std::to_string(native));
    return native;
  };

  if (name == "three-sets") {
    sys.dim = check_size(2);
    sys.dynamics_src = {"0", "x2"};
    sys.state_space = cube(0.0, 4.0, 2);
    sys.initial_sets = {box_set({{1.7, 2.3}, {2.7, 3.3}})};
    sys.unsafe_sets = {box_set({{0.7, 2.3}, {0.7, 2.3}}), box_set({{2.7, 3.3}, {1.7, 2.3}})};
    Matrix<double> a(2, 2);
    a(1, 1) = 1.0;
    sys.linear = a;
  } else if (name == "two-barriers") {
    sys.dim = check_size(2);
    sys.dynamics_src = {"-x1", "-x2"};
    sys.state_space = cube(0.0, 4.0, 2);
    sys.initial_sets = {box_set({{0.7, 1.3}, {0.7, 1.3}}), box_set({{2.7, 3.3}, {2.7, 3.3}})};
    sys.unsafe_sets = {box_set({{0.3, 0.7}, {3.3, 3.7}}), box_set({{3.3, 3.7}, {0.3, 0.7}})};
    Matrix<double> a(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -1.0;
    sys.linear = a;
  } else if (name == "peruffo") {
    const int n = size.value_or(4);
    bool ok = false;
    for (int s : benchmark_sizes(name)) ok = ok || s == n;
    if (!ok) throw InvalidInputError("benchmark 'peruffo' supports sizes 4, 6, 8");
    sys.dim = n;
    // integrator chain with a weighted feedback row
    static constexpr double w[8] = {576, 2400, 4180, 3980, 2273, 800, 170, 20};
    for (int i = 0; i < n - 1; ++i) sys.dynamics_src.push_back("x" + std::to_string(i + 2));
    sys.dynamics_src.push_back(detail::peruffo_last_row(n));
    sys.state_space = cube(-2.2, 2.2, n);
    sys.initial_sets = {box_set(cube(0.9, 1.1, n))};
    sys.unsafe_sets = {box_set(cube(-2.2, -1.8, n))};
    Matrix<double> a(n, n);
    for (int i = 0; i < n - 1; ++i) a(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) a(n - 1, j) = -w[j];
    sys.linear = a;
  } else if (name == "darboux") {
    sys.dim = check_size(2);
    sys.dynamics_src = {"x2 + 2*x1*x2", "-x1 + 2*x1^2 - x2^2"};
    sys.state_space = cube(-2.0, 2.0, 2);
    sys.initial_sets = {box_set({{0.0, 1.0}, {1.0, 2.0}})};
    Matrix<double> g(2, 5);
    const double row0[5] = {0.0, 0.75, 0.75, 0.25, 0.25};
    const double row1[5] = {0.25, -0.375, 0.375, -0.25, 0.25};
    for (int j = 0; j < 5; ++j) {
      g(0, j) = row0[j];
      g(1, j) = row1[j];
    }
    sys.unsafe_sets = {make_zonotope({-2.0, 0.0}, g)};
  } else if (name == "polynomial") {
    sys.dim = check_size(2);
    sys.dynamics_src = {"x2", "-x1 + 1/3*x1^3 - x2"};
    sys.state_space = {{-3.5, 2.0}, {-2.0, 1.0}};
    sys.initial_sets = {box_set({{1.0, 2.0}, {-0.5, 0.5}})};
    sys.unsafe_sets = {box_set({{-1.4, -0.6}, {-1.4, -0.6}})};
  } else if (name == "lyapunov") {
    sys.dim = check_size(3);
    sys.dynamics_src = {"-x2", "-x3", "-x1 - 2*x2 - x3 + x1^3"};
    sys.state_space = cube(-2.0, 2.0, 3);
    sys.initial_sets = {box_set({{-0.25, 0.75}, {-0.25, 0.75}, {-0.75, 0.25}})};
    sys.unsafe_sets = {box_set({{1.0, 2.0}, {-2.0, -1.0}, {-2.0, -1.0}})};
  } else if (name == "exponential") {
    sys.dim = check_size(2);
    sys.dynamics_src = {"exp(-x1) + x2 - 1", "-sin(x1)^2"};
    sys.state_space = cube(-2.0, 2.0, 2);
    sys.initial_sets = {box_set({{-0.9, -0.1}, {-0.9, -0.1}})};
    sys.unsafe_sets = {box_set({{0.4, 1.0}, {0.4, 1.0}})};
  } else if (name == "ratschan") {
    const int n = size.value_or(3);
    bool ok = false;
    for (int s : benchmark_sizes(name)) ok = ok || s == n;
    if (!ok) throw InvalidInputError("benchmark 'ratschan' supports sizes 3, 5, 7, 9");
    sys.dim = n;
    const int pairs = (n - 1) / 2;
    sys.dynamics_src.push_back(detail::ratschan_first_row(pairs));
    for (int k = 1; k <= pairs; ++k) {
      sys.dynamics_src.push_back("x" + std::to_string(2 * k + 1));
      const std::string v = "x" + std::to_string(2 * k);
      sys.dynamics_src.push_back("-10*sin(" + v + ") - " + v);
    }
    sys.state_space = cube(-0.3, 0.3, n);
    IntervalVector init(n, Interval{-0.2, 0.3});
    init[0] = Interval{-0.3, 0.0};
    sys.initial_sets = {box_set(init)};
    IntervalVector unsafe(n, Interval{-0.3, -0.25});
    unsafe[0] = Interval{-0.2, -0.15};
    sys.unsafe_sets = {box_set(unsafe)};
  } else {
    throw InvalidInputError("unknown benchmark '" + name + "'");
  }

  sys.dynamics.reserve(sys.dim);
  for (const auto& src : sys.dynamics_src) sys.dynamics.push_back(parse_expr(src, sys.dim));
  validate_system(sys);
  return sys;
}

// The single-layer rows use a ten-neuron linearly chained hidden layer: the
// map stays linear, but the factored parameters couple the offset to the
// slope gradients, which the set-based loss needs to steer the level set.
inline BenchmarkDefaults benchmark_defaults(const std::string& name,
                                            std::optional<int> size = std::nullopt) {
  const std::vector<int> lin10{10};
  BenchmarkDefaults d;
  if (name == "three-sets") {
    d = {lin10, false, 0.1, 0.3, 1, 3, 0};
  } else if (name == "two-barriers") {
    d = {{10}, true, 0.1, 0.3, 2, 4, 0};
  } else if (name == "peruffo") {
    const int n = size.value_or(4);
    if (n == 4) d = {lin10, false, 0.1, 0.9, 1, 8, 0};
    else d = {lin10, false, 0.1, 0.3, 2, 4, 2};
  } else if (name == "darboux") {
    d = {{8}, true, 0.1, 0.3, 2, 9, 0};
  } else if (name == "polynomial") {
    d = {{8}, true, 0.01, 0.3, 2, 8, 0};
  } else if (name == "lyapunov") {
    d = {{8}, true, 0.1, 0.9, 1, 32, 0};
  } else if (name == "exponential") {
    d = {{5, 5}, true, 0.001, 0.3, 2, 10, 0};
  } else if (name == "ratschan") {
    const int n = size.value_or(3);
    if (n == 3) d = {lin10, false, 0.1, 0.3, 1, 3, 0};
    else if (n == 5) d = {lin10, false, 0.1, 0.3, 2, 2, 0};
    else if (n == 7) d = {lin10, false, 0.1, 0.3, 2, 2, 2};
    else d = {lin10, false, 0.1, 0.3, 2, 4, 2};
  } else {
    throw InvalidInputError("unknown benchmark '" + name + "'");
  }
  return d;
}

inline std::optional<ReferenceStats> benchmark_reference(const std::string& name,
                                                         std::optional<int> size = std::nullopt) {
  if (name == "three-sets") return ReferenceStats{0.5, 0.16, 16.1, 10.85};
  if (name == "two-barriers") return ReferenceStats{0.6, 0.23, 27.7, 34.05};
  if (name == "peruffo") {
    switch (size.value_or(4)) {
      case 4: return ReferenceStats{0.5, 0.02, 25.1, 5.32};
      case 6: return ReferenceStats{3.1, 2.50, 3186.8, 2918.83};
      case 8: return ReferenceStats{1.0, 1.27, 642.9, 1238.83};
    }
  }
  if (name == "darboux") return ReferenceStats{5.2, 3.44, 1027.5, 708.85};
  if (name == "polynomial") return ReferenceStats{1.4, 0.24, 234.6, 66.18};
  if (name == "lyapunov") return ReferenceStats{2.1, 1.40, 39.7, 33.75};
  if (name == "exponential") return ReferenceStats{19.0, 13.29, 1799.0, 1270.11};
  if (name == "ratschan") {
    switch (size.value_or(3)) {
      case 3: return ReferenceStats{0.5, 0.02, 65.4, 5.02};
      case 5: return ReferenceStats{0.5, 0.03, 49.9, 19.68};
      case 7: return ReferenceStats{0.6, 0.34, 284.3, 428.92};
      case 9: return ReferenceStats{1.1, 0.98, 399.1, 553.93};
    }
  }
  return std::nullopt;
}

}  // namespace nbc
