#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "nbc/benchmarks.hpp"
#include "nbc/expr.hpp"
#include "nbc/system.hpp"
#include "test_util.hpp"

using namespace nbc;
using namespace nbc::testutil;

namespace {

std::vector<double> sample_box(const IntervalVector& box, std::mt19937_64& rng) {
  std::vector<double> x(box.size());
  for (size_t i = 0; i < box.size(); ++i) x[i] = uniform(rng, box[i].lo, box[i].hi);
  return x;
}

IntervalVector random_subbox(const IntervalVector& box, std::mt19937_64& rng) {
  IntervalVector sub(box.size());
  for (size_t i = 0; i < box.size(); ++i) {
    double a = uniform(rng, box[i].lo, box[i].hi);
    double b = uniform(rng, box[i].lo, box[i].hi);
    if (a > b) std::swap(a, b);
    sub[i] = Interval{a, b};
  }
  return sub;
}

std::vector<SystemSpec> all_benchmarks() {
  std::vector<SystemSpec> all;
  all.push_back(benchmark("three-sets"));
  all.push_back(benchmark("two-barriers"));
  for (int n : {4, 6, 8}) all.push_back(benchmark("peruffo", n));
  all.push_back(benchmark("darboux"));
  all.push_back(benchmark("polynomial"));
  all.push_back(benchmark("lyapunov"));
  all.push_back(benchmark("exponential"));
  for (int n : {3, 5, 7, 9}) all.push_back(benchmark("ratschan", n));
  return all;
}

}  // namespace

TEST_CASE("expression evaluation: hand-computed benchmark values") {
  const auto darboux = benchmark("darboux");
  CHECK(darboux.dynamics[0].eval({1.0, 1.0}) == Approx(3.0));
  CHECK(Expr::constant(0.0).eval({5.0, -3.0}) == 0.0);
  const auto expo = benchmark("exponential");
  CHECK(expo.dynamics[0].eval({0.0, 1.0}) == Approx(1.0));
}

TEST_CASE("expression parser: malformed input is rejected") {
  CHECK_THROWS_AS(parse_expr("x3", 2), InvalidInputError);
  CHECK_THROWS_AS(parse_expr("foo(x1)", 2), InvalidInputError);
  CHECK_THROWS_AS(parse_expr("x1 +", 2), InvalidInputError);
  CHECK_THROWS_AS(parse_expr("x1 ^ -2", 2), InvalidInputError);
  CHECK_THROWS_AS(parse_expr("(x1", 2), InvalidInputError);
}

TEST_CASE("expression evaluation: division by zero is a numeric error") {
  const auto e = parse_expr("1/x1", 1);
  CHECK(e.eval({2.0}) == Approx(0.5));
  CHECK_THROWS_AS(e.eval({0.0}), NumericError);
  CHECK_THROWS_AS(e.range({{-1.0, 1.0}}), NumericError);
}

TEST_CASE("range bounding: sin over [0, pi]") {
  const auto e = parse_expr("sin(x1)", 1);
  const auto r = e.range({{0.0, 3.14159265358979323846}});
  CHECK(r.lo == Approx(0.0).margin(1e-15));
  CHECK(r.hi == 1.0);
}

TEST_CASE("range bounding: product of two symmetric variables") {
  const auto e = parse_expr("x1*x2", 2);
  const auto r = e.range({{-1.0, 1.0}, {-1.0, 1.0}});
  CHECK(r.lo == -1.0);
  CHECK(r.hi == 1.0);
}

TEST_CASE("range bounding: random cubics contain all sampled values") {
  std::mt19937_64 rng(101);
  int checked = 0;
  while (checked < 10000) {
    // random cubic in two variables
    std::string src;
    for (int t = 0; t < 4; ++t) {
      const double coeff = rand_in(rng, -3.0, 3.0);
      const int p1 = static_cast<int>(rng() % 4);
      const int p2 = static_cast<int>(rng() % (4 - p1));
      if (t) src += " + ";
      src += "(" + std::to_string(coeff) + ")*x1^" + std::to_string(p1) + "*x2^" +
             std::to_string(p2);
    }
    const auto e = parse_expr(src, 2);
    IntervalVector box(2);
    for (auto& iv : box) {
      const double a = rand_in(rng, -2.0, 2.0), w = rand_in(rng, 0.0, 2.0);
      iv = Interval{a, a + w};
    }
    const auto r = e.range(box);
    for (int s = 0; s < 100; ++s, ++checked) {
      const auto x = sample_box(box, rng);
      const double v = e.eval(x);
      REQUIRE(v >= r.lo - 1e-9);
      REQUIRE(v <= r.hi + 1e-9);
    }
  }
}

TEST_CASE("flow enclosure: linear system maps exactly") {
  const auto sys = benchmark("two-barriers");
  Zonotope z;
  z.center = {1.0, 1.0};
  z.generators = Matrix<double>(2, 2);
  z.generators(0, 0) = 0.3;
  z.generators(1, 1) = 0.3;
  const auto f = flow_enclosure(sys, z, 0);
  CHECK(f.center == Vec<double>{-1.0, -1.0});
  CHECK(std::abs(f.generators(0, 0)) == Approx(0.3));
  CHECK(std::abs(f.generators(1, 1)) == Approx(0.3));
  CHECK(f.generators(0, 1) == 0.0);
}

TEST_CASE("flow enclosure: constant dynamics row collapses to a point") {
  const auto sys = benchmark("three-sets");
  const auto z = zono_from_interval({{1.0, 2.0}, {1.0, 2.0}});
  const auto hull = interval_hull(flow_enclosure(sys, z, 0));
  CHECK(hull[0].lo == 0.0);
  CHECK(hull[0].hi == 0.0);
  CHECK(hull[1].lo == Approx(1.0));
  CHECK(hull[1].hi == Approx(2.0));
}

TEST_CASE("flow enclosure: sampled flows stay inside for nonlinear benchmarks") {
  std::mt19937_64 rng(103);
  for (const char* name : {"darboux", "exponential", "ratschan"}) {
    const auto sys = benchmark(name);
    int checked = 0;
    while (checked < 10000) {
      auto sub = random_subbox(sys.state_space, rng);
      const auto z = zono_from_interval(sub);
      const auto hull = interval_hull(flow_enclosure(sys, z, 2));
      for (int s = 0; s < 200; ++s, ++checked) {
        const auto x = sample_box(sub, rng);
        const auto f = sys.flow_at(x);
        for (int i = 0; i < sys.dim; ++i) {
          REQUIRE(f[i] >= hull[i].lo - 1e-9);
          REQUIRE(f[i] <= hull[i].hi + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("flow enclosure: more subsplits never widen the hull") {
  std::mt19937_64 rng(107);
  for (const char* name : {"darboux", "exponential", "lyapunov"}) {
    const auto sys = benchmark(name);
    for (int trial = 0; trial < 30; ++trial) {
      const auto sub = random_subbox(sys.state_space, rng);
      const auto z = zono_from_interval(sub);
      auto prev = interval_hull(flow_enclosure(sys, z, 0));
      for (int k = 1; k <= 3; ++k) {
        const auto cur = interval_hull(flow_enclosure(sys, z, k));
        for (int i = 0; i < sys.dim; ++i) {
          REQUIRE(cur[i].lo >= prev[i].lo - 1e-12);
          REQUIRE(cur[i].hi <= prev[i].hi + 1e-12);
        }
        prev = cur;
      }
    }
  }
}

TEST_CASE("linear benchmarks: expression dynamics agree with the system matrix") {
  std::mt19937_64 rng(109);
  for (const auto& sys : all_benchmarks()) {
    if (!sys.is_linear()) continue;
    for (int s = 0; s < 200; ++s) {
      const auto x = sample_box(sys.state_space, rng);
      const auto f = sys.flow_at(x);
      const auto ax = matvec(*sys.linear, x);
      for (int i = 0; i < sys.dim; ++i) REQUIRE(rel_close(f[i], ax[i], 1e-12));
    }
  }
}

TEST_CASE("benchmark registry: polynomial sets") {
  const auto sys = benchmark("polynomial");
  CHECK(sys.dim == 2);
  CHECK(sys.state_space[0].lo == -3.5);
  CHECK(sys.state_space[0].hi == 2.0);
  CHECK(sys.state_space[1].lo == -2.0);
  CHECK(sys.state_space[1].hi == 1.0);
  const auto init = interval_hull(sys.initial_sets.at(0));
  CHECK(init[0].lo == Approx(1.0));
  CHECK(init[0].hi == Approx(2.0));
  CHECK(init[1].lo == Approx(-0.5));
  CHECK(init[1].hi == Approx(0.5));
  const auto unsafe = interval_hull(sys.unsafe_sets.at(0));
  CHECK(unsafe[0].lo == Approx(-1.4));
  CHECK(unsafe[0].hi == Approx(-0.6));
  CHECK(unsafe[1].lo == Approx(-1.4));
  CHECK(unsafe[1].hi == Approx(-0.6));
}

TEST_CASE("benchmark registry: three-sets has two unsafe boxes") {
  const auto sys = benchmark("three-sets");
  REQUIRE(sys.unsafe_sets.size() == 2);
  const auto init = interval_hull(sys.initial_sets.at(0));
  CHECK(init[0].lo == Approx(1.7));
  CHECK(init[0].hi == Approx(2.3));
  CHECK(init[1].lo == Approx(2.7));
  CHECK(init[1].hi == Approx(3.3));
}

TEST_CASE("benchmark registry: ratschan(3) sets") {
  const auto sys = benchmark("ratschan", 3);
  CHECK(sys.dim == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(sys.state_space[i].lo == -0.3);
    CHECK(sys.state_space[i].hi == 0.3);
  }
  const auto init = interval_hull(sys.initial_sets.at(0));
  CHECK(init[0].lo == Approx(-0.3));
  CHECK(init[0].hi == Approx(0.0));
  CHECK(init[1].lo == Approx(-0.2));
  CHECK(init[1].hi == Approx(0.3));
  CHECK(init[2].lo == Approx(-0.2));
  CHECK(init[2].hi == Approx(0.3));
  const auto unsafe = interval_hull(sys.unsafe_sets.at(0));
  CHECK(unsafe[0].lo == Approx(-0.2));
  CHECK(unsafe[0].hi == Approx(-0.15));
  CHECK(unsafe[1].lo == Approx(-0.3));
  CHECK(unsafe[1].hi == Approx(-0.25));
}

TEST_CASE("benchmark registry: darboux unsafe region is the printed zonotope") {
  const auto sys = benchmark("darboux");
  const auto& z = sys.unsafe_sets.at(0);
  CHECK(z.center == Vec<double>{-2.0, 0.0});
  REQUIRE(z.num_generators() == 5);
  CHECK(z.generators(1, 0) == 0.25);
  CHECK(z.generators(0, 1) == 0.75);
  CHECK(z.generators(1, 1) == -0.375);
}

TEST_CASE("benchmark registry: unknown names and sizes are rejected") {
  CHECK_THROWS_AS(benchmark("unknown"), InvalidInputError);
  CHECK_THROWS_AS(benchmark("peruffo", 5), InvalidInputError);
  CHECK_THROWS_AS(benchmark("ratschan", 4), InvalidInputError);
  CHECK_THROWS_AS(benchmark("darboux", 3), InvalidInputError);
}

TEST_CASE("range bounding is sound on every benchmark dynamics component") {
  std::mt19937_64 rng(113);
  for (const auto& sys : all_benchmarks()) {
    for (int b = 0; b < 100; ++b) {
      const auto sub = random_subbox(sys.state_space, rng);
      std::vector<Interval> ranges(sys.dim);
      for (int i = 0; i < sys.dim; ++i) ranges[i] = sys.dynamics[i].range(sub);
      for (int s = 0; s < 1000; ++s) {
        const auto x = sample_box(sub, rng);
        for (int i = 0; i < sys.dim; ++i) {
          const double v = sys.dynamics[i].eval(x);
          REQUIRE(v >= ranges[i].lo - 1e-9);
          REQUIRE(v <= ranges[i].hi + 1e-9);
        }
      }
    }
  }
}
