#include <catch2/catch.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "nbc/io.hpp"
#include "nbc/trainer.hpp"
#include "test_util.hpp"

using namespace nbc;
using namespace nbc::testutil;

namespace {

Network linear_net(const std::vector<double>& w, double b) {
  Network net = init_network(static_cast<int>(w.size()), {}, 0);
  auto theta = w;
  theta.push_back(b);
  set_params(net, theta);
  return net;
}

TrainConfig three_sets_config() {
  TrainConfig cfg = config_for_benchmark("three-sets");
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("adam: zero gradient from a fresh state leaves parameters unchanged") {
  AdamState state(3);
  std::vector<double> theta = {1.0, -2.0, 0.5};
  const auto before = theta;
  adam_step(state, theta, {0.0, 0.0, 0.0}, 0.1, 0.9, 0.999, 1e-8);
  CHECK(theta == before);
}

TEST_CASE("adam: first step is the sign-scaled gradient up to the epsilon correction") {
  AdamState state(2);
  std::vector<double> theta = {1.0, -1.0};
  const std::vector<double> grad = {0.4, -3.0};
  const double eta = 0.05;
  adam_step(state, theta, grad, eta, 0.9, 0.999, 1e-8);
  for (size_t i = 0; i < theta.size(); ++i) {
    const double expect = (i == 0 ? 1.0 : -1.0) - eta * grad[i] / (std::abs(grad[i]) + 1e-8);
    REQUIRE(theta[i] == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("adam: identical calls from identical state are bit-identical") {
  AdamState s1(2), s2(2);
  std::vector<double> t1 = {0.3, 0.7}, t2 = {0.3, 0.7};
  const std::vector<double> grad = {-0.2, 1.1};
  for (int k = 0; k < 5; ++k) {
    adam_step(s1, t1, grad, 0.01, 0.3, 0.999, 1e-8);
    adam_step(s2, t2, grad, 0.01, 0.3, 0.999, 1e-8);
  }
  CHECK(t1 == t2);
  CHECK(s1.m == s2.m);
  CHECK(s1.v == s2.v);
}

TEST_CASE("radial target: -1 at the initial set center") {
  const auto sys = benchmark("polynomial");
  const auto hull = interval_hull(sys.initial_sets[0]);
  std::vector<double> center(sys.dim);
  for (int i = 0; i < sys.dim; ++i) center[i] = hull[i].mid();
  CHECK(radial_target(sys, center) == Approx(-kPretrainAmplitude));
}

TEST_CASE("pretraining: deterministic and sign-aligned with the target") {
  const auto sys = benchmark("polynomial");
  TrainConfig cfg = config_for_benchmark("polynomial");
  cfg.seed = 7;

  Network a = init_network(sys.dim, cfg.hidden, cfg.seed);
  Network b = init_network(sys.dim, cfg.hidden, cfg.seed);
  pretrain(a, sys, cfg);
  pretrain(b, sys, cfg);
  CHECK(get_params(a) == get_params(b));

  std::mt19937_64 rng(509);
  int agree = 0;
  const int samples = 2000;
  for (int s = 0; s < samples; ++s) {
    const auto x = sample_in_box(sys.state_space, rng);
    const bool same = (forward(a, x) >= 0.0) == (radial_target(sys, x) >= 0.0);
    agree += same;
  }
  CHECK(agree >= samples * 60 / 100);
}

TEST_CASE("training: three-sets verifies with the built-in configuration") {
  const auto sys = benchmark("three-sets");
  const auto [net, report] = train(sys, three_sets_config());
  REQUIRE(report.verified);
  CHECK(report.epochs_run <= 500);
  REQUIRE_FALSE(report.trace.empty());
  const auto& last = report.trace.back();
  CHECK(last.total == 0.0);
  CHECK(last.l_unsafe == 0.0);
  CHECK(last.l_init == 0.0);
  CHECK(last.l_zero == 0.0);

  // the saved parameters re-verify, also at a refined cover
  TrainConfig cfg = three_sets_config();
  CHECK(verify(net, sys, cfg).verified);
  cfg.zero.iterations += 1;
  CHECK(verify(net, sys, cfg).verified);
}

TEST_CASE("training: bit-identical runs for identical seed and configuration") {
  const auto sys = benchmark("three-sets");
  const auto [net1, rep1] = train(sys, three_sets_config());
  const auto [net2, rep2] = train(sys, three_sets_config());
  CHECK(get_params(net1) == get_params(net2));
  REQUIRE(rep1.trace.size() == rep2.trace.size());
  for (size_t i = 0; i < rep1.trace.size(); ++i) {
    CHECK(rep1.trace[i].total == rep2.trace[i].total);
    CHECK(rep1.trace[i].cover_size == rep2.trace[i].cover_size);
  }
}

TEST_CASE("training: a warm start with a valid certificate exits at epoch one") {
  const auto sys = benchmark("three-sets");
  const auto cert = linear_net({0.0, -1.0}, 2.5);
  TrainConfig cfg = three_sets_config();
  cfg.max_epochs = 1;
  const auto [net, report] = train(sys, cfg, &cert);
  CHECK(report.verified);
  CHECK(report.epochs_run == 1);
  CHECK(get_params(net) == get_params(cert));
}

TEST_CASE("training: invalid configurations are rejected") {
  const auto sys = benchmark("three-sets");
  TrainConfig cfg = three_sets_config();
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(train(sys, cfg), InvalidInputError);
  cfg = three_sets_config();
  cfg.eta = 0.0;
  CHECK_THROWS_AS(train(sys, cfg), InvalidInputError);
  cfg = three_sets_config();
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(train(sys, cfg), InvalidInputError);
}

TEST_CASE("verification: random networks and constants fail as expected") {
  const auto sys = benchmark("darboux");
  TrainConfig cfg = config_for_benchmark("darboux");
  const auto net = init_network(2, cfg.hidden, 3);
  const auto rep = verify(net, sys, cfg);
  CHECK_FALSE(rep.verified);
  CHECK(rep.trace.at(0).total > 0.0);

  // B(x) = 1 maps the initial set to 1, violating the sign requirement there
  const auto one = linear_net({0.0, 0.0}, 1.0);
  const auto rep2 = verify(one, sys, cfg);
  CHECK_FALSE(rep2.verified);
  CHECK(rep2.trace.at(0).l_init == Approx(1.0));
  CHECK(rep2.trace.at(0).l_zero == 0.0);
}

TEST_CASE("parameter gradient: finite differences on a frozen cover") {
  const auto sys = benchmark("polynomial");
  TrainConfig cfg = config_for_benchmark("polynomial");
  std::mt19937_64 rng(521);
  int done = 0;
  while (done < 3) {
    Network net = init_network(2, cfg.hidden, rng());
    const auto cover = enclose_zero_set(net, sys.state_space, cfg.zero);
    std::vector<double> grad;
    const auto loss = epoch_loss_and_gradient(net, sys, cover, cfg, grad);
    if (loss.total() == 0.0) continue;
    const int subsplits = cfg.resolved_subsplits(sys);
    auto theta = get_params(net);
    const double h = 1e-5;
    bool near_kink = false;
    for (size_t k = 0; k < theta.size(); k += 7) {
      auto tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      set_params(net, tp);
      const double fp = total_loss(net, sys, cover, cfg.eps, subsplits).total();
      set_params(net, tm);
      const double fm = total_loss(net, sys, cover, cfg.eps, subsplits).total();
      set_params(net, theta);
      const double fd = (fp - fm) / (2.0 * h);
      if (!rel_close(grad[k], fd, 1e-4)) near_kink = true;
    }
    if (near_kink) continue;  // re-draw near hinge boundaries
    ++done;
  }
  CHECK(done == 3);
}

TEST_CASE("parameter gradient: flat region gives exactly zero") {
  const auto sys = benchmark("three-sets");
  const auto cert = linear_net({0.0, -1.0}, 2.5);
  TrainConfig cfg = three_sets_config();
  const auto cover = enclose_zero_set(cert, sys.state_space, cfg.zero);
  std::vector<double> grad;
  const auto loss = epoch_loss_and_gradient(cert, sys, cover, cfg, grad);
  CHECK(loss.total() == 0.0);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("parameter gradient: scaling the seed scales the gradient") {
  const auto sys = benchmark("polynomial");
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const auto net = init_network(2, {8}, seed);
    Tape tape;
    const auto rnet = lift_network(net, tape);
    const Rev term = unsafe_term(rnet, sys.unsafe_sets[0], 1e-3);
    if (!term.tracked()) continue;  // hinge inactive for this draw
    std::vector<double> g1(param_count(net), 0.0), g3(param_count(net), 0.0);
    tape.accumulate_gradient(term.idx, 1.0, g1);
    tape.accumulate_gradient(term.idx, 3.0, g3);
    for (size_t i = 0; i < g1.size(); ++i) REQUIRE(rel_close(g3[i], 3.0 * g1[i], 1e-12));
    return;
  }
  FAIL("no seed produced an active hinge");
}

TEST_CASE("simulation: a verified three-sets certificate has no violations") {
  const auto sys = benchmark("three-sets");
  const auto cert = linear_net({0.0, -1.0}, 2.5);
  REQUIRE(verify(cert, sys, three_sets_config()).verified);
  const auto rep = simulate_check(cert, sys, 10.0, 100, 3);
  CHECK(rep.trajectories == 100);
  CHECK(rep.max_certificate_value <= 1e-6);
  CHECK(rep.steps > 0);
}

TEST_CASE("simulation: stable linear decay matches the closed form") {
  // single-set decay variant: f = -x with one initial box and one unsafe box
  SystemSpec sys;
  sys.name = "decay";
  sys.dim = 2;
  sys.dynamics_src = {"-x1", "-x2"};
  for (const auto& s : sys.dynamics_src) sys.dynamics.push_back(parse_expr(s, 2));
  sys.state_space = {{0.0, 4.0}, {0.0, 4.0}};
  sys.initial_sets = {zono_from_interval({{2.7, 3.3}, {2.7, 3.3}})};
  sys.unsafe_sets = {zono_from_interval({{3.3, 3.7}, {0.3, 0.7}})};
  Matrix<double> a(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -1.0;
  sys.linear = a;
  validate_system(sys);

  const auto cert = linear_net({1.0, -1.0}, -1.0);  // B = x1 - x2 - 1
  TrainConfig cfg;
  cfg.zero = ZeroParams{2, 4, 0};
  REQUIRE(verify(cert, sys, cfg).verified);
  const auto rep = simulate_check(cert, sys, 5.0, 50, 7);
  CHECK(rep.trajectories == 50);
  CHECK(rep.max_certificate_value <= 1e-6);

  // independent RK4 accuracy check against x(t) = x0 * exp(-t)
  std::mt19937_64 rng(523);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x = sample_member(sys.initial_sets[0], rng);
    const auto x0 = x;
    const double h = 1e-3;
    const int steps = 2000;
    std::vector<double> scratch;
    for (int s = 0; s < steps; ++s) {
      const auto k1 = sys.flow_at(x, scratch);
      std::vector<double> x2(2), x3(2), x4(2);
      for (int i = 0; i < 2; ++i) x2[i] = x[i] + 0.5 * h * k1[i];
      const auto k2 = sys.flow_at(x2, scratch);
      for (int i = 0; i < 2; ++i) x3[i] = x[i] + 0.5 * h * k2[i];
      const auto k3 = sys.flow_at(x3, scratch);
      for (int i = 0; i < 2; ++i) x4[i] = x[i] + h * k3[i];
      const auto k4 = sys.flow_at(x4, scratch);
      for (int i = 0; i < 2; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const double decay = std::exp(-h * steps);
    for (int i = 0; i < 2; ++i) REQUIRE(x[i] == Approx(x0[i] * decay).epsilon(1e-9));
  }
}

TEST_CASE("model files: round-trip is bit-exact and verification is preserved") {
  const auto sys = benchmark("three-sets");
  const auto [net, report] = train(sys, three_sets_config());
  REQUIRE(report.verified);

  const auto dir = std::filesystem::temp_directory_path() / "nbc_test_model";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.json";
  ModelMeta meta;
  meta.benchmark = "three-sets";
  meta.seed = report.config.seed;
  meta.epsilon = report.config.eps;
  meta.verified = report.verified;
  meta.config = report.config;
  save_model(path, net, meta);

  const auto [loaded, lmeta] = load_model(path);
  CHECK(get_params(loaded) == get_params(net));
  CHECK(lmeta.benchmark == "three-sets");
  CHECK(lmeta.verified);
  CHECK(verify(loaded, sys, report.config).verified);
  std::filesystem::remove_all(dir);
}

TEST_CASE("model files: malformed documents are rejected") {
  const auto dir = std::filesystem::temp_directory_path() / "nbc_test_badmodel";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bad.json";
  {
    std::ofstream out(path);
    out << "{\"layers\": [{\"W\": [[1, 2]], \"b\": [0, 0]}]}";
  }
  CHECK_THROWS_AS(load_model(path), InvalidInputError);
  {
    std::ofstream out(path);
    out << "not json";
  }
  CHECK_THROWS_AS(load_model(path), InvalidInputError);
  std::filesystem::remove_all(dir);
}
