#pragma once

// End-to-end training of certificate networks: deterministic initialization,
// a short pretraining phase toward a radial target around the initial set,
// then Adam on the set-based loss until it reaches exactly zero (which proves
// safety) or the epoch budget runs out. Also the standalone verifier and an
// empirical trajectory check on the trained certificate.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nbc/autodiff.hpp"
#include "nbc/benchmarks.hpp"
#include "nbc/errors.hpp"
#include "nbc/loss.hpp"
#include "nbc/network.hpp"
#include "nbc/rng.hpp"
#include "nbc/system.hpp"
#include "nbc/zeroset.hpp"

namespace nbc {

struct TrainConfig {
  std::vector<int> hidden;  // hidden linear widths; empty = single linear layer
  bool tanh_gaps = true;    // false: hidden layers chain linearly (no activation)
  double eta = 0.1;
  double beta1 = 0.3;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double eps = 1e-3;  // loss margin enforcing the strict inequalities
  ZeroParams zero;
  int lie_subsplits = -1;  // -1: flow default (0 linear, 2 otherwise)
  int pretrain_epochs = 10;
  int max_epochs = 10000;
  uint64_t seed = 0;

  void validate() const {
    if (eta <= 0.0) throw InvalidInputError("config: eta must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0) throw InvalidInputError("config: beta1 must be in [0, 1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw InvalidInputError("config: beta2 must be in [0, 1)");
    if (eps <= 0.0) throw InvalidInputError("config: eps must be > 0");
    if (max_epochs < 1) throw InvalidInputError("config: max_epochs must be >= 1");
    if (pretrain_epochs < 0) throw InvalidInputError("config: pretrain_epochs must be >= 0");
  }

  int resolved_subsplits(const SystemSpec& sys) const {
    return lie_subsplits < 0 ? default_flow_subsplits(sys) : lie_subsplits;
  }
};

inline TrainConfig config_for_benchmark(const std::string& name,
                                        std::optional<int> size = std::nullopt) {
  const auto d = benchmark_defaults(name, size);
  TrainConfig cfg;
  cfg.hidden = d.hidden;
  cfg.tanh_gaps = d.tanh_gaps;
  cfg.eta = d.eta;
  cfg.beta1 = d.beta1;
  cfg.zero.iterations = d.zero_iterations;
  cfg.zero.splits = d.zero_splits;
  cfg.zero.split_dims = d.zero_split_dims;
  return cfg;
}

struct EpochRecord {
  int epoch = 0;
  double l_unsafe = 0.0, l_init = 0.0, l_zero = 0.0, total = 0.0;
  size_t cover_size = 0;
};

struct RunReport {
  std::string benchmark;
  TrainConfig config;
  int epochs_run = 0;
  double wall_time_s = 0.0;     // pretraining plus training, excluding serialization
  double pretrain_time_s = 0.0;
  bool verified = false;
  std::string rng_id = kRngId;
  std::vector<EpochRecord> trace;
};

struct AdamState {
  std::vector<double> m, v;
  long step = 0;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Standard Adam update with bias correction; deterministic.
inline void adam_step(AdamState& state, std::vector<double>& theta,
                      const std::vector<double>& grad, double eta, double beta1, double beta2,
                      double adam_eps) {
  if (theta.size() != grad.size() || theta.size() != state.m.size())
    throw InvalidInputError("adam_step: size mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= eta * mhat / (std::sqrt(vhat) + adam_eps);
  }
}

// Pretraining target: a radial bowl around each initial set's center,
// rising with the squared distance and crossing zero at the farthest
// state-space corner, so it is non-positive on the whole state space. The
// amplitude deepens the bowl, which parks the output bias well below the
// unsafe-hinge equilibrium; training then approaches feasibility from below,
// the direction in which the hinges can actually steer the offset. With
// several initial sets, the minimum over the per-set bowls keeps the target
// negative inside each of them.
inline constexpr double kPretrainAmplitude = 4.0;

inline double radial_target(const SystemSpec& sys, const std::vector<double>& x) {
  double best = 0.0;
  for (size_t k = 0; k < sys.initial_sets.size(); ++k) {
    const auto hull = interval_hull(sys.initial_sets[k]);
    double reach2 = 0.0, dist2 = 0.0;
    for (int i = 0; i < sys.dim; ++i) {
      const double c = hull[i].mid();
      const double d = x[i] - c;
      dist2 += d * d;
      const double far = std::max(sys.state_space[i].hi - c, c - sys.state_space[i].lo);
      reach2 += far * far;
    }
    reach2 = std::max(reach2, 1e-18);
    const double t = kPretrainAmplitude * (dist2 / reach2 - 1.0);
    if (k == 0 || t < best) best = t;
  }
  return best;
}

// A few epochs of pointwise mean-squared-error regression toward the radial
// target on low-discrepancy samples of the state space. The optimizer state
// is shared with the subsequent set-based training: the accumulated second
// moments damp the first training steps, which keeps the output bias from
// overshooting the unsafe-hinge equilibrium right after the handover.
inline void pretrain(Network& net, const SystemSpec& sys, const TrainConfig& cfg,
                     AdamState& state) {
  constexpr int kBatch = 256;
  Tape tape;
  std::vector<double> grad(param_count(net), 0.0);
  for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    tape.clear();
    const auto rnet = lift_network(net, tape);
    Rev loss(0.0);
    for (int s = 0; s < kBatch; ++s) {
      const uint64_t index = static_cast<uint64_t>(epoch) * kBatch + s + 1;
      const auto u = halton_point(index, sys.dim);
      std::vector<double> x(sys.dim);
      for (int i = 0; i < sys.dim; ++i)
        x[i] = sys.state_space[i].lo + sys.state_space[i].width() * u[i];
      const Rev err = forward(rnet, x) - radial_target(sys, x);
      loss += err * err;
    }
    loss = loss * (1.0 / kBatch);
    grad.assign(grad.size(), 0.0);
    if (loss.tracked()) tape.accumulate_gradient(loss.idx, 1.0, grad);
    auto theta = get_params(net);
    adam_step(state, theta, grad, cfg.eta, cfg.beta1, cfg.beta2, cfg.adam_eps);
    set_params(net, theta);
  }
}

inline void pretrain(Network& net, const SystemSpec& sys, const TrainConfig& cfg) {
  AdamState state(param_count(net));
  pretrain(net, sys, cfg, state);
}

// Loss value and parameter gradient for one epoch on a given zero cover. The
// cover is treated as a constant: gradients flow through the set propagation
// and the Lie enclosure but not through the branch-and-bound that produced
// the boxes. Terms are evaluated one at a time and the tape rewound in
// between, so memory stays proportional to a single term.
inline LossBreakdown epoch_loss_and_gradient(const Network& net, const SystemSpec& sys,
                                             const ZeroCover& cover, const TrainConfig& cfg,
                                             std::vector<double>& grad) {
  const int subsplits = cfg.resolved_subsplits(sys);
  LossBreakdown out;
  out.eps = cfg.eps;
  out.cover_size = cover.size();
  grad.assign(param_count(net), 0.0);

  Tape tape;
  const auto rnet = lift_network(net, tape);
  const size_t base = tape.size();

  const auto consume = [&](const Rev& term) {
    if (term.tracked()) tape.accumulate_gradient(term.idx, 1.0, grad);
    tape.rewind(base);
    return term.v;
  };

  for (size_t i = 0; i < sys.unsafe_sets.size(); ++i) {
    const auto [lo, hi] = output_bounds(rnet, sys.unsafe_sets[i]);
    const double hinge = consume(smax(Rev(0.0), Rev(cfg.eps) - lo));
    out.unsafe_terms.push_back({i, lo.v, hinge});
    out.l_unsafe += hinge;
  }
  for (size_t i = 0; i < sys.initial_sets.size(); ++i) {
    const auto [lo, hi] = output_bounds(rnet, sys.initial_sets[i]);
    const double hinge = consume(smax(Rev(0.0), hi));
    out.init_terms.push_back({i, hi.v, hinge});
    out.l_init += hinge;
  }
  for (size_t i = 0; i < cover.size(); ++i) {
    const auto [lo, hi] = lie_bounds(rnet, sys, cover.box_zonotope(i), subsplits);
    const double hinge = consume(smax(Rev(0.0), hi + Rev(cfg.eps)));
    out.zero_terms.push_back({i, hi.v, hinge});
    out.l_zero += hinge;
  }
  if (out.l_unsafe < 0.0 || out.l_init < 0.0 || out.l_zero < 0.0 ||
      out.total() != out.l_unsafe + out.l_init + out.l_zero)
    throw ContractError("epoch loss: component decomposition violated");
  return out;
}

// Full training run. Initializes (unless warm-started), pretrains, then
// repeats: enclose the zero-level set, evaluate the loss, stop verified on
// exactly zero, otherwise take an Adam step. The returned parameters are the
// ones whose loss was recorded last.
inline std::pair<Network, RunReport> train(const SystemSpec& sys, const TrainConfig& cfg,
                                           const Network* warm_start = nullptr) {
  cfg.validate();
  validate_system(sys);
  RunReport report;
  report.benchmark = sys.name;
  report.config = cfg;

  const auto t_start = std::chrono::steady_clock::now();
  Network net;
  std::optional<AdamState> state;
  if (warm_start) {
    if (warm_start->input_dim() != sys.dim)
      throw InvalidInputError("train: warm-start network dimension mismatch");
    net = *warm_start;
    state.emplace(param_count(net));
  } else {
    net = init_network(sys.dim, cfg.hidden, cfg.seed, cfg.tanh_gaps);
    state.emplace(param_count(net));
    pretrain(net, sys, cfg, *state);
  }
  report.pretrain_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  std::vector<double> grad;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const ZeroCover cover = enclose_zero_set(net, sys.state_space, cfg.zero);
    const LossBreakdown loss = epoch_loss_and_gradient(net, sys, cover, cfg, grad);
    report.trace.push_back(
        {epoch, loss.l_unsafe, loss.l_init, loss.l_zero, loss.total(), cover.size()});
    report.epochs_run = epoch;
    if (loss.verified()) {
      report.verified = true;
      break;
    }
    if (epoch == cfg.max_epochs) break;
    auto theta = get_params(net);
    adam_step(*state, theta, grad, cfg.eta, cfg.beta1, cfg.beta2, cfg.adam_eps);
    set_params(net, theta);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(net), std::move(report)};
}

// Single loss evaluation without updates; verified iff the total is exactly
// zero. Used standalone and as the refined post-training re-check.
inline RunReport verify(const Network& net, const SystemSpec& sys, const TrainConfig& cfg) {
  cfg.validate();
  validate_system(sys);
  if (net.input_dim() != sys.dim)
    throw InvalidInputError("verify: network and system dimensions differ");
  RunReport report;
  report.benchmark = sys.name;
  report.config = cfg;
  const auto t_start = std::chrono::steady_clock::now();
  const ZeroCover cover = enclose_zero_set(net, sys.state_space, cfg.zero);
  const LossBreakdown loss =
      total_loss(net, sys, cover, cfg.eps, cfg.resolved_subsplits(sys));
  report.trace.push_back({0, loss.l_unsafe, loss.l_init, loss.l_zero, loss.total(), cover.size()});
  report.verified = loss.verified();
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

struct SimulationReport {
  int trajectories = 0;
  long steps = 0;
  double horizon = 0.0;
  double max_certificate_value = -1e300;
};

// Empirical corroboration on a verified certificate: integrate trajectories
// from random initial states with fixed-step RK4, stopping when a trajectory
// leaves the state space. Every visited state must keep the certificate
// non-positive (up to 1e-6) and stay out of every unsafe set; a violation is
// a hard failure because it would expose an unsound enclosure.
inline SimulationReport simulate_check(const Network& net, const SystemSpec& sys, double horizon,
                                       int count, uint64_t seed = 0) {
  validate_system(sys);
  if (net.input_dim() != sys.dim)
    throw InvalidInputError("simulate_check: network and system dimensions differ");
  constexpr double kStep = 1e-3;
  SimulationReport rep;
  rep.horizon = horizon;
  std::mt19937_64 rng(seed);
  std::vector<double> scratch;

  const auto in_unsafe = [&](const std::vector<double>& x) {
    for (const auto& u : sys.unsafe_sets) {
      const auto hull = interval_hull(u);
      if (!box_contains(hull, x)) continue;
      bool is_box = true;
      for (int j = 0; j < u.num_generators() && is_box; ++j) {
        int nonzero = 0;
        for (int i = 0; i < u.dim(); ++i) nonzero += u.generators(i, j) != 0.0;
        is_box = nonzero <= 1;
      }
      if (is_box) return true;
      if (u.dim() == 2) {
        if (zonogon_contains(u, x)) return true;
        continue;
      }
      return true;  // conservative for non-box sets above two dimensions
    }
    return false;
  };

  for (int t = 0; t < count; ++t) {
    const auto& init = sys.initial_sets[t % sys.initial_sets.size()];
    std::vector<double> x = sample_member(init, rng);
    const long total_steps = std::lround(horizon / kStep);
    for (long s = 0; s <= total_steps; ++s) {
      if (!box_contains(sys.state_space, x)) break;  // trajectory clipped at the boundary
      const double b = forward(net, x);
      rep.max_certificate_value = std::max(rep.max_certificate_value, b);
      if (b > 1e-6)
        throw ContractError("simulate_check: certificate positive along trajectory " +
                            std::to_string(t) + " at t=" + std::to_string(s * kStep));
      if (in_unsafe(x))
        throw ContractError("simulate_check: trajectory " + std::to_string(t) +
                            " entered an unsafe set at t=" + std::to_string(s * kStep));
      if (s == total_steps) break;
      // classic RK4 with a fixed step
      const auto k1 = sys.flow_at(x, scratch);
      std::vector<double> x2(sys.dim), x3(sys.dim), x4(sys.dim);
      for (int i = 0; i < sys.dim; ++i) x2[i] = x[i] + 0.5 * kStep * k1[i];
      const auto k2 = sys.flow_at(x2, scratch);
      for (int i = 0; i < sys.dim; ++i) x3[i] = x[i] + 0.5 * kStep * k2[i];
      const auto k3 = sys.flow_at(x3, scratch);
      for (int i = 0; i < sys.dim; ++i) x4[i] = x[i] + kStep * k3[i];
      const auto k4 = sys.flow_at(x4, scratch);
      for (int i = 0; i < sys.dim; ++i)
        x[i] += kStep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      ++rep.steps;
    }
    ++rep.trajectories;
  }
  return rep;
}

}  // namespace nbc
