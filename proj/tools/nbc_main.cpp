// Command-line front end: train certificates on built-in or user-defined
// systems, verify saved models, run multi-seed campaigns, and export
// plot-ready level-set data.
//
// Exit codes: 0 = verified, 1 = not verified, 2 = usage or input error.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nbc/benchmarks.hpp"
#include "nbc/io.hpp"
#include "nbc/loss.hpp"
#include "nbc/trainer.hpp"

namespace fs = std::filesystem;
using nbc::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct CommonOpts {
  std::string benchmark;
  std::string spec_path;
  int size = 0;
  std::string arch;
  double eta = -1.0;
  double beta1 = -1.0;
  double eps = -1.0;
  std::string zero;
  int lie_subsplits = -2;
  int max_epochs = -1;
  std::string out_dir = "runs";

  void add_to(CLI::App* cmd, bool with_out = true) {
    cmd->add_option("--benchmark", benchmark, "built-in benchmark name");
    cmd->add_option("--spec", spec_path, "system definition file (JSON)");
    cmd->add_option("--size", size, "dimension for parametric benchmark families");
    cmd->add_option("--arch", arch, "N1|N2|N3 or comma-separated hidden widths");
    cmd->add_option("--eta", eta, "learning rate");
    cmd->add_option("--beta1", beta1, "first-moment decay");
    cmd->add_option("--eps", eps, "loss margin");
    cmd->add_option("--zero", zero, "level-set knobs iota,s,sdim (sdim may be 'n')");
    cmd->add_option("--lie-subsplits", lie_subsplits, "hull splits for the flow enclosure");
    cmd->add_option("--max-epochs", max_epochs, "training epoch budget");
    if (with_out) cmd->add_option("--out", out_dir, "output directory");
  }

  std::optional<int> size_opt() const {
    return size > 0 ? std::optional<int>(size) : std::nullopt;
  }

  nbc::SystemSpec load_system() const {
    if (!spec_path.empty() && !benchmark.empty())
      throw nbc::InvalidInputError("pass either --benchmark or --spec, not both");
    if (!spec_path.empty()) return nbc::load_system(spec_path);
    if (benchmark.empty()) throw nbc::InvalidInputError("a --benchmark or --spec is required");
    return nbc::benchmark(benchmark, size_opt());
  }

  nbc::TrainConfig build_config() const {
    nbc::TrainConfig cfg;
    if (!benchmark.empty()) cfg = nbc::config_for_benchmark(benchmark, size_opt());
    if (!arch.empty()) {
      if (arch == "N1") {
        cfg.hidden = {10};
        cfg.tanh_gaps = false;
      } else if (arch == "N2") {
        cfg.hidden = {8};
        cfg.tanh_gaps = true;
      } else if (arch == "N3") {
        cfg.hidden = {5, 5};
        cfg.tanh_gaps = true;
      } else {
        cfg.hidden.clear();
        cfg.tanh_gaps = true;
        std::stringstream ss(arch);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            cfg.hidden.push_back(std::stoi(item));
          } catch (const std::exception&) {
            throw nbc::InvalidInputError("bad --arch entry '" + item + "'");
          }
        }
        if (cfg.hidden.empty()) throw nbc::InvalidInputError("empty --arch");
      }
    }
    if (eta > 0.0) cfg.eta = eta;
    if (beta1 >= 0.0) cfg.beta1 = beta1;
    if (eps > 0.0) cfg.eps = eps;
    if (!zero.empty()) {
      std::stringstream ss(zero);
      std::string item;
      std::vector<std::string> parts;
      while (std::getline(ss, item, ',')) parts.push_back(item);
      if (parts.size() != 3) throw nbc::InvalidInputError("--zero expects iota,s,sdim");
      try {
        cfg.zero.iterations = std::stoi(parts[0]);
        cfg.zero.splits = std::stoi(parts[1]);
        cfg.zero.split_dims = parts[2] == "n" ? 0 : std::stoi(parts[2]);
      } catch (const std::exception&) {
        throw nbc::InvalidInputError("bad --zero value '" + zero + "'");
      }
    }
    if (lie_subsplits >= -1) cfg.lie_subsplits = lie_subsplits;
    if (max_epochs > 0) cfg.max_epochs = max_epochs;
    return cfg;
  }

  std::string run_prefix(const nbc::SystemSpec& sys, uint64_t seed) const {
    std::string p = sys.name;
    if (size > 0) p += "-" + std::to_string(size);
    return p + "-s" + std::to_string(seed);
  }
};

std::vector<uint64_t> parse_seeds(const std::string& text) {
  std::vector<uint64_t> seeds;
  const auto range = text.find("..");
  try {
    if (range != std::string::npos) {
      const uint64_t a = std::stoull(text.substr(0, range));
      const uint64_t b = std::stoull(text.substr(range + 2));
      if (b < a) throw nbc::InvalidInputError("--seeds range is inverted");
      for (uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    }
  } catch (const nbc::Error&) {
    throw;
  } catch (const std::exception&) {
    throw nbc::InvalidInputError("bad --seeds value '" + text + "'");
  }
  if (seeds.empty()) throw nbc::InvalidInputError("--seeds is empty");
  return seeds;
}

void print_breakdown(const nbc::LossBreakdown& loss) {
  std::printf("loss: total=%s  unsafe=%s  init=%s  zero=%s  (eps=%s, cover=%zu boxes)\n",
              fmt(loss.total()).c_str(), fmt(loss.l_unsafe).c_str(), fmt(loss.l_init).c_str(),
              fmt(loss.l_zero).c_str(), fmt(loss.eps).c_str(), loss.cover_size);
  for (const auto& t : loss.unsafe_terms)
    std::printf("  unsafe set %zu: lower bound %s, hinge %s\n", t.index, fmt(t.bound).c_str(),
                fmt(t.hinge).c_str());
  for (const auto& t : loss.init_terms)
    std::printf("  initial set %zu: upper bound %s, hinge %s\n", t.index, fmt(t.bound).c_str(),
                fmt(t.hinge).c_str());
  size_t active = 0;
  double worst = -1e300;
  for (const auto& t : loss.zero_terms) {
    active += t.hinge > 0.0;
    worst = std::max(worst, t.bound);
  }
  if (!loss.zero_terms.empty())
    std::printf("  level-set boxes: %zu, active hinges %zu, worst Lie upper bound %s\n",
                loss.zero_terms.size(), active, fmt(worst).c_str());
}

nbc::ModelMeta make_meta(const CommonOpts& opts, const nbc::TrainConfig& cfg, bool verified) {
  nbc::ModelMeta meta;
  meta.benchmark = opts.benchmark.empty() ? opts.spec_path : opts.benchmark;
  meta.size = opts.size_opt();
  meta.seed = cfg.seed;
  meta.epsilon = cfg.eps;
  meta.verified = verified;
  meta.config = cfg;
  return meta;
}

int cmd_train(const CommonOpts& opts, uint64_t seed) {
  const auto sys = opts.load_system();
  auto cfg = opts.build_config();
  cfg.seed = seed;
  const auto [net, report] = nbc::train(sys, cfg);
  fs::create_directories(opts.out_dir);
  const auto prefix = opts.run_prefix(sys, seed);
  nbc::save_model(fs::path(opts.out_dir) / (prefix + "-model.json"), net,
                  make_meta(opts, cfg, report.verified));
  nbc::save_report(fs::path(opts.out_dir) / (prefix + "-report.json"), report);
  std::printf("%s: %s after %d epochs (%.2fs, cover %zu boxes)\n", prefix.c_str(),
              report.verified ? "verified" : "NOT verified", report.epochs_run,
              report.wall_time_s, report.trace.empty() ? 0 : report.trace.back().cover_size);
  return report.verified ? 0 : 1;
}

int cmd_verify(const CommonOpts& opts, const std::string& model_path, int refine) {
  const auto sys = opts.load_system();
  const auto [net, meta] = nbc::load_model(model_path);
  if (net.input_dim() != sys.dim)
    throw nbc::InvalidInputError("model input dimension " + std::to_string(net.input_dim()) +
                                 " does not match the system dimension " +
                                 std::to_string(sys.dim));
  nbc::TrainConfig cfg = meta.config;
  if (!opts.benchmark.empty() && meta.benchmark != opts.benchmark)
    cfg = opts.build_config();
  else {
    // still honor explicit overrides on top of the stored configuration
    CommonOpts merged = opts;
    if (merged.eta <= 0) merged.eta = cfg.eta;
    if (merged.beta1 < 0) merged.beta1 = cfg.beta1;
    if (merged.eps <= 0) merged.eps = cfg.eps;
    if (merged.zero.empty())
      merged.zero = std::to_string(cfg.zero.iterations) + "," + std::to_string(cfg.zero.splits) +
                    "," + std::to_string(cfg.zero.split_dims);
    if (merged.lie_subsplits < -1) merged.lie_subsplits = cfg.lie_subsplits;
    merged.arch.clear();
    auto base = merged.build_config();
    base.hidden = cfg.hidden;
    base.tanh_gaps = cfg.tanh_gaps;
    cfg = base;
  }
  cfg.zero.iterations += refine;
  cfg.zero.max_boxes = std::max(cfg.zero.max_boxes, size_t{1} << 22);

  const auto cover = nbc::enclose_zero_set(net, sys.state_space, cfg.zero);
  const auto loss = nbc::total_loss(net, sys, cover, cfg.eps, cfg.resolved_subsplits(sys));
  print_breakdown(loss);
  std::printf("%s\n", loss.verified() ? "VERIFIED" : "not verified");
  return loss.verified() ? 0 : 1;
}

int cmd_bench(const CommonOpts& opts, const std::string& seeds_text) {
  const auto seeds = parse_seeds(seeds_text);
  const auto sys = opts.load_system();
  fs::create_directories(opts.out_dir);

  struct Run {
    uint64_t seed;
    bool verified;
    int epochs;
    double wall;
  };
  std::vector<Run> runs;
  for (const uint64_t seed : seeds) {
    auto cfg = opts.build_config();
    cfg.seed = seed;
    const auto [net, report] = nbc::train(sys, cfg);
    const auto prefix = opts.run_prefix(sys, seed);
    nbc::save_model(fs::path(opts.out_dir) / (prefix + "-model.json"), net,
                    make_meta(opts, cfg, report.verified));
    nbc::save_report(fs::path(opts.out_dir) / (prefix + "-report.json"), report);
    runs.push_back({seed, report.verified, report.epochs_run, report.wall_time_s});
    std::printf("seed %llu: %s, %d epochs, %.2fs\n", (unsigned long long)seed,
                report.verified ? "verified" : "NOT verified", report.epochs_run,
                report.wall_time_s);
    std::fflush(stdout);
  }

  const auto stats = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return {mean, std::sqrt(var)};
  };

  std::vector<double> times, epochs;
  int verified_count = 0;
  for (const auto& r : runs) {
    if (!r.verified) continue;
    ++verified_count;
    times.push_back(r.wall);
    epochs.push_back(static_cast<double>(r.epochs));
  }
  const auto [tmean, tstd] = stats(times);
  const auto [emean, estd] = stats(epochs);
  const double success = 100.0 * verified_count / static_cast<double>(runs.size());
  const auto ref = opts.benchmark.empty()
                       ? std::nullopt
                       : nbc::benchmark_reference(opts.benchmark, opts.size_opt());

  json summary{{"benchmark", sys.name},
               {"n", sys.dim},
               {"seeds", seeds},
               {"success_rate_pct", success},
               {"verified", verified_count},
               {"time_mean_s", tmean},
               {"time_std_s", tstd},
               {"epochs_mean", emean},
               {"epochs_std", estd},
               {"reference", nullptr},
               {"runs", json::array()}};
  if (ref)
    summary["reference"] = json{{"time_mean_s", ref->time_mean},
                                {"time_std_s", ref->time_std},
                                {"epochs_mean", ref->epochs_mean},
                                {"epochs_std", ref->epochs_std}};
  for (const auto& r : runs)
    summary["runs"].push_back(
        {{"seed", r.seed}, {"verified", r.verified}, {"epochs", r.epochs}, {"wall_time_s", r.wall}});

  std::ofstream js(fs::path(opts.out_dir) / "summary.json");
  js << summary.dump(2) << '\n';

  std::ofstream csv(fs::path(opts.out_dir) / "summary.csv");
  csv << "benchmark,n,seeds,success_pct,time_mean_s,time_std_s,epochs_mean,epochs_std,"
         "ref_time_mean_s,ref_time_std_s,ref_epochs_mean,ref_epochs_std\n";
  csv << sys.name << ',' << sys.dim << ',' << runs.size() << ',' << fmt(success) << ','
      << fmt(tmean) << ',' << fmt(tstd) << ',' << fmt(emean) << ',' << fmt(estd) << ',';
  if (ref)
    csv << fmt(ref->time_mean) << ',' << fmt(ref->time_std) << ',' << fmt(ref->epochs_mean) << ','
        << fmt(ref->epochs_std);
  else
    csv << ",,,";
  csv << '\n';

  std::printf("%s: success %.0f%% (%d/%zu), time %.2f+-%.2fs, epochs %.1f+-%.1f", sys.name.c_str(),
              success, verified_count, runs.size(), tmean, tstd, emean, estd);
  if (ref)
    std::printf("  [reference: %.1f+-%.2fs, %.1f+-%.2f epochs]", ref->time_mean, ref->time_std,
                ref->epochs_mean, ref->epochs_std);
  std::printf("\n");
  return verified_count == static_cast<int>(runs.size()) ? 0 : 1;
}

int cmd_export(const CommonOpts& opts, const std::string& model_path, int resolution,
               std::vector<int> dims) {
  const auto sys = opts.load_system();
  const auto [net, meta] = nbc::load_model(model_path);
  if (net.input_dim() != sys.dim)
    throw nbc::InvalidInputError("model and system dimensions differ");
  if (resolution < 1) throw nbc::InvalidInputError("--resolution must be >= 1");
  if (sys.dim > 2 && dims.size() != 2)
    throw nbc::InvalidInputError("--dims i j is required for systems above two dimensions");
  if (dims.empty()) dims = {1, 2};
  if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1 || dims[0] > sys.dim || dims[1] > sys.dim ||
      dims[0] == dims[1])
    throw nbc::InvalidInputError("--dims must name two distinct 1-based dimensions");
  const int di = dims[0] - 1, dj = dims[1] - 1;

  fs::create_directories(opts.out_dir);
  const std::string stem = sys.name;

  // grid of certificate values over the selected plane
  {
    std::ofstream out(fs::path(opts.out_dir) / (stem + "-grid.csv"));
    out << "x" << dims[0] << ",x" << dims[1] << ",B\n";
    std::vector<double> x(sys.dim);
    for (int d = 0; d < sys.dim; ++d) x[d] = sys.state_space[d].mid();
    for (int a = 0; a < resolution; ++a) {
      x[di] = resolution == 1 ? sys.state_space[di].mid()
                              : sys.state_space[di].lo +
                                    sys.state_space[di].width() * a / (resolution - 1);
      for (int b = 0; b < resolution; ++b) {
        x[dj] = resolution == 1 ? sys.state_space[dj].mid()
                                : sys.state_space[dj].lo +
                                      sys.state_space[dj].width() * b / (resolution - 1);
        out << fmt(x[di]) << ',' << fmt(x[dj]) << ',' << fmt(nbc::forward(net, x)) << '\n';
      }
    }
  }

  // zero-level-set cover boxes
  {
    nbc::TrainConfig cfg = opts.build_config();
    if (opts.zero.empty() && meta.config.zero.iterations >= 1) cfg.zero = meta.config.zero;
    const auto cover = nbc::enclose_zero_set(net, sys.state_space, cfg.zero);
    std::ofstream out(fs::path(opts.out_dir) / (stem + "-cover.csv"));
    out << "index";
    for (int d = 1; d <= sys.dim; ++d) out << ",lo" << d << ",hi" << d;
    out << '\n';
    for (size_t i = 0; i < cover.size(); ++i) {
      out << i;
      for (const auto& iv : cover.box(i)) out << ',' << fmt(iv.lo) << ',' << fmt(iv.hi);
      out << '\n';
    }
  }

  // initial and unsafe set outlines (axis-aligned hulls)
  {
    std::ofstream out(fs::path(opts.out_dir) / (stem + "-sets.csv"));
    out << "kind,index";
    for (int d = 1; d <= sys.dim; ++d) out << ",lo" << d << ",hi" << d;
    out << '\n';
    const auto dump = [&](const char* kind, const std::vector<nbc::Zonotope>& sets) {
      for (size_t i = 0; i < sets.size(); ++i) {
        out << kind << ',' << i;
        for (const auto& iv : nbc::interval_hull(sets[i])) out << ',' << fmt(iv.lo) << ',' << fmt(iv.hi);
        out << '\n';
      }
    };
    dump("initial", sys.initial_sets);
    dump("unsafe", sys.unsafe_sets);
  }
  std::printf("exported %s-{grid,cover,sets}.csv to %s\n", stem.c_str(), opts.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"set-based training of neural barrier certificates"};
  app.require_subcommand(1);

  CommonOpts train_opts, verify_opts, bench_opts, export_opts;
  uint64_t seed = 0;
  std::string seeds_text = "0..9";
  std::string model_path;
  int refine = 0;
  int resolution = 201;
  std::vector<int> dims;

  auto* train_cmd = app.add_subcommand("train", "train a certificate");
  train_opts.add_to(train_cmd);
  train_cmd->add_option("--seed", seed, "initialization seed");

  auto* verify_cmd = app.add_subcommand("verify", "verify a saved model");
  verify_opts.add_to(verify_cmd, false);
  verify_cmd->add_option("--model", model_path, "model file")->required();
  verify_cmd->add_option("--refine", refine, "extra level-set iterations");

  auto* bench_cmd = app.add_subcommand("bench", "multi-seed campaign with a summary");
  bench_opts.add_to(bench_cmd);
  bench_cmd->add_option("--seeds", seeds_text, "seed range a..b or comma list");

  auto* export_cmd = app.add_subcommand("export-levelset", "emit plot-ready CSV data");
  export_opts.add_to(export_cmd);
  export_cmd->add_option("--model", model_path, "model file")->required();
  export_cmd->add_option("--resolution", resolution, "grid resolution per axis");
  export_cmd->add_option("--dims", dims, "two 1-based dimensions for the slice")->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_opts, seed);
    if (verify_cmd->parsed()) return cmd_verify(verify_opts, model_path, refine);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts, seeds_text);
    if (export_cmd->parsed()) return cmd_export(export_opts, model_path, resolution, dims);
  } catch (const nbc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
