#pragma once

// JSON serialization: model files, run reports, benchmark summaries, and
// user-defined system files. Doubles round-trip losslessly through the JSON
// writer, so a saved model verifies bit-identically after reloading.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbc/errors.hpp"
#include "nbc/network.hpp"
#include "nbc/system.hpp"
#include "nbc/trainer.hpp"

namespace nbc {

using json = nlohmann::json;

inline json to_json(const TrainConfig& cfg) {
  return json{{"hidden", cfg.hidden},
              {"tanh_gaps", cfg.tanh_gaps},
              {"eta", cfg.eta},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"adam_eps", cfg.adam_eps},
              {"eps", cfg.eps},
              {"zero",
               {{"iterations", cfg.zero.iterations},
                {"splits", cfg.zero.splits},
                {"split_dims", cfg.zero.split_dims},
                {"max_boxes", cfg.zero.max_boxes}}},
              {"lie_subsplits", cfg.lie_subsplits},
              {"pretrain_epochs", cfg.pretrain_epochs},
              {"max_epochs", cfg.max_epochs},
              {"seed", cfg.seed}};
}

inline TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.hidden = j.value("hidden", std::vector<int>{});
  cfg.tanh_gaps = j.value("tanh_gaps", cfg.tanh_gaps);
  cfg.eta = j.value("eta", cfg.eta);
  cfg.beta1 = j.value("beta1", cfg.beta1);
  cfg.beta2 = j.value("beta2", cfg.beta2);
  cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
  cfg.eps = j.value("eps", cfg.eps);
  if (j.contains("zero")) {
    const auto& z = j.at("zero");
    cfg.zero.iterations = z.value("iterations", cfg.zero.iterations);
    cfg.zero.splits = z.value("splits", cfg.zero.splits);
    cfg.zero.split_dims = z.value("split_dims", cfg.zero.split_dims);
    cfg.zero.max_boxes = z.value("max_boxes", cfg.zero.max_boxes);
  }
  cfg.lie_subsplits = j.value("lie_subsplits", cfg.lie_subsplits);
  cfg.pretrain_epochs = j.value("pretrain_epochs", cfg.pretrain_epochs);
  cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

struct ModelMeta {
  std::string benchmark;
  std::optional<int> size;
  uint64_t seed = 0;
  double epsilon = 1e-3;
  bool verified = false;
  TrainConfig config;
};

inline void save_model(const std::filesystem::path& path, const Network& net,
                       const ModelMeta& meta) {
  json layers = json::array();
  for (int j = 0; j < net.linear_layers(); ++j) {
    json w = json::array();
    for (int i = 0; i < net.weights[j].rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < net.weights[j].cols(); ++k) row.push_back(net.weights[j](i, k));
      w.push_back(std::move(row));
    }
    layers.push_back({{"W", std::move(w)}, {"b", net.biases[j]}});
  }
  json activations = json::array();
  for (int j = 0; j + 1 < net.linear_layers(); ++j)
    activations.push_back(net.has_tanh(j) ? "tanh" : "identity");
  json doc{{"arch", net.arch_widths()},
           {"activations", std::move(activations)},
           {"layers", std::move(layers)},
           {"meta",
            {{"benchmark", meta.benchmark},
             {"seed", meta.seed},
             {"epsilon", meta.epsilon},
             {"verified", meta.verified},
             {"config", to_json(meta.config)}}}};
  if (meta.size) doc["meta"]["size"] = *meta.size;
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write model file " + path.string());
  out << doc.dump(2) << '\n';
}

inline std::pair<Network, ModelMeta> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInputError("malformed model file " + path.string() + ": " + e.what());
  }
  Network net;
  try {
    const auto& layers = doc.at("layers");
    if (layers.empty()) throw InvalidInputError("model has no layers");
    for (const auto& layer : layers) {
      const auto& w = layer.at("W");
      const int rows = static_cast<int>(w.size());
      const int cols = rows > 0 ? static_cast<int>(w.at(0).size()) : 0;
      Matrix<double> m(rows, cols);
      for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(w.at(i).size()) != cols)
          throw InvalidInputError("ragged weight matrix in model file");
        for (int k = 0; k < cols; ++k) m(i, k) = w.at(i).at(k).get<double>();
      }
      net.weights.push_back(std::move(m));
      net.biases.push_back(layer.at("b").get<std::vector<double>>());
      if (static_cast<int>(net.biases.back().size()) != rows)
        throw InvalidInputError("bias length mismatch in model file");
    }
    for (int j = 0; j + 1 < net.linear_layers(); ++j)
      if (net.weights[j + 1].cols() != net.weights[j].rows())
        throw InvalidInputError("inconsistent layer widths in model file");
    if (net.output_dim() != 1) throw InvalidInputError("model output width must be 1");
    net.tanh_after.assign(net.linear_layers() - 1, 1);
    if (doc.contains("activations")) {
      const auto& acts = doc.at("activations");
      if (static_cast<int>(acts.size()) != net.linear_layers() - 1)
        throw InvalidInputError("model needs one activation entry per layer gap");
      for (size_t a = 0; a < acts.size(); ++a) {
        const auto kind = acts.at(a).get<std::string>();
        if (kind == "tanh") net.tanh_after[a] = 1;
        else if (kind == "identity") net.tanh_after[a] = 0;
        else throw InvalidInputError("unsupported activation '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInputError("malformed model file " + path.string() + ": " + e.what());
  }
  ModelMeta meta;
  if (doc.contains("meta")) {
    const auto& m = doc.at("meta");
    meta.benchmark = m.value("benchmark", std::string{});
    if (m.contains("size")) meta.size = m.at("size").get<int>();
    meta.seed = m.value("seed", uint64_t{0});
    meta.epsilon = m.value("epsilon", 1e-3);
    meta.verified = m.value("verified", false);
    if (m.contains("config")) meta.config = config_from_json(m.at("config"));
  }
  return {std::move(net), std::move(meta)};
}

inline json to_json(const RunReport& report) {
  json trace = json::array();
  for (const auto& e : report.trace)
    trace.push_back({{"epoch", e.epoch},
                     {"lU", e.l_unsafe},
                     {"lI", e.l_init},
                     {"l0", e.l_zero},
                     {"total", e.total},
                     {"coverN", e.cover_size}});
  return json{{"benchmark", report.benchmark},
              {"config", to_json(report.config)},
              {"epochs_run", report.epochs_run},
              {"wall_time_s", report.wall_time_s},
              {"pretrain_time_s", report.pretrain_time_s},
              {"verified", report.verified},
              {"rng", report.rng_id},
              {"trace", std::move(trace)}};
}

inline void save_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write report file " + path.string());
  out << to_json(report).dump(2) << '\n';
}

namespace detail {

inline Zonotope set_from_json(const json& j, int dim) {
  if (j.is_array()) {
    // plain box: [[lo, hi], ...]
    IntervalVector box;
    for (const auto& pair : j) {
      if (!pair.is_array() || pair.size() != 2)
        throw InvalidInputError("system file: box entries must be [lo, hi] pairs");
      box.push_back(Interval{pair.at(0).get<double>(), pair.at(1).get<double>()});
      if (!box.back().valid()) throw InvalidInputError("system file: box interval with lo > hi");
    }
    if (static_cast<int>(box.size()) != dim)
      throw InvalidInputError("system file: set dimension mismatch");
    return zono_from_interval(box);
  }
  const auto center = j.at("center").get<std::vector<double>>();
  if (static_cast<int>(center.size()) != dim)
    throw InvalidInputError("system file: set dimension mismatch");
  const auto& rows = j.at("generators");
  const int q = rows.empty() ? 0 : static_cast<int>(rows.at(0).size());
  Matrix<double> gens(dim, q);
  if (static_cast<int>(rows.size()) != dim)
    throw InvalidInputError("system file: generator matrix must have dim rows");
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(rows.at(i).size()) != q)
      throw InvalidInputError("system file: ragged generator matrix");
    for (int k = 0; k < q; ++k) gens(i, k) = rows.at(i).at(k).get<double>();
  }
  return make_zonotope(center, gens);
}

}  // namespace detail

// User-defined system files:
// { "dim": n, "dynamics": ["...", ...], "state_space": [[lo,hi], ...],
//   "initial_sets": [set, ...], "unsafe_sets": [set, ...] }
// where a set is either a box [[lo,hi], ...] or { "center": [...],
// "generators": [[...], ...] }.
inline SystemSpec load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read system file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInputError("malformed system file " + path.string() + ": " + e.what());
  }
  SystemSpec sys;
  try {
    sys.name = doc.value("name", path.stem().string());
    sys.dim = doc.at("dim").get<int>();
    for (const auto& src : doc.at("dynamics")) {
      sys.dynamics_src.push_back(src.get<std::string>());
      sys.dynamics.push_back(parse_expr(sys.dynamics_src.back(), sys.dim));
    }
    for (const auto& pair : doc.at("state_space")) {
      sys.state_space.push_back(Interval{pair.at(0).get<double>(), pair.at(1).get<double>()});
      if (!sys.state_space.back().valid())
        throw InvalidInputError("system file: state-space interval with lo > hi");
    }
    for (const auto& s : doc.at("initial_sets"))
      sys.initial_sets.push_back(detail::set_from_json(s, sys.dim));
    for (const auto& s : doc.at("unsafe_sets"))
      sys.unsafe_sets.push_back(detail::set_from_json(s, sys.dim));
  } catch (const json::exception& e) {
    throw InvalidInputError("malformed system file " + path.string() + ": " + e.what());
  }
  validate_system(sys);
  return sys;
}

}  // namespace nbc
