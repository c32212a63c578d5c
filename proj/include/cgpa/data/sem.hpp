#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cgpa/causal/graph.hpp"
#include "cgpa/core/error.hpp"
#include "cgpa/core/random.hpp"
#include "cgpa/data/dataset.hpp"
#include "cgpa/data/record.hpp"
#include "cgpa/data/schema.hpp"

namespace cgpa {

struct WeightedEdge {
  std::string from;
  std::string to;
  double weight = 0.0;
};

enum class NoiseKind { Gaussian, Uniform, Laplace };

/// Gaussian(sigma = a), Uniform(a, b), Laplace(scale = a).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double a = 1.0;
  double b = 0.0;

  double draw(Rng& rng) const {
    switch (kind) {
      case NoiseKind::Gaussian: return a * rng.normal();
      case NoiseKind::Uniform: return rng.uniform(a, b);
      case NoiseKind::Laplace: return rng.laplace(a);
    }
    return 0.0;
  }
};

/// Maps a latent value to a raw survey value.
/// Threshold form: value falls in interval k (k = number of thresholds <= value)
/// and is labelled levels[k]. Affine form: offset + scale * latent, rounded and
/// clamped to the factor's range.
struct Discretizer {
  std::vector<double> thresholds;
  std::vector<std::string> levels;
  struct Affine {
    double offset = 0.0;
    double scale = 1.0;
    int decimals = 2;
  };
  std::optional<Affine> affine;
};

struct SemSpec {
  std::vector<std::string> nodes;
  std::vector<WeightedEdge> edges;
  std::map<std::string, NoiseSpec> noise;
  std::map<std::string, Discretizer> discretizers;
  std::uint64_t seed = 0;

  /// Ground-truth DAG; throws CyclicSpec on a cycle.
  Dag dag() const {
    Dag d(nodes);
    for (const auto& e : edges) {
      const auto a = detail::node_index(nodes, e.from), b = detail::node_index(nodes, e.to);
      if (a == b || d.would_create_cycle(a, b))
        fail(ErrorCode::CyclicSpec, "edge " + e.from + "->" + e.to + " closes a cycle");
      d.add_edge(a, b);
    }
    return d;
  }

  /// weights(i, j) = coefficient of node j in node i's equation.
  Eigen::MatrixXd weight_matrix() const {
    const auto p = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
    for (const auto& e : edges)
      w(static_cast<Eigen::Index>(detail::node_index(nodes, e.to)),
        static_cast<Eigen::Index>(detail::node_index(nodes, e.from))) = e.weight;
    return w;
  }
};

struct SyntheticData {
  std::vector<StudentRecord> records;
  NumericDataset latent;  // one column per spec node, unscaled
  Dag truth;
  Eigen::MatrixXd weights;
};

inline void validate_sem(const SemSpec& spec) {
  (void)spec.dag();
  for (const auto& [node, d] : spec.discretizers) {
    (void)detail::node_index(spec.nodes, node);
    for (std::size_t i = 1; i < d.thresholds.size(); ++i)
      if (!(d.thresholds[i] > d.thresholds[i - 1]))
        fail(ErrorCode::InvalidArgument, "thresholds for '" + node + "' must be strictly increasing");
    if (!d.affine && !d.levels.empty() && d.levels.size() != d.thresholds.size() + 1)
      fail(ErrorCode::InvalidArgument, "discretizer for '" + node + "' needs thresholds+1 levels");
  }
  for (const auto& [node, n] : spec.noise) (void)detail::node_index(spec.nodes, node);
}

inline RawValue discretize(const Discretizer& d, double latent, const FactorSpec* factor) {
  if (d.affine) {
    double v = d.affine->offset + d.affine->scale * latent;
    const double m = std::pow(10.0, d.affine->decimals);
    v = std::round(v * m) / m;
    if (factor && factor->continuous()) v = std::clamp(v, factor->range.min, factor->range.max);
    return v;
  }
  std::size_t k = 0;
  while (k < d.thresholds.size() && latent >= d.thresholds[k]) ++k;
  if (!d.levels.empty()) return d.levels[k];
  if (factor && !factor->continuous()) return factor->levels.at(k);
  return static_cast<double>(k);
}

/// Samples n rows from the linear SEM: each latent value is the weighted sum of
/// its parents plus that node's noise, visited in topological order. Raw
/// records are produced by the node discretizers (nodes without one keep the
/// latent value). Output is a pure function of (spec, n).
inline SyntheticData generate_synthetic(const SemSpec& spec, std::size_t n,
                                        const FactorSchema* schema = nullptr) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be positive");
  validate_sem(spec);
  Dag dag = spec.dag();
  const auto order = dag.topological_order();
  const auto w = spec.weight_matrix();
  const auto p = spec.nodes.size();

  std::vector<NoiseSpec> noise(p);
  for (std::size_t i = 0; i < p; ++i)
    if (auto it = spec.noise.find(spec.nodes[i]); it != spec.noise.end()) noise[i] = it->second;

  std::vector<std::vector<std::size_t>> parents(p);
  for (std::size_t i = 0; i < p; ++i) parents[i] = dag.parents(i);

  Rng rng(spec.seed);
  Matrix latent(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < n; ++r) {
    for (auto v : order) {
      double x = noise[v].draw(rng);
      for (auto u : parents[v]) x += w(v, u) * latent(r, u);
      latent(r, v) = x;
    }
  }

  std::vector<StudentRecord> records(n);
  for (std::size_t i = 0; i < p; ++i) {
    const auto& node = spec.nodes[i];
    const FactorSpec* factor = schema ? schema->find(node) : nullptr;
    auto d = spec.discretizers.find(node);
    for (std::size_t r = 0; r < n; ++r) {
      const double x = latent(r, i);
      records[r].values.emplace(node, d == spec.discretizers.end() ? RawValue{x} : discretize(d->second, x, factor));
    }
  }
  if (schema) {
    for (std::size_t r = 0; r < n; ++r) {
      auto bad = invalid_fields(records[r], *schema);
      if (!bad.empty())
        fail(ErrorCode::ValueOutOfDomain, "generated row " + std::to_string(r + 1) + " invalid at " + bad.front());
    }
  }
  return {std::move(records), NumericDataset(std::move(latent), spec.nodes), std::move(dag), w};
}

inline nlohmann::json to_json(const SemSpec& s) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : s.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
  nlohmann::json noise = nlohmann::json::object();
  for (const auto& [k, n] : s.noise) {
    switch (n.kind) {
      case NoiseKind::Gaussian: noise[k] = {{"kind", "gaussian"}, {"sigma", n.a}}; break;
      case NoiseKind::Uniform: noise[k] = {{"kind", "uniform"}, {"a", n.a}, {"b", n.b}}; break;
      case NoiseKind::Laplace: noise[k] = {{"kind", "laplace"}, {"b", n.a}}; break;
    }
  }
  nlohmann::json disc = nlohmann::json::object();
  for (const auto& [k, d] : s.discretizers) {
    nlohmann::json jd = nlohmann::json::object();
    if (d.affine) {
      jd["affine"] = {{"offset", d.affine->offset}, {"scale", d.affine->scale}, {"decimals", d.affine->decimals}};
    } else {
      jd["thresholds"] = d.thresholds;
      if (!d.levels.empty()) jd["levels"] = d.levels;
    }
    disc[k] = std::move(jd);
  }
  return {{"nodes", s.nodes}, {"edges", edges}, {"noise", noise}, {"discretizers", disc}, {"seed", s.seed}};
}

inline SemSpec sem_from_json(const nlohmann::json& j) {
  SemSpec s;
  try {
    s.nodes = j.at("nodes").get<std::vector<std::string>>();
    const auto edges = j.value("edges", nlohmann::json::array());
    for (const auto& e : edges)
      s.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("weight").get<double>()});
    const auto noise = j.value("noise", nlohmann::json::object());
    for (const auto& [k, jn] : noise.items()) {
      const auto kind = jn.at("kind").get<std::string>();
      NoiseSpec n;
      if (kind == "gaussian") {
        n = {NoiseKind::Gaussian, jn.value("sigma", 1.0), 0.0};
      } else if (kind == "uniform") {
        n = {NoiseKind::Uniform, jn.at("a").get<double>(), jn.at("b").get<double>()};
      } else if (kind == "laplace") {
        n = {NoiseKind::Laplace, jn.at("b").get<double>(), 0.0};
      } else {
        fail(ErrorCode::Parse, "unknown noise kind '" + kind + "'");
      }
      s.noise[k] = n;
    }
    const auto discretizers = j.value("discretizers", nlohmann::json::object());
    for (const auto& [k, jd] : discretizers.items()) {
      Discretizer d;
      if (jd.contains("affine")) {
        const auto& a = jd.at("affine");
        d.affine = Discretizer::Affine{a.value("offset", 0.0), a.value("scale", 1.0), a.value("decimals", 2)};
      } else {
        d.thresholds = jd.at("thresholds").get<std::vector<double>>();
        d.levels = jd.value("levels", std::vector<std::string>{});
      }
      s.discretizers[k] = std::move(d);
    }
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("SemSpec JSON: ") + e.what());
  }
  validate_sem(s);
  return s;
}

inline SemSpec load_sem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
  return sem_from_json(j);
}

}  // namespace cgpa
