#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "cgpa/causal/graph.hpp"

namespace cgpa {

/// Any of the graph families produced by discovery.
using AnyGraph = std::variant<Dag, PartiallyDirectedGraph, WeightedDag>;

enum class GraphFormat { Dot, Json };

inline nlohmann::json to_json(const PartiallyDirectedGraph& g) {
  nlohmann::json directed = nlohmann::json::array();
  for (auto [a, b] : g.directed()) directed.push_back({{"from", g.nodes()[a]}, {"to", g.nodes()[b]}});
  nlohmann::json undirected = nlohmann::json::array();
  for (auto [a, b] : g.undirected()) undirected.push_back({{"a", g.nodes()[a]}, {"b", g.nodes()[b]}});
  return {{"nodes", g.nodes()}, {"directed", directed}, {"undirected", undirected}};
}

inline nlohmann::json to_json(const Dag& g) { return to_json(PartiallyDirectedGraph::from_dag(g)); }

inline nlohmann::json to_json(const WeightedDag& g) {
  nlohmann::json directed = nlohmann::json::array();
  for (auto [a, b] : g.dag().edges())
    directed.push_back({{"from", g.dag().nodes()[a]}, {"to", g.dag().nodes()[b]}, {"weight", g.weight(a, b)}});
  return {{"nodes", g.dag().nodes()},
          {"directed", directed},
          {"undirected", nlohmann::json::array()},
          {"prune_threshold", g.prune_threshold()}};
}

inline nlohmann::json to_json(const AnyGraph& g) {
  return std::visit([](const auto& x) { return to_json(x); }, g);
}

inline PartiallyDirectedGraph pdag_from_json(const nlohmann::json& j) {
  try {
    PartiallyDirectedGraph g(j.at("nodes").get<std::vector<std::string>>());
    for (const auto& e : j.value("directed", nlohmann::json::array()))
      g.add_directed(g.index_of(e.at("from").get<std::string>()), g.index_of(e.at("to").get<std::string>()));
    for (const auto& e : j.value("undirected", nlohmann::json::array()))
      g.add_undirected(g.index_of(e.at("a").get<std::string>()), g.index_of(e.at("b").get<std::string>()));
    return g;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("graph JSON: ") + e.what());
  }
}

inline Dag dag_from_json(const nlohmann::json& j) {
  auto g = pdag_from_json(j);
  if (!g.undirected().empty()) fail(ErrorCode::Parse, "graph JSON has undirected edges; expected a DAG");
  Dag d(g.nodes());
  for (auto [a, b] : g.directed()) d.add_edge(a, b);
  return d;
}

inline WeightedDag weighted_dag_from_json(const nlohmann::json& j) {
  try {
    auto nodes = j.at("nodes").get<std::vector<std::string>>();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes.size()),
                                              static_cast<Eigen::Index>(nodes.size()));
    for (const auto& e : j.value("directed", nlohmann::json::array())) {
      auto from = detail::node_index(nodes, e.at("from").get<std::string>());
      auto to = detail::node_index(nodes, e.at("to").get<std::string>());
      w(to, from) = e.at("weight").get<double>();
    }
    return WeightedDag(std::move(nodes), std::move(w), j.value("prune_threshold", 0.0));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("weighted graph JSON: ") + e.what());
  }
}

inline std::string weight_label(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", w);
  return buf;
}

namespace detail {

inline std::string dot_id(const std::string& s) {
  bool plain = !s.empty();
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) plain = false;
  if (plain && !std::isdigit(static_cast<unsigned char>(s[0]))) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Graphviz text. Purely undirected graphs are written as `graph` with `--`;
/// anything with a directed edge is a `digraph`, where undirected edges become
/// `a -> b [dir=none]`.
inline std::string to_dot(const AnyGraph& any) {
  const std::vector<std::string>* nodes = nullptr;
  std::vector<std::tuple<std::size_t, std::size_t, std::optional<double>>> directed;
  std::vector<Edge> undirected;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Dag>) {
          nodes = &g.nodes();
          for (auto e : g.edges()) directed.emplace_back(e.first, e.second, std::nullopt);
        } else if constexpr (std::is_same_v<T, PartiallyDirectedGraph>) {
          nodes = &g.nodes();
          for (auto e : g.directed()) directed.emplace_back(e.first, e.second, std::nullopt);
          undirected.assign(g.undirected().begin(), g.undirected().end());
        } else {
          nodes = &g.dag().nodes();
          for (auto e : g.dag().edges()) directed.emplace_back(e.first, e.second, g.weight(e.first, e.second));
        }
      },
      any);
  const bool digraph = !directed.empty();
  std::ostringstream out;
  out << (digraph ? "digraph" : "graph") << " G {\n";
  for (const auto& n : *nodes) out << "  " << detail::dot_id(n) << ";\n";
  for (const auto& [a, b, w] : directed) {
    out << "  " << detail::dot_id((*nodes)[a]) << " -> " << detail::dot_id((*nodes)[b]);
    if (w) out << " [label=\"" << weight_label(*w) << "\"]";
    out << ";\n";
  }
  for (auto [a, b] : undirected) {
    out << "  " << detail::dot_id((*nodes)[a]) << (digraph ? " -> " : " -- ")
        << detail::dot_id((*nodes)[b]) << (digraph ? " [dir=none]" : "") << ";\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string export_graph(const AnyGraph& g, GraphFormat format) {
  if (format == GraphFormat::Dot) return to_dot(g);
  return to_json(g).dump(2);
}

}  // namespace cgpa
