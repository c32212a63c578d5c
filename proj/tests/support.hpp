#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "cgpa/causal/graph.hpp"
#include "cgpa/core/random.hpp"

namespace testing_support {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    cgpa::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() / ("cgpa_" + tag + "_" + std::to_string(rng.next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// d-separation via the moralised ancestral graph of {x, y} ∪ z.
inline bool d_separated(const cgpa::Dag& g, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
  const auto p = g.size();
  std::vector<bool> anc(p, false);
  std::vector<std::size_t> stack{x, y};
  stack.insert(stack.end(), z.begin(), z.end());
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    if (anc[v]) continue;
    anc[v] = true;
    for (std::size_t u = 0; u < p; ++u)
      if (g.has_edge(u, v)) stack.push_back(u);
  }
  std::vector<std::vector<bool>> adj(p, std::vector<bool>(p, false));
  for (std::size_t v = 0; v < p; ++v) {
    if (!anc[v]) continue;
    std::vector<std::size_t> pa;
    for (std::size_t u = 0; u < p; ++u)
      if (anc[u] && g.has_edge(u, v)) pa.push_back(u);
    for (auto u : pa) adj[u][v] = adj[v][u] = true;
    for (std::size_t a = 0; a < pa.size(); ++a)
      for (std::size_t b = a + 1; b < pa.size(); ++b) adj[pa[a]][pa[b]] = adj[pa[b]][pa[a]] = true;
  }
  std::vector<bool> blocked(p, false), seen(p, false);
  for (auto v : z) blocked[v] = true;
  stack = {x};
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = true;
    if (v == y) return false;
    for (std::size_t u = 0; u < p; ++u)
      if (anc[u] && adj[v][u] && !blocked[u] && !seen[u]) stack.push_back(u);
  }
  return true;
}

/// Naive two-pass sample correlation.
inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  double sab = 0, saa = 0, sbb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sab += (a(i) - ma) * (b(i) - mb);
    saa += (a(i) - ma) * (a(i) - ma);
    sbb += (b(i) - mb) * (b(i) - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testing_support
