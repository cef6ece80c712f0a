#include "dpc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <string>

#include "dpc/rng.hpp"

namespace dpc {

namespace {

std::vector<std::vector<int>> adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  return adj;
}

std::vector<int> bfs(const std::vector<std::vector<int>>& adj, int source) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

NetworkGraph::NetworkGraph(int n, int p, std::vector<std::pair<int, int>> edges,
                           std::vector<Eigen::Vector2d> positions)
    : n_(n), p_(p), positions_(std::move(positions)) {
  if (n < 1) throw GraphError("graph needs at least one node");
  if (p < 1) throw GraphError("block dimension p must be positive");
  if (!positions_.empty() && static_cast<int>(positions_.size()) != n) {
    throw GraphError("position count does not match node count");
  }
  std::set<std::pair<int, int>> seen;
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw GraphError("edge endpoint out of range");
    if (i == j) throw GraphError("self-loop at node " + std::to_string(i));
    if (i > j) std::swap(i, j);
    if (!seen.insert({i, j}).second) {
      throw GraphError("duplicate edge " + std::to_string(i) + "-" + std::to_string(j));
    }
  }
  edges_.assign(seen.begin(), seen.end());
  if (!is_connected(n, edges_)) throw GraphError("graph is not connected");

  neighbors_.assign(n, {});
  incidence_.assign(n, {});
  for (int e = 0; e < edge_count(); ++e) {
    const auto [i, j] = edges_[e];
    incidence_[i].push_back({j, e});
    incidence_[j].push_back({i, e});
  }
  for (int i = 0; i < n; ++i) {
    auto& inc = incidence_[i];
    std::sort(inc.begin(), inc.end(),
              [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
    for (const auto& s : inc) neighbors_[i].push_back(s.neighbor);
  }
}

int NetworkGraph::max_degree() const {
  int d = 0;
  for (int i = 0; i < n_; ++i) d = std::max(d, degree(i));
  return d;
}

int NetworkGraph::min_degree() const {
  int d = degree(0);
  for (int i = 1; i < n_; ++i) d = std::min(d, degree(i));
  return d;
}

std::vector<int> NetworkGraph::distances_from(int source) const {
  return bfs(neighbors_, source);
}

bool NetworkGraph::operator==(const NetworkGraph& other) const {
  return n_ == other.n_ && p_ == other.p_ && edges_ == other.edges_ &&
         positions_ == other.positions_;
}

bool is_connected(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n <= 1) return true;
  const auto dist = bfs(adjacency(n, edges), 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

NetworkGraph random_geometric_graph(int n, int p, double range, std::uint64_t seed,
                                    GeometricGraphOptions options) {
  if (n < 1) throw GraphError("random geometric graph needs n >= 1");
  if (!(range > 0.0)) throw GraphError("communication range must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::vector<Eigen::Vector2d> pos(n);
    for (auto& x : pos) {
      x.x() = coord(rng);
      x.y() = coord(rng);
    }
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if ((pos[i] - pos[j]).norm() < range) edges.emplace_back(i, j);
      }
    }
    if (is_connected(n, edges)) return NetworkGraph(n, p, std::move(edges), std::move(pos));
  }
  throw GraphError("no connected deployment after " + std::to_string(options.max_attempts) +
                   " draws; range " + std::to_string(range) + " is too small");
}

double benchmark_range(int n) { return 2.5 * std::sqrt(2.0) / std::sqrt(static_cast<double>(n)); }

NetworkGraph path_graph(int n, int p) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return NetworkGraph(n, p, std::move(edges));
}

NetworkGraph complete_graph(int n, int p) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return NetworkGraph(n, p, std::move(edges));
}

Eigen::SparseMatrix<double> augmented_incidence(const NetworkGraph& graph) {
  const int p = graph.p();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * p * graph.edge_count());
  for (int e = 0; e < graph.edge_count(); ++e) {
    const auto [j, k] = graph.edges()[e];
    for (int c = 0; c < p; ++c) {
      entries.emplace_back(e * p + c, j * p + c, 1.0);
      entries.emplace_back(e * p + c, k * p + c, -1.0);
    }
  }
  Eigen::SparseMatrix<double> a(graph.edge_count() * p, graph.dimension());
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

Eigen::SparseMatrix<double> block_laplacian(const NetworkGraph& graph) {
  const int p = graph.p();
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < graph.n(); ++i) {
    for (int c = 0; c < p; ++c) {
      entries.emplace_back(i * p + c, i * p + c, static_cast<double>(graph.degree(i)));
      for (int j : graph.neighbors(i)) entries.emplace_back(i * p + c, j * p + c, -1.0);
    }
  }
  Eigen::SparseMatrix<double> l(graph.dimension(), graph.dimension());
  l.setFromTriplets(entries.begin(), entries.end());
  return l;
}

void write_edge_list(std::ostream& out, const NetworkGraph& graph) {
  out << graph.n() << ' ' << graph.p() << '\n';
  for (const auto& [i, j] : graph.edges()) out << i << ' ' << j << '\n';
}

NetworkGraph read_edge_list(std::istream& in) {
  int n = 0;
  int p = 0;
  if (!(in >> n >> p)) throw GraphError("edge list: missing 'n p' header");
  std::vector<std::pair<int, int>> edges;
  int i = 0;
  int j = 0;
  while (in >> i >> j) edges.emplace_back(i, j);
  if (!in.eof()) throw GraphError("edge list: malformed edge line");
  return NetworkGraph(n, p, std::move(edges));
}

}  // namespace dpc
