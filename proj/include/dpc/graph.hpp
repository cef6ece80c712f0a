#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dpc {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Neighbor slot of a node: the neighbor index and the edge it is reached by.
struct Incidence {
  int neighbor;
  int edge;
};

/// Undirected connected topology with a per-node block dimension p.
///
/// Edges are stored once as (i, j) with i < j, sorted lexicographically.
/// Neighbor lists are sorted by neighbor index and symmetric.
class NetworkGraph {
 public:
  /// Validates and builds. Throws GraphError on self-loops, duplicate or
  /// out-of-range edges, or a disconnected topology.
  NetworkGraph(int n, int p, std::vector<std::pair<int, int>> edges,
               std::vector<Eigen::Vector2d> positions = {});

  int n() const { return n_; }
  int p() const { return p_; }
  int dimension() const { return n_ * p_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  const std::vector<Incidence>& incidence(int i) const { return incidence_[i]; }
  int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }
  int max_degree() const;
  int min_degree() const;

  bool has_positions() const { return !positions_.empty(); }
  const std::vector<Eigen::Vector2d>& positions() const { return positions_; }

  /// Hop distances from `source` (breadth-first).
  std::vector<int> distances_from(int source) const;

  bool operator==(const NetworkGraph& other) const;

 private:
  int n_;
  int p_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<Eigen::Vector2d> positions_;
};

/// True when breadth-first traversal from node 0 reaches every node.
bool is_connected(int n, const std::vector<std::pair<int, int>>& edges);

struct GeometricGraphOptions {
  int max_attempts = 1000;
};

/// Uniform deployment in [-1,1]^2, edge iff distance < range. Redraws until
/// connected; throws GraphError once `max_attempts` draws are exhausted.
NetworkGraph random_geometric_graph(int n, int p, double range, std::uint64_t seed,
                                    GeometricGraphOptions options = {});

/// Communication range used by the wireless benchmark: 2.5*sqrt(2)/sqrt(n).
double benchmark_range(int n);

NetworkGraph path_graph(int n, int p);
NetworkGraph complete_graph(int n, int p);

/// Augmented edge incidence matrix (lp x np): row block e = (j,k), j<k, has
/// +I_p at column block j and -I_p at column block k.
Eigen::SparseMatrix<double> augmented_incidence(const NetworkGraph& graph);

/// Block Laplacian L (x) I_p built from degrees and adjacency.
Eigen::SparseMatrix<double> block_laplacian(const NetworkGraph& graph);

/// Plain-text edge list: header "n p", then one "i j" pair per line (0-based).
void write_edge_list(std::ostream& out, const NetworkGraph& graph);
NetworkGraph read_edge_list(std::istream& in);

}  // namespace dpc
