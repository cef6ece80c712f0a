#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dpc/bench.hpp"
#include "dpc/problems.hpp"
#include "dpc/rng.hpp"

namespace dpc::testing {

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Mat random_matrix(Rng& rng, int rows, int cols) {
  Mat a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = uniform(rng, -1.0, 1.0);
  return a;
}

inline Vec random_vector(Rng& rng, int n, double scale = 1.0) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v(k) = uniform(rng, -scale, scale);
  return v;
}

inline Mat random_spd(Rng& rng, int p, double shift) {
  const Mat a = random_matrix(rng, p, p);
  return a * a.transpose() + shift * Mat::Identity(p, p);
}

/// Random spanning tree plus extra edges with probability `extra`.
inline std::shared_ptr<const NetworkGraph> random_connected_graph(Rng& rng, int n, int p,
                                                                 double extra = 0.3) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(uniform_int(rng, 0, i - 1), i);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool present = false;
      for (auto e : edges) present = present || (e == std::pair{i, j});
      if (!present && uniform(rng, 0.0, 1.0) < extra) edges.emplace_back(i, j);
    }
  }
  return std::make_shared<const NetworkGraph>(n, p, edges);
}

struct QuadraticInstance {
  std::shared_ptr<const NetworkGraph> graph;
  std::vector<Mat> Q;
  std::vector<VectorSignal> targets;
  std::vector<Mat> W;
  std::shared_ptr<const Objective> objective;
};

/// Node terms 1/2 (y - a_i(t))' Q_i (y - a_i(t)) with cosine targets, edge
/// terms with random PSD weights. Always diagonally dominant in the sense
/// that D - B and D + B are both positive definite.
inline QuadraticInstance random_quadratic(Rng& rng, int n, int p, bool coupled = true,
                                          double omega = 1.0) {
  QuadraticInstance inst;
  inst.graph = random_connected_graph(rng, n, p);
  for (int i = 0; i < n; ++i) {
    inst.Q.push_back(random_spd(rng, p, uniform(rng, 0.5, 2.0)));
    inst.targets.push_back(
        VectorSignal::cosine(random_vector(rng, p, 2.0), random_vector(rng, p, 3.0), omega));
  }
  if (coupled) {
    for (int e = 0; e < inst.graph->edge_count(); ++e) {
      const Mat c = random_matrix(rng, p, p);
      inst.W.push_back(uniform(rng, 0.05, 1.0) * c * c.transpose());
    }
  }
  inst.objective = std::make_shared<const Objective>(
      quadratic_objective(inst.graph, inst.Q, inst.targets, inst.W));
  return inst;
}

/// Dense minimizer of a quadratic instance at time t: (sum of node and edge
/// Hessians) y = blockdiag(Q) a(t).
inline BlockVector quadratic_minimizer(const QuadraticInstance& inst, double t) {
  const int n = inst.graph->n();
  const int p = inst.graph->p();
  Mat H = Mat::Zero(n * p, n * p);
  Vec rhs = Vec::Zero(n * p);
  for (int i = 0; i < n; ++i) {
    H.block(i * p, i * p, p, p) += inst.Q[i];
    rhs.segment(i * p, p) = inst.Q[i] * inst.targets[i].value(t);
  }
  for (std::size_t e = 0; e < inst.W.size(); ++e) {
    const auto [i, j] = inst.graph->edges()[e];
    H.block(i * p, i * p, p, p) += inst.W[e];
    H.block(j * p, j * p, p, p) += inst.W[e];
    H.block(i * p, j * p, p, p) -= inst.W[e];
    H.block(j * p, i * p, p, p) -= inst.W[e];
  }
  return BlockVector(n, p, H.ldlt().solve(rhs));
}

inline BlockVector random_block_vector(Rng& rng, int n, int p, double scale = 1.0) {
  return BlockVector(n, p, random_vector(rng, n * p, scale));
}

/// Central-difference gradient of the total value.
inline Vec fd_gradient(const Objective& obj, const BlockVector& y, double t, double step = 1e-5) {
  Vec g(y.dimension());
  for (Eigen::Index k = 0; k < y.dimension(); ++k) {
    BlockVector yp = y, ym = y;
    yp.stacked()(k) += step;
    ym.stacked()(k) -= step;
    g(k) = (obj.value(yp, t) - obj.value(ym, t)) / (2 * step);
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Shared desk benchmark for tests that need the full problem.
inline const Problem& desk_benchmark() {
  static const Problem problem = paper_benchmark(1);
  return problem;
}

}  // namespace dpc::testing
