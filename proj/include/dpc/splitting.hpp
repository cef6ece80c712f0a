#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "dpc/block_vector.hpp"
#include "dpc/graph.hpp"
#include "dpc/objective.hpp"

namespace dpc {

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hessian splitting  grad^2 F = D - B  with D block diagonal and B supported
/// on graph edges. B^{ij} is stored per incidence slot of node i, in the order
/// of graph.incidence(i).
class SplitHessian {
 public:
  SplitHessian(std::shared_ptr<const NetworkGraph> graph, std::vector<Mat> d_blocks,
               std::vector<std::vector<Mat>> b_blocks);

  const NetworkGraph& graph() const { return *graph_; }
  int n() const { return graph_->n(); }
  int p() const { return graph_->p(); }

  const Mat& d_block(int i) const { return d_[i]; }
  const Mat& b_block(int i, int slot) const { return b_[i][slot]; }
  /// Solves D^{ii} x = v with the cached Cholesky factor.
  Vec d_solve(int i, const Vec& v) const { return llt_[i].solve(v); }
  /// Symmetric inverse square root of D^{ii}.
  const Mat& d_inv_sqrt(int i) const { return d_inv_sqrt_[i]; }
  bool has_edges() const;

  Mat dense_d() const;
  Mat dense_b() const;

 private:
  std::shared_ptr<const NetworkGraph> graph_;
  std::vector<Mat> d_;
  std::vector<std::vector<Mat>> b_;
  std::vector<Eigen::LLT<Mat>> llt_;
  std::vector<Mat> d_inv_sqrt_;
};

/// D^{ii} = diagonal_block(i), B^{ij} = -cross_block(i,j), evaluated at (y, t).
/// Throws SplitError when some D^{ii} is not positive definite.
SplitHessian assemble_split(const Objective& objective, const BlockVector& y, double t);

/// One recursion step at node i:  D_ii^{-1} (sum_{j in N_i} B^{ij} x^j + v^i).
/// Reads only the neighbor blocks of `previous`.
Vec truncated_step(const SplitHessian& split, int i, const BlockVector& previous, const Vec& v_i);

/// x = H^{-1}_{(K)} v = sum_{tau=0}^{K} (D^{-1} B)^tau D^{-1} v, by K sweeps of the
/// double-buffered recursion x_0 = D^{-1} v, x_{tau+1} = D^{-1}(B x_tau + v).
/// With threads > 1, nodes within a sweep run concurrently; the result is
/// bit-identical to the sequential one.
BlockVector truncated_solve(const SplitHessian& split, const BlockVector& v, int K,
                            int threads = 1);

using TruncatedSolver = std::function<BlockVector(const SplitHessian&, const BlockVector&, int)>;

struct ContractionOptions {
  double tolerance = 1e-12;
  int max_iterations = 100000;
  std::uint64_t seed = 0x5eed;
};

/// ||D^{-1/2} B D^{-1/2}|| by power iteration. Values >= 1 are returned, not
/// rejected; they signal a violated dominance condition.
double splitting_contraction(const SplitHessian& split, ContractionOptions options = {});

}  // namespace dpc
