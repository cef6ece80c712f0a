#include "dpc/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "dpc/rng.hpp"

namespace dpc {

SplitHessian::SplitHessian(std::shared_ptr<const NetworkGraph> graph, std::vector<Mat> d_blocks,
                           std::vector<std::vector<Mat>> b_blocks)
    : graph_(std::move(graph)), d_(std::move(d_blocks)), b_(std::move(b_blocks)) {
  const auto n = static_cast<std::size_t>(graph_->n());
  if (d_.size() != n || b_.size() != n) throw SplitError("split block count differs from n");
  llt_.reserve(n);
  d_inv_sqrt_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (b_[i].size() != graph_->incidence(static_cast<int>(i)).size()) {
      throw SplitError("B blocks do not match incidence of node " + std::to_string(i));
    }
    llt_.emplace_back(d_[i]);
    if (llt_.back().info() != Eigen::Success) {
      throw SplitError("D block " + std::to_string(i) + " is not positive definite");
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(d_[i]);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      throw SplitError("D block " + std::to_string(i) + " is not positive definite");
    }
    d_inv_sqrt_.push_back(eig.operatorInverseSqrt());
  }
}

bool SplitHessian::has_edges() const {
  for (const auto& row : b_) {
    for (const auto& blk : row) {
      if (blk.size() && blk.cwiseAbs().maxCoeff() > 0.0) return true;
    }
  }
  return false;
}

Mat SplitHessian::dense_d() const {
  const int pp = p();
  Mat d = Mat::Zero(n() * pp, n() * pp);
  for (int i = 0; i < n(); ++i) d.block(i * pp, i * pp, pp, pp) = d_[i];
  return d;
}

Mat SplitHessian::dense_b() const {
  const int pp = p();
  Mat b = Mat::Zero(n() * pp, n() * pp);
  for (int i = 0; i < n(); ++i) {
    const auto& inc = graph_->incidence(i);
    for (std::size_t s = 0; s < inc.size(); ++s) {
      b.block(i * pp, inc[s].neighbor * pp, pp, pp) = b_[i][s];
    }
  }
  return b;
}

SplitHessian assemble_split(const Objective& objective, const BlockVector& y, double t) {
  objective.check_conforms(y);
  const auto& graph = objective.graph();
  std::vector<Mat> d(graph.n());
  std::vector<std::vector<Mat>> b(graph.n());
  for (int i = 0; i < graph.n(); ++i) {
    d[i] = objective.diagonal_block(i, y, t);
    for (const auto& slot : graph.incidence(i)) {
      b[i].push_back(-objective.cross_block(i, slot, y, t));
    }
  }
  return SplitHessian(objective.graph_ptr(), std::move(d), std::move(b));
}

Vec truncated_step(const SplitHessian& split, int i, const BlockVector& previous, const Vec& v_i) {
  Vec acc = v_i;
  const auto& inc = split.graph().incidence(i);
  for (std::size_t s = 0; s < inc.size(); ++s) {
    acc.noalias() += split.b_block(i, static_cast<int>(s)) * previous.block(inc[s].neighbor);
  }
  return split.d_solve(i, acc);
}

namespace {

template <class Fn>
void for_each_node(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

BlockVector truncated_solve(const SplitHessian& split, const BlockVector& v, int K, int threads) {
  if (K < 0) throw SplitError("truncation level must be nonnegative");
  if (!v.conforms(split.n(), split.p())) throw SplitError("vector does not conform to split");
  BlockVector current(split.n(), split.p());
  for_each_node(split.n(), threads, [&](int i) { current.block(i) = split.d_solve(i, v.block(i)); });
  BlockVector next(split.n(), split.p());
  for (int tau = 0; tau < K; ++tau) {
    for_each_node(split.n(), threads,
                  [&](int i) { next.block(i) = truncated_step(split, i, current, v.block(i)); });
    std::swap(current, next);
  }
  return current;
}

double splitting_contraction(const SplitHessian& split, ContractionOptions options) {
  if (!split.has_edges()) return 0.0;
  const int n = split.n();
  const int p = split.p();

  auto apply_x = [&](const BlockVector& u) {
    BlockVector scaled(n, p);
    for (int i = 0; i < n; ++i) scaled.block(i) = split.d_inv_sqrt(i) * u.block(i);
    BlockVector out(n, p);
    for (int i = 0; i < n; ++i) {
      Vec acc = Vec::Zero(p);
      const auto& inc = split.graph().incidence(i);
      for (std::size_t s = 0; s < inc.size(); ++s) {
        acc += split.b_block(i, static_cast<int>(s)) * scaled.block(inc[s].neighbor);
      }
      out.block(i) = split.d_inv_sqrt(i) * acc;
    }
    return out;
  };

  Rng rng(options.seed);
  std::normal_distribution<double> gauss;
  BlockVector v(n, p);
  for (Eigen::Index k = 0; k < v.dimension(); ++k) v.stacked()(k) = gauss(rng);
  v *= 1.0 / v.norm();

  // Power iteration on X^2 (symmetric PSD); sqrt of the Rayleigh quotient.
  // Stops on the eigen-residual ||X^2 v - mu v|| <= tol mu, which stays large
  // while two nearly equal eigenvalues are still mixed.
  double estimate = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const BlockVector xv = apply_x(v);
    const double mu = xv.stacked().squaredNorm();
    estimate = std::sqrt(mu);
    BlockVector w = apply_x(xv);
    if (mu == 0.0) return 0.0;
    const double residual = (w.stacked() - mu * v.stacked()).norm();
    if (residual <= options.tolerance * mu) return estimate;
    w *= 1.0 / w.norm();
    v = std::move(w);
  }
  return estimate;
}

}  // namespace dpc
