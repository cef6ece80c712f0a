#include "dpc/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "dpc/rng.hpp"

namespace dpc {

void ConstantsBundle::validate() const {
  if (!(m > 0.0) || !(M >= m)) throw ObjectiveError("constants: need 0 < m <= M");
  if (!(ell >= 0.0) || !(L >= ell)) throw ObjectiveError("constants: need 0 <= ell <= L");
  if (!(C0 >= 0.0 && C1 >= 0.0 && C2 >= 0.0 && C3 >= 0.0)) {
    throw ObjectiveError("constants: derivative bounds must be nonnegative");
  }
}

Objective::Objective(std::shared_ptr<const NetworkGraph> graph,
                     std::vector<std::shared_ptr<const NodeFunction>> local,
                     std::vector<std::shared_ptr<const NodeFunction>> node_coupling,
                     std::vector<std::shared_ptr<const EdgeFunction>> edge_terms)
    : graph_(std::move(graph)),
      local_(std::move(local)),
      node_coupling_(std::move(node_coupling)),
      edge_terms_(std::move(edge_terms)) {
  if (!graph_) throw ObjectiveError("objective needs a graph");
  const auto n = static_cast<std::size_t>(graph_->n());
  if (local_.size() != n) throw ObjectiveError("one local function per node required");
  if (node_coupling_.empty()) node_coupling_.resize(n);
  if (node_coupling_.size() != n) throw ObjectiveError("node coupling count must equal n");
  if (edge_terms_.empty()) edge_terms_.resize(graph_->edge_count());
  if (edge_terms_.size() != static_cast<std::size_t>(graph_->edge_count())) {
    throw ObjectiveError("edge term count must equal edge count");
  }
  for (int i = 0; i < graph_->n(); ++i) {
    if (!local_[i]) throw ObjectiveError("missing local function at node " + std::to_string(i));
    if (local_[i]->dimension() != graph_->p() ||
        (node_coupling_[i] && node_coupling_[i]->dimension() != graph_->p())) {
      throw ObjectiveError("node function dimension differs from p at node " +
                           std::to_string(i));
    }
  }
}

bool Objective::has_coupling() const {
  return std::any_of(node_coupling_.begin(), node_coupling_.end(), [](auto& g) { return !!g; }) ||
         std::any_of(edge_terms_.begin(), edge_terms_.end(), [](auto& g) { return !!g; });
}

void Objective::check_conforms(const BlockVector& y) const {
  if (!y.conforms(n(), p())) throw ObjectiveError("block vector does not conform to graph");
}

double Objective::value(const BlockVector& y, double t) const {
  check_conforms(y);
  double total = 0.0;
  for (int i = 0; i < n(); ++i) {
    total += local_[i]->value(y.block(i), t);
    if (node_coupling_[i]) total += node_coupling_[i]->value(y.block(i), t);
  }
  for (int e = 0; e < graph_->edge_count(); ++e) {
    if (!edge_terms_[e]) continue;
    const auto [a, b] = graph_->edges()[e];
    total += edge_terms_[e]->value(y.block(a), y.block(b), t);
  }
  return total;
}

// For every neighbor query, node i is "first" on edge (i,j) iff i < j.

Vec Objective::local_gradient(int i, const BlockVector& y, double t) const {
  Vec g = local_[i]->gradient(y.block(i), t);
  if (node_coupling_[i]) g += node_coupling_[i]->gradient(y.block(i), t);
  for (const auto& slot : graph_->incidence(i)) {
    const auto* term = edge_terms_[slot.edge].get();
    if (!term) continue;
    if (i < slot.neighbor) {
      g += term->gradient(y.block(i), y.block(slot.neighbor), t).first;
    } else {
      g += term->gradient(y.block(slot.neighbor), y.block(i), t).second;
    }
  }
  return g;
}

Vec Objective::local_time_gradient(int i, const BlockVector& y, double t) const {
  Vec g = local_[i]->time_gradient(y.block(i), t);
  if (node_coupling_[i]) g += node_coupling_[i]->time_gradient(y.block(i), t);
  for (const auto& slot : graph_->incidence(i)) {
    const auto* term = edge_terms_[slot.edge].get();
    if (!term) continue;
    if (i < slot.neighbor) {
      g += term->time_gradient(y.block(i), y.block(slot.neighbor), t).first;
    } else {
      g += term->time_gradient(y.block(slot.neighbor), y.block(i), t).second;
    }
  }
  return g;
}

Mat Objective::coupling_diagonal_block(int i, const BlockVector& y, double t) const {
  Mat d = Mat::Zero(p(), p());
  if (node_coupling_[i]) d += node_coupling_[i]->hessian(y.block(i), t);
  for (const auto& slot : graph_->incidence(i)) {
    const auto* term = edge_terms_[slot.edge].get();
    if (!term) continue;
    if (i < slot.neighbor) {
      d += term->hessian(y.block(i), y.block(slot.neighbor), t).first_first;
    } else {
      d += term->hessian(y.block(slot.neighbor), y.block(i), t).second_second;
    }
  }
  return d;
}

Mat Objective::diagonal_block(int i, const BlockVector& y, double t) const {
  Mat d = local_[i]->hessian(y.block(i), t);
  if (node_coupling_[i]) d += node_coupling_[i]->hessian(y.block(i), t);
  for (const auto& slot : graph_->incidence(i)) {
    const auto* term = edge_terms_[slot.edge].get();
    if (!term) continue;
    if (i < slot.neighbor) {
      d += term->hessian(y.block(i), y.block(slot.neighbor), t).first_first;
    } else {
      d += term->hessian(y.block(slot.neighbor), y.block(i), t).second_second;
    }
  }
  return d;
}

Mat Objective::cross_block(int i, const Incidence& slot, const BlockVector& y, double t) const {
  const auto* term = edge_terms_[slot.edge].get();
  if (!term) return Mat::Zero(p(), p());
  if (i < slot.neighbor) {
    return term->hessian(y.block(i), y.block(slot.neighbor), t).first_second;
  }
  return term->hessian(y.block(slot.neighbor), y.block(i), t).first_second.transpose();
}

BlockVector Objective::gradient(const BlockVector& y, double t) const {
  check_conforms(y);
  BlockVector g(n(), p());
  for (int i = 0; i < n(); ++i) g.block(i) = local_gradient(i, y, t);
  return g;
}

BlockVector Objective::time_gradient(const BlockVector& y, double t) const {
  check_conforms(y);
  BlockVector g(n(), p());
  for (int i = 0; i < n(); ++i) g.block(i) = local_time_gradient(i, y, t);
  return g;
}

Mat Objective::dense_hessian(const BlockVector& y, double t) const {
  check_conforms(y);
  const int pp = p();
  Mat hess = Mat::Zero(y.dimension(), y.dimension());
  for (int i = 0; i < n(); ++i) {
    hess.block(i * pp, i * pp, pp, pp) = diagonal_block(i, y, t);
    for (const auto& slot : graph_->incidence(i)) {
      hess.block(i * pp, slot.neighbor * pp, pp, pp) = cross_block(i, slot, y, t);
    }
  }
  return hess;
}

BlockVector global_gradient(const Objective& objective, const BlockVector& y, double t) {
  return objective.gradient(y, t);
}

BlockVector mixed_time_gradient(const Objective& objective, const BlockVector& y, double t) {
  return objective.time_gradient(y, t);
}

namespace {

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

ConstantsBundle estimate_constants(const Objective& objective, const SampleBox& box, int samples,
                                   std::uint64_t seed) {
  if (samples < 1) throw ObjectiveError("estimate_constants needs at least one sample");
  constexpr double kStepY = 1e-4;
  constexpr double kStepT = 1e-4;
  constexpr int kDirections = 4;

  Rng rng(seed);
  std::uniform_real_distribution<double> ycoord(box.y_low, box.y_high);
  std::uniform_real_distribution<double> tcoord(box.t_low, box.t_high);
  std::normal_distribution<double> gauss;

  const int n = objective.n();
  const int p = objective.p();
  const bool coupled = objective.has_coupling();

  ConstantsBundle c;
  c.m = std::numeric_limits<double>::infinity();
  c.ell = coupled ? std::numeric_limits<double>::infinity() : 0.0;
  c.empirical = true;

  for (int s = 0; s < samples; ++s) {
    BlockVector y(n, p);
    for (Eigen::Index k = 0; k < y.dimension(); ++k) y.stacked()(k) = ycoord(rng);
    const double t = tcoord(rng);

    for (int i = 0; i < n; ++i) {
      Eigen::SelfAdjointEigenSolver<Mat> local(objective.local(i).hessian(y.block(i), t),
                                               Eigen::EigenvaluesOnly);
      c.m = std::min(c.m, local.eigenvalues().minCoeff());
      c.M = std::max(c.M, local.eigenvalues().maxCoeff());
      if (coupled) {
        Eigen::SelfAdjointEigenSolver<Mat> diag(objective.coupling_diagonal_block(i, y, t),
                                                Eigen::EigenvaluesOnly);
        c.ell = std::min(c.ell, 2.0 * diag.eigenvalues().minCoeff());
        c.L = std::max(c.L, 2.0 * diag.eigenvalues().maxCoeff());
      }
    }

    const BlockVector tg = objective.time_gradient(y, t);
    c.C0 = std::max(c.C0, tg.norm());

    const BlockVector tg_plus = objective.time_gradient(y, t + kStepT);
    const BlockVector tg_minus = objective.time_gradient(y, t - kStepT);
    c.C3 = std::max(c.C3, (tg_plus - tg_minus).norm() / (2.0 * kStepT));

    for (int d = 0; d < kDirections; ++d) {
      BlockVector u(n, p);
      for (Eigen::Index k = 0; k < u.dimension(); ++k) u.stacked()(k) = gauss(rng);
      u *= 1.0 / u.norm();
      const BlockVector y_plus = y + kStepY * u;
      const BlockVector y_minus = y - kStepY * u;
      const Mat third = (objective.dense_hessian(y_plus, t) - objective.dense_hessian(y_minus, t)) /
                        (2.0 * kStepY);
      c.C1 = std::max(c.C1, spectral_norm(third));
      const BlockVector mixed =
          (objective.time_gradient(y_plus, t) - objective.time_gradient(y_minus, t));
      c.C2 = std::max(c.C2, mixed.norm() / (2.0 * kStepY));
    }
  }
  return c;
}

}  // namespace dpc
