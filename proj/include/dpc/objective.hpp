#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpc/block_vector.hpp"
#include "dpc/graph.hpp"

namespace dpc {

class ObjectiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time-varying function of one node block: f^i(y^i; t) or g^{i,i}(y^i; t).
class NodeFunction {
 public:
  virtual ~NodeFunction() = default;
  virtual int dimension() const = 0;
  virtual double value(const Vec& y, double t) const = 0;
  virtual Vec gradient(const Vec& y, double t) const = 0;
  virtual Mat hessian(const Vec& y, double t) const = 0;
  /// Mixed derivative d/dt of the gradient.
  virtual Vec time_gradient(const Vec& y, double t) const = 0;
};

struct EdgeGradient {
  Vec first;   // w.r.t. the lower-indexed endpoint
  Vec second;  // w.r.t. the higher-indexed endpoint
};

struct EdgeHessian {
  Mat first_first;
  Mat second_second;
  Mat first_second;  // d^2 / (d first d second); the transpose is the other cross block
};

/// Time-varying function of an edge (i, j), stored once with i < j.
class EdgeFunction {
 public:
  virtual ~EdgeFunction() = default;
  virtual double value(const Vec& first, const Vec& second, double t) const = 0;
  virtual EdgeGradient gradient(const Vec& first, const Vec& second, double t) const = 0;
  virtual EdgeHessian hessian(const Vec& first, const Vec& second, double t) const = 0;
  virtual EdgeGradient time_gradient(const Vec& first, const Vec& second, double t) const = 0;
};

/// Sampled or analytic bounds used by the convergence constants.
///
/// m, M bound the spectrum of the local Hessians of f; the diagonal blocks of
/// the Hessian of g have spectrum in [ell/2, L/2]; C0..C3 bound the norms of
/// the mixed, third, y-t-y and t-t-y derivatives of F.
struct ConstantsBundle {
  double m = 0.0;
  double M = 0.0;
  double ell = 0.0;
  double L = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  /// True when the values are envelopes over random samples rather than
  /// closed-form bounds.
  bool empirical = true;

  /// Throws ObjectiveError unless 0 < m <= M, 0 <= ell <= L and all C >= 0.
  void validate() const;
};

/// F(y;t) = sum_i f^i(y^i;t) + sum_i g^{i,i}(y^i;t) + sum_{(i,j) in E} g^{i,j}(y^i,y^j;t).
///
/// Every per-node query reads only block i of y and the blocks of its
/// neighbors, so it can be evaluated from what node i has received.
class Objective {
 public:
  Objective(std::shared_ptr<const NetworkGraph> graph,
            std::vector<std::shared_ptr<const NodeFunction>> local,
            std::vector<std::shared_ptr<const NodeFunction>> node_coupling,
            std::vector<std::shared_ptr<const EdgeFunction>> edge_terms);

  const NetworkGraph& graph() const { return *graph_; }
  const std::shared_ptr<const NetworkGraph>& graph_ptr() const { return graph_; }
  int n() const { return graph_->n(); }
  int p() const { return graph_->p(); }

  const NodeFunction& local(int i) const { return *local_[i]; }
  /// Null when g^{i,i} is absent.
  const NodeFunction* node_coupling(int i) const { return node_coupling_[i].get(); }
  /// Null when g^{i,j} is absent for edge e.
  const EdgeFunction* edge_term(int e) const { return edge_terms_[e].get(); }
  bool has_coupling() const;

  double value(const BlockVector& y, double t) const;

  Vec local_gradient(int i, const BlockVector& y, double t) const;
  Vec local_time_gradient(int i, const BlockVector& y, double t) const;
  /// D^{ii}: local Hessian of f^i + g^{i,i} + sum_j d^2 g^{i,j} / (dy^i)^2.
  Mat diagonal_block(int i, const BlockVector& y, double t) const;
  /// Diagonal block of the Hessian of g alone (Assumption-2 quantity).
  Mat coupling_diagonal_block(int i, const BlockVector& y, double t) const;
  /// d^2 g^{i,j} / (dy^i dy^j) for the neighbor reached through `slot`.
  Mat cross_block(int i, const Incidence& slot, const BlockVector& y, double t) const;

  BlockVector gradient(const BlockVector& y, double t) const;
  BlockVector time_gradient(const BlockVector& y, double t) const;
  Mat dense_hessian(const BlockVector& y, double t) const;

  void check_conforms(const BlockVector& y) const;

  /// Closed-form constants when the problem family provides them.
  const std::optional<ConstantsBundle>& analytic_constants() const { return analytic_; }
  void set_analytic_constants(ConstantsBundle c) { analytic_ = c; }

 private:
  std::shared_ptr<const NetworkGraph> graph_;
  std::vector<std::shared_ptr<const NodeFunction>> local_;
  std::vector<std::shared_ptr<const NodeFunction>> node_coupling_;
  std::vector<std::shared_ptr<const EdgeFunction>> edge_terms_;
  std::optional<ConstantsBundle> analytic_;
};

/// Stacked gradient, block i computed from node i's neighborhood only.
BlockVector global_gradient(const Objective& objective, const BlockVector& y, double t);

/// Stacked mixed time derivative of the gradient.
BlockVector mixed_time_gradient(const Objective& objective, const BlockVector& y, double t);

struct SampleBox {
  double y_low = -10.0;
  double y_high = 10.0;
  double t_low = 0.0;
  double t_high = 100.0;
};

/// Empirical envelopes of the ConstantsBundle quantities over `samples`
/// uniformly drawn (y, t) points. Higher derivatives use central differences
/// of the analytic Hessian and mixed gradient. Sampled, not certified.
ConstantsBundle estimate_constants(const Objective& objective, const SampleBox& box,
                                   int samples, std::uint64_t seed);

}  // namespace dpc
