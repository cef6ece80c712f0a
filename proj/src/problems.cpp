#include "dpc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace dpc {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_square(const Mat& m, int p, const char* what) {
  if (m.rows() != p || m.cols() != p) {
    throw ObjectiveError(std::string(what) + " must be " + std::to_string(p) + "x" +
                         std::to_string(p));
  }
}

void require_dimension(const VectorSignal& s, int p, const char* what) {
  if (s.dimension != p) {
    throw ObjectiveError(std::string(what) + " has dimension " + std::to_string(s.dimension) +
                         ", expected " + std::to_string(p));
  }
}

/// max|s(1-s)(1-2s)| over the logistic range.
const double kThirdLogistic = 1.0 / (6.0 * std::sqrt(3.0));

}  // namespace

QuadraticLogisticUtility::QuadraticLogisticUtility(Mat Q, Vec b, VectorSignal c, VectorSignal d)
    : Q_(std::move(Q)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  const auto p = static_cast<int>(b_.size());
  require_square(Q_, p, "utility Q");
  require_dimension(c_, p, "utility c(t)");
  require_dimension(d_, p, "utility d(t)");
}

double QuadraticLogisticUtility::value(const Vec& y, double t) const {
  const Vec r = y - c_.value(t);
  const Vec z = b_.cwiseProduct(y - d_.value(t));
  double v = 0.5 * r.dot(Q_ * r);
  for (Eigen::Index l = 0; l < z.size(); ++l) v += softplus(z(l));
  return v;
}

Vec QuadraticLogisticUtility::gradient(const Vec& y, double t) const {
  const Vec z = b_.cwiseProduct(y - d_.value(t));
  Vec g = Q_ * (y - c_.value(t));
  for (Eigen::Index l = 0; l < z.size(); ++l) g(l) += b_(l) * sigmoid(z(l));
  return g;
}

Mat QuadraticLogisticUtility::hessian(const Vec& y, double t) const {
  const Vec z = b_.cwiseProduct(y - d_.value(t));
  Mat hess = Q_;
  for (Eigen::Index l = 0; l < z.size(); ++l) {
    const double s = sigmoid(z(l));
    hess(l, l) += b_(l) * b_(l) * s * (1.0 - s);
  }
  return hess;
}

Vec QuadraticLogisticUtility::time_gradient(const Vec& y, double t) const {
  const Vec z = b_.cwiseProduct(y - d_.value(t));
  const Vec d_rate = d_.rate(t);
  Vec g = -(Q_ * c_.rate(t));
  for (Eigen::Index l = 0; l < z.size(); ++l) {
    const double s = sigmoid(z(l));
    g(l) -= b_(l) * b_(l) * s * (1.0 - s) * d_rate(l);
  }
  return g;
}

QuadraticNode::QuadraticNode(Mat Q, VectorSignal target)
    : Q_(std::move(Q)), target_(std::move(target)) {
  require_square(Q_, static_cast<int>(Q_.rows()), "quadratic Q");
  require_dimension(target_, static_cast<int>(Q_.rows()), "quadratic target");
}

double QuadraticNode::value(const Vec& y, double t) const {
  const Vec r = y - target_.value(t);
  return 0.5 * r.dot(Q_ * r);
}

Vec QuadraticNode::gradient(const Vec& y, double t) const { return Q_ * (y - target_.value(t)); }

Mat QuadraticNode::hessian(const Vec&, double) const { return Q_; }

Vec QuadraticNode::time_gradient(const Vec&, double t) const { return -(Q_ * target_.rate(t)); }

LeastSquaresNode::LeastSquaresNode(Vec regressor, double variance,
                                   std::function<double(double)> z,
                                   std::function<double(double)> z_rate)
    : h_(std::move(regressor)), sigma_(variance), z_(std::move(z)), z_rate_(std::move(z_rate)) {
  if (!(sigma_ > 0.0)) throw ObjectiveError("noise variance must be positive");
}

double LeastSquaresNode::value(const Vec& y, double t) const {
  const double r = h_.dot(y) - z_(t);
  return 0.5 * r * r / sigma_;
}

Vec LeastSquaresNode::gradient(const Vec& y, double t) const {
  return h_ * ((h_.dot(y) - z_(t)) / sigma_);
}

Mat LeastSquaresNode::hessian(const Vec&, double) const { return h_ * h_.transpose() / sigma_; }

Vec LeastSquaresNode::time_gradient(const Vec&, double t) const {
  return -h_ * (z_rate_(t) / sigma_);
}

PenaltyEdge::PenaltyEdge(double scale, VectorSignal offset)
    : scale_(scale), offset_(std::move(offset)) {}

double PenaltyEdge::value(const Vec& first, const Vec& second, double t) const {
  return scale_ * (first - second - offset_.value(t)).squaredNorm();
}

EdgeGradient PenaltyEdge::gradient(const Vec& first, const Vec& second, double t) const {
  const Vec r = 2.0 * scale_ * (first - second - offset_.value(t));
  return {r, -r};
}

EdgeHessian PenaltyEdge::hessian(const Vec& first, const Vec&, double) const {
  const auto p = first.size();
  const Mat I = Mat::Identity(p, p) * (2.0 * scale_);
  return {I, I, -I};
}

EdgeGradient PenaltyEdge::time_gradient(const Vec&, const Vec&, double t) const {
  const Vec r = -2.0 * scale_ * offset_.rate(t);
  return {r, -r};
}

QuadraticCoupling::QuadraticCoupling(Mat W) : W_(std::move(W)) {
  if (W_.rows() != W_.cols()) throw ObjectiveError("coupling weight must be square");
}

double QuadraticCoupling::value(const Vec& first, const Vec& second, double) const {
  const Vec r = first - second;
  return 0.5 * r.dot(W_ * r);
}

EdgeGradient QuadraticCoupling::gradient(const Vec& first, const Vec& second, double) const {
  const Vec r = W_ * (first - second);
  return {r, -r};
}

EdgeHessian QuadraticCoupling::hessian(const Vec&, const Vec&, double) const {
  return {W_, W_, -W_};
}

EdgeGradient QuadraticCoupling::time_gradient(const Vec& first, const Vec&, double) const {
  const Vec z = Vec::Zero(first.size());
  return {z, z};
}

Objective resource_allocation_objective(std::shared_ptr<const NetworkGraph> graph,
                                        const VectorSignal& b_fn, double beta,
                                        const std::vector<UtilitySpec>& utilities) {
  if (!graph) throw ObjectiveError("resource allocation needs a graph");
  if (!(beta > 0.0)) throw ObjectiveError("beta must be positive");
  const int p = graph->p();
  const int l = graph->edge_count();
  if (b_fn.dimension != l * p) {
    throw ObjectiveError("b(t) has dimension " + std::to_string(b_fn.dimension) + ", expected " +
                         std::to_string(l * p));
  }
  if (utilities.size() != static_cast<std::size_t>(graph->n())) {
    throw ObjectiveError("one utility per node required");
  }

  std::vector<std::shared_ptr<const NodeFunction>> local;
  for (const auto& u : utilities) {
    local.push_back(std::make_shared<QuadraticLogisticUtility>(u.Q, u.b, u.c, u.d));
  }
  std::vector<std::shared_ptr<const EdgeFunction>> edges;
  for (int e = 0; e < l; ++e) {
    VectorSignal slice{p, [b_fn, e, p](double t) { return Vec(b_fn.value(t).segment(e * p, p)); },
                       [b_fn, e, p](double t) { return Vec(b_fn.rate(t).segment(e * p, p)); },
                       [b_fn, e, p](double t) {
                         return Vec(b_fn.acceleration(t).segment(e * p, p));
                       }};
    edges.push_back(std::make_shared<PenaltyEdge>(1.0 / (beta * beta), std::move(slice)));
  }
  return Objective(std::move(graph), std::move(local), {}, std::move(edges));
}

Objective estimation_objective(std::shared_ptr<const NetworkGraph> graph,
                               const std::vector<Vec>& regressors,
                               const std::vector<double>& variances,
                               const std::vector<double>& edge_weights, double beta,
                               const VectorSignal& z_fn) {
  if (!graph) throw ObjectiveError("estimation needs a graph");
  if (!(beta > 0.0)) throw ObjectiveError("beta must be positive");
  const auto n = static_cast<std::size_t>(graph->n());
  if (regressors.size() != n || variances.size() != n) {
    throw ObjectiveError("one regressor and one variance per node required");
  }
  if (edge_weights.size() != static_cast<std::size_t>(graph->edge_count())) {
    throw ObjectiveError("one weight per edge required");
  }
  if (z_fn.dimension != graph->n()) throw ObjectiveError("z(t) must have one entry per node");

  std::vector<std::shared_ptr<const NodeFunction>> local;
  for (std::size_t i = 0; i < n; ++i) {
    if (regressors[i].size() != graph->p()) throw ObjectiveError("regressor dimension differs from p");
    const auto idx = static_cast<Eigen::Index>(i);
    local.push_back(std::make_shared<LeastSquaresNode>(
        regressors[i], variances[i], [z_fn, idx](double t) { return z_fn.value(t)(idx); },
        [z_fn, idx](double t) { return z_fn.rate(t)(idx); }));
  }
  std::vector<std::shared_ptr<const EdgeFunction>> edges;
  for (double w : edge_weights) {
    if (!(w >= 0.0)) throw ObjectiveError("edge weights must be nonnegative");
    edges.push_back(std::make_shared<QuadraticCoupling>(Mat::Identity(graph->p(), graph->p()) *
                                                        (beta * w)));
  }
  return Objective(std::move(graph), std::move(local), {}, std::move(edges));
}

Objective quadratic_objective(std::shared_ptr<const NetworkGraph> graph,
                              const std::vector<Mat>& Q, const std::vector<VectorSignal>& targets,
                              const std::vector<Mat>& edge_weights) {
  if (!graph) throw ObjectiveError("quadratic objective needs a graph");
  const auto n = static_cast<std::size_t>(graph->n());
  if (Q.size() != n || targets.size() != n) {
    throw ObjectiveError("one Q and one target per node required");
  }
  std::vector<std::shared_ptr<const NodeFunction>> local;
  for (std::size_t i = 0; i < n; ++i) {
    require_square(Q[i], graph->p(), "quadratic Q");
    local.push_back(std::make_shared<QuadraticNode>(Q[i], targets[i]));
  }
  std::vector<std::shared_ptr<const EdgeFunction>> edges;
  if (!edge_weights.empty()) {
    if (edge_weights.size() != static_cast<std::size_t>(graph->edge_count())) {
      throw ObjectiveError("one coupling weight per edge required");
    }
    for (const auto& W : edge_weights) {
      require_square(W, graph->p(), "coupling weight");
      edges.push_back(std::make_shared<QuadraticCoupling>(W));
    }
  }
  return Objective(std::move(graph), std::move(local), {}, std::move(edges));
}

ConstantsBundle quadratic_logistic_constants(const NetworkGraph& graph,
                                             const std::vector<UtilitySpec>& utilities,
                                             double beta, double amplitude, double omega) {
  if (utilities.size() != static_cast<std::size_t>(graph.n())) {
    throw ObjectiveError("one utility per node required");
  }
  const double sqrt_p = std::sqrt(static_cast<double>(graph.p()));
  const double rate = amplitude * omega;
  const double accel = amplitude * omega * omega;

  ConstantsBundle c;
  c.empirical = false;
  c.m = std::numeric_limits<double>::infinity();
  double c0_sq = 0.0;
  double c3_sq = 0.0;
  double b_cube = 0.0;
  for (const auto& u : utilities) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(u.Q, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double b_abs = u.b.size() ? u.b.cwiseAbs().maxCoeff() : 0.0;
    const double curv = b_abs * b_abs / 4.0;
    const double third = b_abs * b_abs * b_abs * kThirdLogistic;
    c.m = std::min(c.m, lo);
    c.M = std::max(c.M, hi + curv);
    b_cube = std::max(b_cube, third);
    const double node_c0 = rate * sqrt_p * (hi + curv);
    const double node_c3 =
        hi * accel * sqrt_p + sqrt_p * (curv * accel + third * rate * rate);
    c0_sq += node_c0 * node_c0;
    c3_sq += node_c3 * node_c3;
  }
  c.C0 = std::sqrt(c0_sq);
  c.C1 = b_cube;
  c.C2 = b_cube * rate;
  c.C3 = std::sqrt(c3_sq);
  c.ell = 4.0 * graph.min_degree() / (beta * beta);
  c.L = 4.0 * graph.max_degree() / (beta * beta);
  return c;
}

}  // namespace dpc
