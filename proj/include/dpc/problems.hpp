#pragma once

#include <memory>
#include <vector>

#include "dpc/objective.hpp"
#include "dpc/signal.hpp"

namespace dpc {

/// f(y;t) = 1/2 (y - c(t))' Q (y - c(t)) + sum_l log(1 + exp(b_l (y_l - d_l(t)))).
class QuadraticLogisticUtility : public NodeFunction {
 public:
  QuadraticLogisticUtility(Mat Q, Vec b, VectorSignal c, VectorSignal d);

  int dimension() const override { return static_cast<int>(b_.size()); }
  double value(const Vec& y, double t) const override;
  Vec gradient(const Vec& y, double t) const override;
  Mat hessian(const Vec& y, double t) const override;
  Vec time_gradient(const Vec& y, double t) const override;

  const Mat& Q() const { return Q_; }
  const Vec& b() const { return b_; }

 private:
  Mat Q_;
  Vec b_;
  VectorSignal c_;
  VectorSignal d_;
};

/// f(y;t) = 1/2 (y - a(t))' Q (y - a(t)).
class QuadraticNode : public NodeFunction {
 public:
  QuadraticNode(Mat Q, VectorSignal target);

  int dimension() const override { return static_cast<int>(Q_.rows()); }
  double value(const Vec& y, double t) const override;
  Vec gradient(const Vec& y, double t) const override;
  Mat hessian(const Vec& y, double t) const override;
  Vec time_gradient(const Vec& y, double t) const override;

 private:
  Mat Q_;
  VectorSignal target_;
};

/// f(u;t) = (h'u - z(t))^2 / (2 sigma).
class LeastSquaresNode : public NodeFunction {
 public:
  LeastSquaresNode(Vec regressor, double variance, std::function<double(double)> z,
                   std::function<double(double)> z_rate);

  int dimension() const override { return static_cast<int>(h_.size()); }
  double value(const Vec& y, double t) const override;
  Vec gradient(const Vec& y, double t) const override;
  Mat hessian(const Vec& y, double t) const override;
  Vec time_gradient(const Vec& y, double t) const override;

 private:
  Vec h_;
  double sigma_;
  std::function<double(double)> z_;
  std::function<double(double)> z_rate_;
};

/// g(y^i, y^j; t) = scale * ||y^i - y^j - b(t)||^2.
class PenaltyEdge : public EdgeFunction {
 public:
  PenaltyEdge(double scale, VectorSignal offset);

  double value(const Vec& first, const Vec& second, double t) const override;
  EdgeGradient gradient(const Vec& first, const Vec& second, double t) const override;
  EdgeHessian hessian(const Vec& first, const Vec& second, double t) const override;
  EdgeGradient time_gradient(const Vec& first, const Vec& second, double t) const override;

 private:
  double scale_;
  VectorSignal offset_;
};

/// g(y^i, y^j) = 1/2 (y^i - y^j)' W (y^i - y^j), W symmetric positive semidefinite.
class QuadraticCoupling : public EdgeFunction {
 public:
  explicit QuadraticCoupling(Mat W);

  double value(const Vec& first, const Vec& second, double t) const override;
  EdgeGradient gradient(const Vec& first, const Vec& second, double t) const override;
  EdgeHessian hessian(const Vec& first, const Vec& second, double t) const override;
  EdgeGradient time_gradient(const Vec& first, const Vec& second, double t) const override;

 private:
  Mat W_;
};

struct UtilitySpec {
  Mat Q;
  Vec b;
  VectorSignal c;
  VectorSignal d;
};

/// sum_i f^i(y^i;t) + (1/beta^2) ||A y - b(t)||^2, with the penalty split into
/// one PenaltyEdge per graph edge. `b_fn` has dimension l*p (edge-stacked).
Objective resource_allocation_objective(std::shared_ptr<const NetworkGraph> graph,
                                        const VectorSignal& b_fn, double beta,
                                        const std::vector<UtilitySpec>& utilities);

/// Spatially regularized least squares: node terms (h'u - z_i(t))^2 / (2 sigma_i)
/// and one edge term (beta/2) w_e ||u^i - u^j||^2 per graph edge. `z_fn` has
/// dimension n (one scalar measurement per node).
Objective estimation_objective(std::shared_ptr<const NetworkGraph> graph,
                               const std::vector<Vec>& regressors,
                               const std::vector<double>& variances,
                               const std::vector<double>& edge_weights, double beta,
                               const VectorSignal& z_fn);

/// Synthetic quadratic: node terms 1/2 (y - a_i(t))' Q_i (y - a_i(t)) and edge
/// terms 1/2 (y^i - y^j)' W_e (y^i - y^j). Empty `edge_weights` means g = 0.
Objective quadratic_objective(std::shared_ptr<const NetworkGraph> graph,
                              const std::vector<Mat>& Q, const std::vector<VectorSignal>& targets,
                              const std::vector<Mat>& edge_weights);

/// Closed-form bounds for the resource-allocation family with b(t) = 0 and
/// cosine drifts c, d of component amplitude `amplitude` and frequency `omega`.
ConstantsBundle quadratic_logistic_constants(const NetworkGraph& graph,
                                             const std::vector<UtilitySpec>& utilities,
                                             double beta, double amplitude, double omega);

}  // namespace dpc
