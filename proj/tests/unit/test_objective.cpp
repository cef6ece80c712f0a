#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "dpc/objective.hpp"
#include "dpc/problems.hpp"
#include "support.hpp"

using namespace dpc;
using namespace dpc::testing;

namespace {

UtilitySpec quadratic_utility(int p, double curvature = 1.0) {
  return {curvature * Mat::Identity(p, p), Vec::Zero(p), VectorSignal::zero(p),
          VectorSignal::zero(p)};
}

std::vector<UtilitySpec> random_utilities(Rng& rng, int n, int p) {
  std::vector<UtilitySpec> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({random_spd(rng, p, 1.0), random_vector(rng, p, 2.0),
                   VectorSignal::cosine(random_vector(rng, p, 3.0), random_vector(rng, p, 3.0), 0.7),
                   VectorSignal::cosine(random_vector(rng, p, 3.0), random_vector(rng, p, 3.0), 0.4)});
  }
  return out;
}

double min_eig(const Mat& a) { return Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().minCoeff(); }
double max_eig(const Mat& a) { return Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().maxCoeff(); }

/// Checks gradient, Hessian-vector and mixed time derivatives against central
/// differences at random probes.
void check_derivatives(const Objective& obj, Rng& rng, double scale) {
  for (int probe = 0; probe < 5; ++probe) {
    const BlockVector y = random_block_vector(rng, obj.n(), obj.p(), scale);
    const double t = uniform(rng, 0.0, 20.0);
    const BlockVector g = obj.gradient(y, t);
    CHECK(rel_err(fd_gradient(obj, y, t), g.stacked()) <= 1e-6);

    const Mat H = obj.dense_hessian(y, t);
    CHECK((H - H.transpose()).norm() <= 1e-10 * std::max(1.0, H.norm()));
    const BlockVector u = random_block_vector(rng, obj.n(), obj.p());
    const double s = 1e-4;
    const Vec fd_hv =
        (obj.gradient(y + s * u, t).stacked() - obj.gradient(y - s * u, t).stacked()) / (2 * s);
    CHECK(rel_err(fd_hv, H * u.stacked()) <= 1e-5);

    const double d = 1e-5;
    const Vec fd_t =
        (obj.gradient(y, t + d).stacked() - obj.gradient(y, t - d).stacked()) / (2 * d);
    CHECK(rel_err(fd_t, obj.time_gradient(y, t).stacked()) <= 1e-6);
  }
}

}  // namespace

TEST_CASE("penalty vanishes on consensus points") {
  const auto graph = std::make_shared<const NetworkGraph>(complete_graph(4, 2));
  std::vector<UtilitySpec> utilities(4, quadratic_utility(2));
  const Objective obj =
      resource_allocation_objective(graph, VectorSignal::zero(2 * graph->edge_count()), 2.0, utilities);
  BlockVector y(4, 2);
  for (int i = 0; i < 4; ++i) y.block(i) << 0.3, -1.1;
  // Zero logistic coefficients still contribute log 2 per coordinate.
  const double f_only = 4 * (0.5 * (0.3 * 0.3 + 1.1 * 1.1) + 2 * std::log(2.0));
  CHECK(obj.value(y, 1.0) == doctest::Approx(f_only).epsilon(1e-14));
  const BlockVector g = obj.gradient(y, 1.0);
  for (int i = 0; i < 4; ++i) CHECK((g.block(i) - y.block(i)).norm() <= 1e-14);
}

TEST_CASE("two node penalty expands by hand") {
  const auto graph = std::make_shared<const NetworkGraph>(path_graph(2, 1));
  std::vector<UtilitySpec> utilities(2, quadratic_utility(1));
  const Objective obj =
      resource_allocation_objective(graph, VectorSignal::zero(1), 1.0, utilities);
  BlockVector y(2, 1);
  y.stacked() << 0.7, -0.4;
  CHECK(obj.value(y, 0.0) == doctest::Approx(0.5 * 0.49 + 0.5 * 0.16 + 2 * std::log(2.0) + 1.1 * 1.1));
  CHECK(obj.cross_block(0, graph->incidence(0)[0], y, 0.0)(0, 0) == -2.0);
  const Mat H = obj.dense_hessian(y, 0.0);
  CHECK(H(0, 1) == -2.0);
  CHECK(H(0, 0) == 3.0);
}

TEST_CASE("penalty Hessian is a scaled incidence Gram matrix") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = uniform_int(rng, 2, 8);
    const int p = uniform_int(rng, 1, 3);
    const auto graph = random_connected_graph(rng, n, p);
    std::vector<UtilitySpec> utilities;
    for (int i = 0; i < n; ++i) {
      utilities.push_back({random_spd(rng, p, 1.0), Vec::Zero(p), VectorSignal::zero(p),
                           VectorSignal::zero(p)});
    }
    const double beta = uniform(rng, 0.5, 5.0);
    const Objective obj = resource_allocation_objective(
        graph, VectorSignal::zero(p * graph->edge_count()), beta, utilities);
    const BlockVector y = random_block_vector(rng, n, p, 3.0);
    Mat f_hess = Mat::Zero(n * p, n * p);
    for (int i = 0; i < n; ++i) f_hess.block(i * p, i * p, p, p) = utilities[i].Q;
    const Mat A = Mat(augmented_incidence(*graph));
    const Mat expected = 2.0 / (beta * beta) * A.transpose() * A;
    CHECK((obj.dense_hessian(y, uniform(rng, 0, 9)) - f_hess - expected).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}

TEST_CASE("paper sized penalty is positive semidefinite") {
  const auto graph = std::make_shared<const NetworkGraph>(
      random_geometric_graph(50, 10, benchmark_range(50), 1));
  std::vector<UtilitySpec> utilities(50, quadratic_utility(10));
  const Objective obj = resource_allocation_objective(
      graph, VectorSignal::zero(10 * graph->edge_count()), std::sqrt(20.0), utilities);
  const BlockVector y(50, 10);
  const Mat penalty = obj.dense_hessian(y, 0.0) - Mat::Identity(500, 500);
  CHECK(min_eig(penalty) >= -1e-12);
  CHECK(max_eig(penalty) <= 2.0 * 2 * graph->max_degree() / 20.0 + 1e-12);
}

TEST_CASE("resource allocation rejects a wrongly sized offset") {
  const auto graph = std::make_shared<const NetworkGraph>(path_graph(3, 2));
  std::vector<UtilitySpec> utilities(3, quadratic_utility(2));
  CHECK_THROWS_AS(resource_allocation_objective(graph, VectorSignal::zero(3), 1.0, utilities),
                  ObjectiveError);
}

TEST_CASE("quadratic logistic utility closed forms") {
  SUBCASE("zero logistic coefficients leave a pure quadratic") {
    Vec c(2);
    c << 1.0, -2.0;
    QuadraticLogisticUtility f(Mat::Identity(2, 2), Vec::Zero(2), VectorSignal::constant(c),
                               VectorSignal::zero(2));
    CHECK(f.gradient(c, 3.0).norm() == 0.0);
    CHECK(f.value(c, 3.0) == doctest::Approx(2 * std::log(2.0)));
  }
  SUBCASE("midpoint curvature") {
    Vec d(1);
    d << 0.4;
    QuadraticLogisticUtility f(Mat::Identity(1, 1), Vec::Constant(1, 2.0), VectorSignal::zero(1),
                               VectorSignal::constant(d));
    CHECK(f.hessian(d, 0.0)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("large arguments stay finite") {
    QuadraticLogisticUtility f(Mat::Identity(1, 1), Vec::Constant(1, 2.0), VectorSignal::zero(1),
                               VectorSignal::zero(1));
    const Vec big = Vec::Constant(1, 800.0);
    CHECK(std::isfinite(f.value(big, 0.0)));
    CHECK(std::isfinite(f.value(-big, 0.0)));
    CHECK(f.gradient(big, 0.0)(0) == doctest::Approx(802.0));
  }
}

TEST_CASE("property: logistic Hessian spectrum stays in the stated interval") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = uniform_int(rng, 1, 4);
    const Mat Q = random_spd(rng, p, 0.5);
    const Vec b = random_vector(rng, p, 2.0);
    QuadraticLogisticUtility f(Q, b, VectorSignal::cosine(random_vector(rng, p, 5), Vec::Zero(p), 0.1),
                               VectorSignal::cosine(random_vector(rng, p, 5), Vec::Zero(p), 0.1));
    const Vec y = random_vector(rng, p, 6.0);
    const Mat H = f.hessian(y, uniform(rng, 0, 50));
    CHECK(min_eig(H) >= min_eig(Q) - 1e-9);
    CHECK(max_eig(H) <= max_eig(Q) + b.cwiseAbs2().maxCoeff() / 4 + 1e-9);
  }
}

TEST_CASE("estimation objective") {
  SUBCASE("uncoupled nodes solve their own least squares") {
    const auto graph = std::make_shared<const NetworkGraph>(path_graph(3, 1));
    const std::vector<Vec> h(3, Vec::Constant(1, 2.0));
    Vec z(3);
    z << 1.0, -3.0, 4.0;
    const Objective obj = estimation_objective(graph, h, {1.0, 2.0, 0.5}, {0.0, 0.0}, 1.0,
                                               VectorSignal::constant(z));
    const BlockVector u(3, 1, z / 2.0);
    CHECK(obj.gradient(u, 0.0).norm() <= 1e-14);
  }
  SUBCASE("two-node minimizer from the normal equations") {
    const auto graph = std::make_shared<const NetworkGraph>(path_graph(2, 1));
    Vec z(2);
    z << 0.0, 2.0;
    const Objective obj = estimation_objective(graph, {Vec::Ones(1), Vec::Ones(1)}, {1.0, 1.0},
                                               {1.0}, 2.0, VectorSignal::constant(z));
    // (1 + beta w) u1 - beta w u2 = z1 and symmetric: with beta w = 2.
    Eigen::Matrix2d normal;
    normal << 3.0, -2.0, -2.0, 3.0;
    const Eigen::Vector2d expected = normal.inverse() * Eigen::Vector2d(0.0, 2.0);
    const BlockVector u(2, 1, expected);
    CHECK(obj.gradient(u, 0.0).norm() <= 1e-14);
    CHECK(expected(0) == doctest::Approx(0.8));
    CHECK(expected(1) == doctest::Approx(1.2));
  }
  SUBCASE("constant Hessian has no third derivative") {
    const auto graph = std::make_shared<const NetworkGraph>(path_graph(3, 2));
    Rng rng(4);
    std::vector<Vec> h{random_vector(rng, 2), random_vector(rng, 2), random_vector(rng, 2)};
    const Objective obj = estimation_objective(
        graph, h, {1.0, 1.0, 1.0}, {1.0, 0.5}, 1.0,
        VectorSignal::cosine(Vec::Ones(3), Vec::Zero(3), 1.0));
    CHECK(estimate_constants(obj, {}, 5, 1).C1 == 0.0);
  }
  SUBCASE("dimension mismatches are rejected") {
    const auto graph = std::make_shared<const NetworkGraph>(path_graph(2, 1));
    CHECK_THROWS_AS(estimation_objective(graph, {Vec::Ones(1)}, {1.0, 1.0}, {1.0}, 1.0,
                                         VectorSignal::zero(2)),
                    ObjectiveError);
    CHECK_THROWS_AS(estimation_objective(graph, {Vec::Ones(1), Vec::Ones(1)}, {1.0, 1.0}, {1.0},
                                         1.0, VectorSignal::zero(3)),
                    ObjectiveError);
  }
}

TEST_CASE("decoupled quadratic gradient and mixed derivative") {
  const auto graph = std::make_shared<const NetworkGraph>(path_graph(3, 1));
  const std::vector<Mat> Q(3, Mat::Identity(1, 1));
  const std::vector<VectorSignal> targets(
      3, VectorSignal::cosine(Vec::Ones(1), Vec::Zero(1), 1.0));
  const Objective obj = quadratic_objective(graph, Q, targets, {});
  BlockVector y(3, 1);
  y.stacked() << 0.5, -1.0, 2.0;
  const double t = 0.9;
  const BlockVector g = global_gradient(obj, y, t);
  const BlockVector tg = mixed_time_gradient(obj, y, t);
  for (int i = 0; i < 3; ++i) {
    CHECK(g.block(i)(0) == doctest::Approx(y.block(i)(0) - std::cos(t)).epsilon(1e-15));
    CHECK(tg.block(i)(0) == doctest::Approx(std::sin(t)).epsilon(1e-15));
  }
}

TEST_CASE("time invariant objective has no mixed derivative") {
  Rng rng(8);
  const QuadraticInstance inst = random_quadratic(rng, 5, 2, true, 0.0);
  const BlockVector y = random_block_vector(rng, 5, 2);
  CHECK(mixed_time_gradient(*inst.objective, y, 3.0).norm() == 0.0);
}

TEST_CASE("property: analytic derivatives match finite differences") {
  Rng rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    CAPTURE(trial);
    const int n = uniform_int(rng, 2, 6);
    const int p = uniform_int(rng, 1, 3);
    check_derivatives(*random_quadratic(rng, n, p).objective, rng, 3.0);

    const auto graph = random_connected_graph(rng, n, p);
    const Vec amp = random_vector(rng, p * graph->edge_count());
    const Objective ra = resource_allocation_objective(
        graph, VectorSignal::cosine(amp, amp, 0.3), uniform(rng, 1.0, 4.0),
        random_utilities(rng, n, p));
    check_derivatives(ra, rng, 3.0);

    std::vector<Vec> h;
    std::vector<double> var;
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
      h.push_back(random_vector(rng, p));
      var.push_back(uniform(rng, 0.5, 2.0));
    }
    for (int e = 0; e < graph->edge_count(); ++e) w.push_back(uniform(rng, 0.0, 1.0));
    const Objective est = estimation_objective(
        graph, h, var, w, 1.5, VectorSignal::cosine(random_vector(rng, n), random_vector(rng, n), 0.5));
    check_derivatives(est, rng, 3.0);
  }
}

TEST_CASE("benchmark Hessian is symmetric and bounded below by m") {
  const Problem& problem = desk_benchmark();
  Rng rng(5);
  for (int probe = 0; probe < 10; ++probe) {
    const BlockVector y = random_block_vector(rng, problem.objective->n(), problem.objective->p(), 8.0);
    const Mat H = problem.objective->dense_hessian(y, uniform(rng, 0, 100));
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_eig(H) >= problem.constants.m - 1e-9);
  }
}

TEST_CASE("sampled constants") {
  SUBCASE("isotropic quadratic is exact") {
    const auto graph = std::make_shared<const NetworkGraph>(path_graph(4, 2));
    const std::vector<Mat> Q(4, 1.7 * Mat::Identity(2, 2));
    const Objective obj = quadratic_objective(graph, Q, std::vector<VectorSignal>(4, VectorSignal::zero(2)), {});
    const ConstantsBundle c = estimate_constants(obj, {}, 20, 3);
    CHECK(c.m == doctest::Approx(1.7).epsilon(1e-14));
    CHECK(c.M == doctest::Approx(1.7).epsilon(1e-14));
    CHECK(c.C0 == 0.0);
    CHECK(c.C1 == 0.0);
    CHECK(c.C2 == 0.0);
    CHECK(c.C3 == 0.0);
    CHECK(c.ell == 0.0);
    CHECK(c.L == 0.0);
    CHECK(c.empirical);
  }
  SUBCASE("quadratic logistic envelope stays under the closed form") {
    Rng rng(12);
    const auto graph = random_connected_graph(rng, 5, 2);
    const auto utilities = random_utilities(rng, 5, 2);
    const Objective obj = resource_allocation_objective(
        graph, VectorSignal::zero(2 * graph->edge_count()), 2.0, utilities);
    const ConstantsBundle c = estimate_constants(obj, {}, 50, 9);
    double bound = 0.0;
    for (const auto& u : utilities) bound = std::max(bound, max_eig(u.Q) + u.b.cwiseAbs2().maxCoeff() / 4);
    CHECK(c.M <= bound + 1e-9);
  }
  SUBCASE("envelope grows with the sample count") {
    const Problem& problem = desk_benchmark();
    double prev_M = 0.0, prev_C0 = 0.0;
    for (int samples : {1, 4, 16, 64}) {
      const ConstantsBundle c = estimate_constants(*problem.objective, {}, samples, 21);
      CHECK(c.M >= prev_M);
      CHECK(c.C0 >= prev_C0);
      prev_M = c.M;
      prev_C0 = c.C0;
    }
  }
}

TEST_CASE("constants validation") {
  ConstantsBundle c{1.0, 2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, true};
  CHECK_NOTHROW(c.validate());
  c.m = 0.0;
  CHECK_THROWS_AS(c.validate(), ObjectiveError);
  c.m = 3.0;
  CHECK_THROWS_AS(c.validate(), ObjectiveError);
  c = {1.0, 2.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, true};
  CHECK_THROWS_AS(c.validate(), ObjectiveError);
}

TEST_CASE("nonconforming vectors are rejected") {
  const Problem& problem = desk_benchmark();
  CHECK_THROWS_AS(problem.objective->gradient(BlockVector(3, 3), 0.0), ObjectiveError);
}
