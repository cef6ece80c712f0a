#include <doctest.h>

#include <limits>

#include "dpc/bench.hpp"
#include "dpc/bounds.hpp"
#include "support.hpp"

using namespace dpc;
using namespace dpc::testing;

namespace {

ConstantsBundle random_bundle(Rng& rng) {
  ConstantsBundle c;
  c.m = uniform(rng, 0.5, 2.0);
  c.M = c.m + uniform(rng, 0.0, 3.0);
  c.ell = uniform(rng, 0.0, 1.0);
  c.L = c.ell + uniform(rng, 0.0, 2.0);
  c.C0 = uniform(rng, 0.0, 5.0);
  c.C1 = uniform(rng, 0.0, 2.0);
  c.C2 = uniform(rng, 0.0, 2.0);
  c.C3 = uniform(rng, 0.0, 2.0);
  return c;
}

bool both_finite(double a, double b) { return std::isfinite(a) && std::isfinite(b); }

/// Every tracked bound of `hi` is at least the one of `lo` (where defined).
void check_not_smaller(const BoundReport& lo, const BoundReport& hi) {
  const double tol = 1e-12;
  auto cmp = [&](double a, double b) {
    if (both_finite(a, b)) CHECK(b >= a * (1 - tol) - tol);
  };
  cmp(lo.asymptote_any_h, hi.asymptote_any_h);
  cmp(lo.asymptote_any_h_approx, hi.asymptote_any_h_approx);
  cmp(lo.asymptote_small_h, hi.asymptote_small_h);
  cmp(lo.asymptote_small_h_approx, hi.asymptote_small_h_approx);
  cmp(lo.alpha0, hi.alpha0);
  cmp(lo.alpha0_approx, hi.alpha0_approx);
  cmp(lo.alpha1, hi.alpha1);
}

}  // namespace

TEST_CASE("closed-form constants") {
  ConstantsBundle c{1.0, 3.0, 0.5, 2.0, 1.0, 0.0, 0.0, 0.0, false};
  const BoundReport r = compute_constants(c, 0.1, 2, 3, 0.2);
  CHECK(r.varrho == 0.5);
  CHECK(r.Delta == 0.0);
  CHECK(r.sigma == 1.0);
  CHECK(r.H == doctest::Approx(2.0 / 1.25));
  CHECK(r.rho == doctest::Approx(0.8));
  CHECK(r.Gamma_K == doctest::Approx(0.125));
  CHECK(r.Gamma_Kprime == doctest::Approx(0.0625));
  CHECK_FALSE(r.empirical);
}

TEST_CASE("truncation term shrinks by exactly varrho per level") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const ConstantsBundle c = random_bundle(rng);
    const double varrho = compute_constants(c, 0.1, 0, 0, 0.1).varrho;
    for (int K = 0; K < 20; ++K) {
      CHECK(gamma_truncation(c, varrho, K + 1) == varrho * gamma_truncation(c, varrho, K));
    }
  }
}

TEST_CASE("deep truncation leaves the pure second-order asymptote") {
  ConstantsBundle c{1.2, 2.5, 0.3, 1.0, 2.0, 0.4, 0.6, 0.8, false};
  const double h = 0.01, gamma = 0.2;
  const BoundReport r = compute_constants(c, h, 400, 400, gamma);
  const double Delta = c.C0 * c.C2 / (c.m * c.m) + c.C3 / (2 * c.m) +
                       c.C0 * c.C0 * c.C1 / (2 * std::pow(c.m, 3));
  CHECK(r.Gamma_K < 1e-30);
  CHECK(r.asymptote_small_h ==
        doctest::Approx(r.rho / (1 - r.rho * r.sigma) * h * h * Delta).epsilon(1e-12));
}

TEST_CASE("shift-free quadratic gives a zero bound") {
  ConstantsBundle c{1.0, 2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, false};
  const BoundReport r = compute_constants(c, 0.1, 3, 3, 0.3);
  CHECK(gradient_error_bound(r, Regime::small_h, false) == 0.0);
  CHECK(gradient_error_bound(r, Regime::any_h, false) == 0.0);
}

TEST_CASE("approximate derivative bound is never smaller") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const ConstantsBundle c = random_bundle(rng);
    const BoundReport r = compute_constants(c, uniform(rng, 0.001, 0.5), uniform_int(rng, 0, 6),
                                            uniform_int(rng, 0, 6), uniform(rng, 0.01, 1.0) / (c.L + c.M));
    CHECK(gradient_error_bound(r, Regime::any_h, true) >= gradient_error_bound(r, Regime::any_h, false));
    if (r.small_h_valid()) {
      CHECK(gradient_error_bound(r, Regime::small_h, true) >=
            gradient_error_bound(r, Regime::small_h, false));
    }
    CHECK(r.alpha0_approx >= r.alpha0);
  }
}

TEST_CASE("regime preconditions") {
  ConstantsBundle c{1.0, 2.0, 0.0, 1.0, 5.0, 1.0, 1.0, 1.0, false};
  const BoundReport slow = compute_constants(c, 2.0, 1, 1, 0.01);
  CHECK_FALSE(slow.small_h_valid());
  CHECK(std::isnan(slow.asymptote_small_h));
  CHECK_THROWS_AS(gradient_error_bound(slow, Regime::small_h, false), BoundsError);
  CHECK(std::isfinite(gradient_error_bound(slow, Regime::any_h, false)));
  const BoundReport diverging = compute_constants(c, 0.1, 1, 1, 2.0);
  CHECK_FALSE(diverging.rho_contracts());
  CHECK_THROWS_AS(gradient_error_bound(diverging, Regime::any_h, false), BoundsError);
}

TEST_CASE("invalid inputs are rejected") {
  ConstantsBundle c{1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, false};
  CHECK_THROWS_AS(compute_constants(c, 0.0, 1, 1, 0.1), BoundsError);
  CHECK_THROWS_AS(compute_constants(c, 0.1, -1, 1, 0.1), BoundsError);
  CHECK_THROWS_AS(compute_constants(c, 0.1, 1, 1, 0.0), BoundsError);
  c.m = -1.0;
  CHECK_THROWS_AS(compute_constants(c, 0.1, 1, 1, 0.1), ObjectiveError);
}

TEST_CASE("property: bounds are monotone in their inputs") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const ConstantsBundle c = random_bundle(rng);
    const double h = uniform(rng, 0.001, 0.3);
    const int K = uniform_int(rng, 0, 5);
    const int Kp = uniform_int(rng, 0, 5);
    const double gamma = uniform(rng, 0.05, 1.0) / (c.L + c.M + 3.0);
    const BoundReport base = compute_constants(c, h, K, Kp, gamma);
    CAPTURE(trial);

    check_not_smaller(base, compute_constants(c, h * 1.5, K, Kp, gamma));
    check_not_smaller(compute_constants(c, h, K + 1, Kp, gamma), base);
    check_not_smaller(compute_constants(c, h, K, Kp + 1, gamma), base);
    for (double ConstantsBundle::*field :
         {&ConstantsBundle::C0, &ConstantsBundle::C1, &ConstantsBundle::C2, &ConstantsBundle::C3}) {
      ConstantsBundle bigger = c;
      bigger.*field += uniform(rng, 0.01, 1.0);
      check_not_smaller(base, compute_constants(bigger, h, K, Kp, gamma));
    }
    ConstantsBundle stronger = c;
    stronger.m = c.m + uniform(rng, 0.0, c.M - c.m);
    check_not_smaller(compute_constants(stronger, h, K, Kp, gamma), base);
  }
}

TEST_CASE("Newton coefficients in the vanishing-period limit") {
  ConstantsBundle c{1.3, 2.4, 0.2, 0.9, 3.0, 0.7, 0.5, 1.1, false};
  for (double gamma : {0.3, 0.7, 1.0}) {
    const BoundReport r = compute_constants(c, 1e-9, 2000, 2000, gamma);
    CHECK(std::abs(r.alpha0) <= 1e-6);
    CHECK(std::abs(r.alpha1 - (1 - gamma)) <= 1e-6);
  }
  const BoundReport r = compute_constants(c, 1e-9, 2000, 2000, 1.0, 1.0 - 1e-9);
  const double remark = 2 * c.m / (c.C1 * r.sigma * r.sigma);
  CHECK(std::abs(r.attraction_radius - remark) <= 0.01 * remark);
  CHECK(r.tau_feasible);
}

TEST_CASE("Newton feasibility corner cases") {
  ConstantsBundle c{1.0, 2.0, 0.0, 1.0, 1.0, 0.0, 0.5, 0.5, false};
  const BoundReport global = compute_constants(c, 0.01, 10, 10, 1.0);
  CHECK(global.attraction_radius == std::numeric_limits<double>::infinity());
  CHECK(global.tau_feasible);

  c.C1 = 1.0;
  const BoundReport r = compute_constants(c, 0.01, 10, 10, 0.5);
  const NewtonFeasibility tight = newton_feasibility(r, 0.4);
  CHECK_FALSE(tight.feasible);
  CHECK(tight.attraction_radius == 0.0);
  const NewtonFeasibility loose = newton_feasibility(r, 0.9);
  CHECK(loose.feasible);
  CHECK(loose.attraction_radius == doctest::Approx((0.9 - r.alpha1) / r.alpha2));
  CHECK(loose.plateau == doctest::Approx(r.alpha0 / 0.1));
}

TEST_CASE("solution drift bound") {
  ConstantsBundle c{1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, false};
  CHECK(solution_drift_bound(c, 0.5) == 0.0);

  c.C0 = 1.0;
  for (double t = 0.0; t < 10.0; t += 0.3) {
    for (double h : {0.01, 0.1, 0.7}) {
      CHECK(std::abs(std::cos(t + h) - std::cos(t)) <= solution_drift_bound(c, h) + 1e-15);
    }
  }

  const Problem& bench = desk_benchmark();
  const double h = 0.1;
  const auto ref = optimal_trajectory(*bench.objective, sample_times(0.0, h, 500), bench.y0);
  const double bound = solution_drift_bound(bench.constants, h);
  double worst = 0.0;
  for (std::size_t k = 1; k < ref.size(); ++k) worst = std::max(worst, (ref[k] - ref[k - 1]).norm());
  CHECK(worst <= bound);
}

TEST_CASE("key-value serialization") {
  ConstantsBundle c{1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, true};
  const std::string text = to_key_value(compute_constants(c, 0.1, 2, 3, 0.25));
  CHECK(text.rfind("[bounds]\n", 0) == 0);
  for (const char* key : {"constants=empirical", "varrho=", "H=", "Delta=", "Gamma_K=", "rho=",
                          "sigma=", "asymptote_any_h=", "alpha0=", "alpha2=", "tau_feasible=",
                          "attraction_radius=", "K=2", "Kprime=3"}) {
    CHECK(text.find(key) != std::string::npos);
  }
}
