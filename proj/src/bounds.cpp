#include "dpc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace dpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Alphas {
  double a0;
  double a1;
};

Alphas alphas(const ConstantsBundle& c, const BoundReport& r, double phi) {
  // gamma (L+M) Gamma(K') / C0 with Gamma/C0 = varrho^{K'+1}/m, defined for C0 = 0.
  const double truncation = r.gamma * (c.L + c.M) * std::pow(r.varrho, r.K_prime + 1) / c.m;
  const double lin = truncation + 1.0 - r.gamma;
  return {phi * (r.gamma * c.C1 / (2.0 * c.m) * phi + lin),
          r.sigma * (r.gamma * c.C1 / c.m * phi + lin)};
}

}  // namespace

double gamma_truncation(const ConstantsBundle& c, double varrho, int K) {
  // Repeated multiplication so that Gamma(K+1) = varrho * Gamma(K) holds exactly.
  double g = c.C0 / c.m;
  for (int k = 0; k <= K; ++k) g *= varrho;
  return g;
}

BoundReport compute_constants(const ConstantsBundle& c, double h, int K, int K_prime,
                              double gamma, double tau) {
  c.validate();
  if (!(h > 0.0)) throw BoundsError("h must be positive");
  if (K < 0 || K_prime < 0) throw BoundsError("truncation levels must be nonnegative");
  if (!(gamma > 0.0)) throw BoundsError("gamma must be positive");

  BoundReport r;
  r.h = h;
  r.K = K;
  r.K_prime = K_prime;
  r.gamma = gamma;
  r.empirical = c.empirical;

  const double m = c.m;
  r.varrho = (c.L / 2.0) / (m + c.L / 2.0);
  r.H = (m + c.L / 2.0) / (m * (m + c.ell / 2.0));
  r.Delta = c.C0 * c.C0 * c.C1 / (2.0 * m * m * m) + c.C0 * c.C2 / (m * m) + c.C3 / (2.0 * m);
  r.Gamma_K = gamma_truncation(c, r.varrho, K);
  r.Gamma_Kprime = gamma_truncation(c, r.varrho, K_prime);
  r.rho = std::max(std::abs(1.0 - gamma * m), std::abs(1.0 - gamma * (c.L + c.M)));
  r.sigma = 1.0 + h * (c.C0 * c.C1 / (m * m) + c.C2 / m);

  const double phi = h * r.Gamma_K + h * h * r.Delta;
  const double phi_approx = phi + h * h * c.C3 * r.H / 2.0;

  if (r.small_h_valid()) {
    const double f = r.rho / (1.0 - r.rho * r.sigma);
    r.asymptote_small_h = f * phi;
    r.asymptote_small_h_approx = f * phi_approx;
  } else {
    r.asymptote_small_h = r.asymptote_small_h_approx = kNaN;
  }
  if (r.rho_contracts()) {
    const double f = r.rho / (1.0 - r.rho);
    const double drift = 2.0 * c.C0 * r.rho * h / (m * (1.0 - r.rho));
    r.asymptote_any_h = drift + f * phi;
    r.asymptote_any_h_approx = drift + f * phi_approx;
  } else {
    r.asymptote_any_h = r.asymptote_any_h_approx = kNaN;
  }

  r.alpha2 = gamma * c.C1 / (2.0 * m) * r.sigma * r.sigma;
  const Alphas exact = alphas(c, r, phi);
  const Alphas approx = alphas(c, r, phi_approx);
  r.alpha0 = exact.a0;
  r.alpha1 = exact.a1;
  r.alpha0_approx = approx.a0;
  r.alpha1_approx = approx.a1;

  r.tau = tau > 0.0 ? tau : 1.0 - gamma / 2.0;
  const NewtonFeasibility nf = newton_feasibility(r, r.tau);
  r.tau_feasible = nf.feasible;
  r.attraction_radius = nf.attraction_radius;
  return r;
}

double gradient_error_bound(const BoundReport& report, Regime regime, bool approximate_td) {
  if (regime == Regime::small_h) {
    if (!report.small_h_valid()) throw BoundsError("small-h bound needs rho*sigma < 1");
    return approximate_td ? report.asymptote_small_h_approx : report.asymptote_small_h;
  }
  if (!report.rho_contracts()) throw BoundsError("any-h bound needs rho < 1");
  return approximate_td ? report.asymptote_any_h_approx : report.asymptote_any_h;
}

NewtonFeasibility newton_feasibility(const BoundReport& report, double tau, bool approximate_td) {
  const double a0 = approximate_td ? report.alpha0_approx : report.alpha0;
  const double a1 = approximate_td ? report.alpha1_approx : report.alpha1;
  const double a2 = report.alpha2;
  NewtonFeasibility out;
  out.plateau = tau < 1.0 ? a0 / (1.0 - tau) : kInf;
  if (!(a1 < tau)) {
    out.attraction_radius = 0.0;
    return out;
  }
  if (a2 == 0.0) {
    out.attraction_radius = kInf;
    out.feasible = tau < 1.0;
    return out;
  }
  const double radius = (tau - a1) / a2;
  out.attraction_radius = radius;
  out.feasible = tau * radius + a0 <= radius;
  return out;
}

double solution_drift_bound(const ConstantsBundle& c, double h) { return c.C0 * h / c.m; }

std::string to_key_value(const BoundReport& r) {
  std::string out = "[bounds]\n";
  auto put = [&out](const char* key, double value) {
    out += fmt::format("{}={:.17g}\n", key, value);
  };
  out += fmt::format("constants={}\n", r.empirical ? "empirical" : "analytic");
  put("h", r.h);
  out += fmt::format("K={}\nKprime={}\n", r.K, r.K_prime);
  put("gamma", r.gamma);
  put("varrho", r.varrho);
  put("H", r.H);
  put("Delta", r.Delta);
  put("Gamma_K", r.Gamma_K);
  put("Gamma_Kprime", r.Gamma_Kprime);
  put("rho", r.rho);
  put("sigma", r.sigma);
  put("asymptote_small_h", r.asymptote_small_h);
  put("asymptote_small_h_approx", r.asymptote_small_h_approx);
  put("asymptote_any_h", r.asymptote_any_h);
  put("asymptote_any_h_approx", r.asymptote_any_h_approx);
  put("alpha0", r.alpha0);
  put("alpha1", r.alpha1);
  put("alpha2", r.alpha2);
  put("alpha0_approx", r.alpha0_approx);
  put("alpha1_approx", r.alpha1_approx);
  put("tau", r.tau);
  out += fmt::format("tau_feasible={}\n", r.tau_feasible ? "true" : "false");
  put("attraction_radius", r.attraction_radius);
  out += fmt::format("rho_contracts={}\nsmall_h_valid={}\n", r.rho_contracts() ? "true" : "false",
                     r.small_h_valid() ? "true" : "false");
  return out;
}

}  // namespace dpc
