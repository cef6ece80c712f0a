#pragma once

#include <stdexcept>
#include <string>

#include "dpc/objective.hpp"

namespace dpc {

class BoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convergence constants and error-bound predictions for one (constants, h,
/// K, K', gamma) setting. Coefficients with suffix _approx carry the extra
/// h^2 C3 H / 2 term of the backward-difference variants.
struct BoundReport {
  double h = 0.0;
  int K = 0;
  int K_prime = 0;
  double gamma = 0.0;
  bool empirical = true;

  double varrho = 0.0;
  double H = 0.0;
  double Delta = 0.0;
  double Gamma_K = 0.0;
  double Gamma_Kprime = 0.0;
  double rho = 0.0;
  double sigma = 0.0;

  /// NaN when rho * sigma >= 1.
  double asymptote_small_h = 0.0;
  double asymptote_small_h_approx = 0.0;
  /// NaN when rho >= 1.
  double asymptote_any_h = 0.0;
  double asymptote_any_h_approx = 0.0;

  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha0_approx = 0.0;
  double alpha1_approx = 0.0;

  double tau = 0.0;
  bool tau_feasible = false;
  double attraction_radius = 0.0;

  bool rho_contracts() const { return rho < 1.0; }
  bool small_h_valid() const { return rho * sigma < 1.0; }
};

/// Gamma(varrho, K) = (C0/m) varrho^{K+1}.
double gamma_truncation(const ConstantsBundle& c, double varrho, int K);

/// Evaluates every constant. `tau` defaults to 1 - gamma/2, inside (1-gamma, 1).
BoundReport compute_constants(const ConstantsBundle& c, double h, int K, int K_prime,
                              double gamma, double tau = -1.0);

enum class Regime { any_h, small_h };

/// Limsup tracking-error bound of the gradient-corrected variants. Throws
/// BoundsError for the small-h regime when rho * sigma >= 1, and for the
/// any-h regime when rho >= 1.
double gradient_error_bound(const BoundReport& report, Regime regime, bool approximate_td);

struct NewtonFeasibility {
  bool feasible = false;
  /// (tau - alpha1) / alpha2; infinite when alpha2 = 0.
  double attraction_radius = 0.0;
  /// alpha0 / (1 - tau).
  double plateau = 0.0;
};

/// alpha1 < tau and tau (tau - alpha1)/alpha2 + alpha0 <= (tau - alpha1)/alpha2.
NewtonFeasibility newton_feasibility(const BoundReport& report, double tau,
                                     bool approximate_td = false);

/// C0 h / m.
double solution_drift_bound(const ConstantsBundle& c, double h);

/// Flat "[bounds]" block of key=value lines.
std::string to_key_value(const BoundReport& report);

}  // namespace dpc
