#include "dpc/algorithms.hpp"

#include <cmath>

namespace dpc {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::DPC_G: return "DPC-G";
    case Variant::DAPC_G: return "DAPC-G";
    case Variant::DPC_N: return "DPC-N";
    case Variant::DAPC_N: return "DAPC-N";
    case Variant::RG: return "RG";
    case Variant::RN: return "RN";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::DPC_G, Variant::DAPC_G, Variant::DPC_N, Variant::DAPC_N, Variant::RG,
                    Variant::RN}) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

bool is_newton(Variant v) {
  return v == Variant::DPC_N || v == Variant::DAPC_N || v == Variant::RN;
}

bool has_prediction(Variant v) { return v != Variant::RG && v != Variant::RN; }

bool uses_backward_difference(Variant v) {
  return v == Variant::DAPC_G || v == Variant::DAPC_N;
}

bool is_running(Variant v) { return !has_prediction(v); }

GammaSchedule harmonic_schedule(double a) {
  return [a](int k) { return 1.0 - a / static_cast<double>(k); };
}

void MethodConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be positive");
  if (K < 0 || K_prime < 0) throw ConfigError("truncation levels must be nonnegative");
  if (n_C < 1) throw ConfigError("n_C must be at least 1");
  if (n_EC < 0) throw ConfigError("n_EC must be nonnegative");
  if (n_EC > 0 && !is_running(variant)) {
    throw ConfigError("extra corrections apply to the running baselines only");
  }
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!gamma_schedule) {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (is_newton(variant) && gamma > 1.0) {
      throw ConfigError("gamma must lie in (0,1] for Newton variants");
    }
  }
}

double MethodConfig::gamma_at(int k) const {
  const double g = gamma_schedule ? gamma_schedule(k) : gamma;
  if (!(g > 0.0) || (is_newton(variant) && g > 1.0)) {
    throw ConfigError("gamma schedule left the admissible range at k=" + std::to_string(k));
  }
  return g;
}

MethodState initial_state(BlockVector y0, double t0) {
  MethodState s;
  s.y = std::move(y0);
  s.t = t0;
  return s;
}

BlockVector backward_time_derivative(const BlockVector& current_gradient,
                                     const BlockVector& previous_gradient, double h) {
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  return (1.0 / h) * (current_gradient - previous_gradient);
}

BlockVector predict(const MethodState& state, const Objective& objective,
                    const MethodConfig& config, TimeDerivativeMode mode) {
  BlockVector direction_rhs;
  if (mode == TimeDerivativeMode::exact) {
    direction_rhs = -objective.time_gradient(state.y, state.t);
  } else {
    if (!state.previous_gradient) return state.y;
    direction_rhs = -backward_time_derivative(objective.gradient(state.y, state.t),
                                              *state.previous_gradient, config.h);
  }
  const SplitHessian split = assemble_split(objective, state.y, state.t);
  const BlockVector p = truncated_solve(split, direction_rhs, config.K, config.threads);
  return state.y + config.h * p;
}

BlockVector correct_gradient(const BlockVector& predicted, const Objective& objective,
                             double t_next, double gamma) {
  return predicted - gamma * objective.gradient(predicted, t_next);
}

BlockVector correct_newton(const BlockVector& predicted, const Objective& objective,
                           double t_next, double gamma, int K_prime, int threads) {
  const SplitHessian split = assemble_split(objective, predicted, t_next);
  const BlockVector g = objective.gradient(predicted, t_next);
  return predicted - gamma * truncated_solve(split, g, K_prime, threads);
}

StepResult step(const MethodState& state, const Objective& objective, const MethodConfig& config) {
  const double t_next = state.t + config.h;
  const Variant v = config.variant;

  StepResult out;
  if (has_prediction(v)) {
    const auto mode =
        uses_backward_difference(v) ? TimeDerivativeMode::backward : TimeDerivativeMode::exact;
    out.predicted = predict(state, objective, config, mode);
  } else {
    out.predicted = state.y;
  }

  const double gamma = config.gamma_at(state.k + 1);
  BlockVector y = out.predicted;
  for (int c = 0; c < config.n_C; ++c) {
    y = is_newton(v) ? correct_newton(y, objective, t_next, gamma, config.K_prime, config.threads)
                     : correct_gradient(y, objective, t_next, gamma);
  }
  out.output = y;
  for (int c = 0; c < config.n_EC; ++c) {
    y = is_newton(v) ? correct_newton(y, objective, t_next, gamma, config.K, config.threads)
                     : correct_gradient(y, objective, t_next, gamma);
  }

  out.state.y = std::move(y);
  out.state.k = state.k + 1;
  out.state.t = t_next;
  if (uses_backward_difference(v)) {
    out.state.previous_gradient = objective.gradient(out.state.y, state.t);
  }
  return out;
}

}  // namespace dpc
