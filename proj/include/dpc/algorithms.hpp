#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dpc/block_vector.hpp"
#include "dpc/objective.hpp"
#include "dpc/splitting.hpp"

namespace dpc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant { DPC_G, DAPC_G, DPC_N, DAPC_N, RG, RN };

std::string_view variant_name(Variant v);
/// Accepts "DPC-G", "DAPC-G", "DPC-N", "DAPC-N", "RG", "RN".
Variant parse_variant(std::string_view name);

bool is_newton(Variant v);
bool has_prediction(Variant v);
bool uses_backward_difference(Variant v);
bool is_running(Variant v);

enum class TimeDerivativeMode { exact, backward };

/// gamma as a function of the index of the iterate being produced (k >= 1).
using GammaSchedule = std::function<double(int)>;

/// k -> 1 - a / k.
GammaSchedule harmonic_schedule(double a);

struct MethodConfig {
  Variant variant = Variant::DPC_G;
  double h = 0.1;
  int K = 0;
  int K_prime = 0;
  double gamma = 1.0;
  int n_C = 1;
  /// Extra corrections before the next sample; running baselines only.
  int n_EC = 0;
  GammaSchedule gamma_schedule;
  /// Worker threads for node-parallel sweeps.
  int threads = 1;

  /// Throws ConfigError on h <= 0, gamma <= 0, negative levels, n_C < 1,
  /// n_EC on a predicting variant, or gamma outside (0,1] for Newton variants.
  void validate() const;
  double gamma_at(int k) const;
};

struct MethodState {
  BlockVector y;
  /// grad F(y_k; t_{k-1}), held by the backward-difference variants for k >= 1.
  std::optional<BlockVector> previous_gradient;
  int k = 0;
  double t = 0.0;
};

MethodState initial_state(BlockVector y0, double t0 = 0.0);

/// (grad F(y_k;t_k) - grad F(y_k;t_{k-1})) / h.
BlockVector backward_time_derivative(const BlockVector& current_gradient,
                                     const BlockVector& previous_gradient, double h);

/// y_{k+1|k} = y_k + h p,  p = -H^{-1}_{(K)} d, with d the exact or backward
/// mixed derivative. Backward mode without a previous gradient uses p = 0.
BlockVector predict(const MethodState& state, const Objective& objective,
                    const MethodConfig& config, TimeDerivativeMode mode);

/// predicted - gamma * grad F(predicted; t_next).
BlockVector correct_gradient(const BlockVector& predicted, const Objective& objective,
                             double t_next, double gamma);

/// predicted - gamma * H^{-1}_{(K')} grad F(predicted; t_next), with the split
/// evaluated at (predicted, t_next).
BlockVector correct_newton(const BlockVector& predicted, const Objective& objective,
                           double t_next, double gamma, int K_prime, int threads = 1);

struct StepResult {
  MethodState state;
  /// y_{k+1|k}; equals y_k for the running baselines.
  BlockVector predicted;
  /// Iterate after the n_C corrections (the one that is put to use). For the
  /// running baselines the carried state additionally has the n_EC extras.
  BlockVector output;
};

StepResult step(const MethodState& state, const Objective& objective, const MethodConfig& config);

}  // namespace dpc
