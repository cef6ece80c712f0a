#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpc/algorithms.hpp"
#include "dpc/bounds.hpp"
#include "dpc/netsim.hpp"
#include "dpc/problems.hpp"

namespace dpc {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceOptions {
  /// Gradient-norm tolerance; nonpositive selects 1e-11 * sqrt(np).
  double tolerance = 0.0;
  int max_iterations = 100;
};

double default_reference_tolerance(const Objective& objective);

/// Centralized damped Newton (dense Cholesky, Armijo backtracking) at every
/// time, warm-started from the previous solution. Throws NumericalError when
/// the iteration limit is reached.
std::vector<BlockVector> optimal_trajectory(const Objective& objective,
                                            const std::vector<double>& times,
                                            const BlockVector& warm_start,
                                            ReferenceOptions options = {});

/// t_0, t_0 + h, ... accumulated exactly as the method drivers advance time.
std::vector<double> sample_times(double t0, double h, int steps);

struct RunRow {
  int k = 0;
  double t = 0.0;
  double err = 0.0;
  /// ||y_{k|k-1} - y*(t_k)||; equals err at k = 0.
  double err_pred = 0.0;
  long long rounds_cum = 0;
  long long scalars_cum = 0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  std::vector<BlockVector> iterates;
  MethodConfig config;
  std::uint64_t seed = 0;
};

enum class Engine { direct, network };

struct SimulationOptions {
  Engine engine = Engine::direct;
  bool keep_iterates = false;
  double t0 = 0.0;
};

/// Runs `steps` steps from y0 and scores against `reference` (steps + 1 points
/// on sample_times(t0, h, steps)).
RunRecord simulate(const Objective& objective, const MethodConfig& config, const BlockVector& y0,
                   int steps, const std::vector<BlockVector>& reference,
                   SimulationOptions options = {});

/// max(steps/2, steps - 200).
int default_k_bar(int steps);

/// max_{k > k_bar} err_k. Throws std::invalid_argument when no such k exists.
double asymptotic_error(const RunRecord& record, int k_bar);
double asymptotic_error(const std::vector<double>& errors, int k_bar);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least squares of log(err) against log(h).
PowerFit fit_power_law(const std::vector<double>& h, const std::vector<double>& err);

struct Problem {
  std::string name;
  std::shared_ptr<const NetworkGraph> graph;
  std::shared_ptr<const Objective> objective;
  std::vector<UtilitySpec> utilities;
  ConstantsBundle constants;
  BlockVector y0;
  std::uint64_t seed = 0;
};

enum class Scale { desk, paper };

struct BenchmarkSpec {
  int n = 10;
  int p = 3;
  double beta = 4.47213595499958;  // sqrt(20)
  double omega = 0.1;
  double amplitude = 10.0;
  /// Nonpositive selects 2.5 sqrt(2) / sqrt(n).
  double range = 0.0;

  static BenchmarkSpec for_scale(Scale scale);
};

/// Resource-allocation benchmark with quadratic-logistic utilities:
/// Q = diag(U[1,2]) + v v' with v_l ~ U[-1,1]/sqrt(p), b_l ~ U[-2,2],
/// c, d cosine drifts with phases U[0,2pi). Named streams "graph", "Q", "b"
/// and "phases" are split from `seed`.
Problem paper_benchmark(std::uint64_t seed, const BenchmarkSpec& spec = {});

struct StepsRule {
  double horizon = 60.0;
  int min_steps = 300;
  int steps_for(double h) const;
};

struct SweepRow {
  Variant variant = Variant::RG;
  double h = 0.0;
  int K = 0;
  int K_prime = 0;
  double gamma = 0.0;
  double asymptotic_err = 0.0;
};

struct SweepFit {
  std::string label;
  PowerFit fit;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepFit> fits;
};

/// Every config is run at every h (its own h is overwritten). Cells run on
/// up to `jobs` threads; the result does not depend on `jobs`.
SweepResult sweep_h(const Problem& problem, const std::vector<MethodConfig>& configs,
                    const std::vector<double>& h_grid, const StepsRule& rule, int jobs = 1);

std::string config_label(const MethodConfig& config);

struct BudgetAllocation {
  Variant variant = Variant::RG;
  int rounds = 0;
  int n_C = 0;
  int n_EC = 0;
  int K = 0;
  int K_prime = 0;
  bool feasible = false;
};

/// floor(r h / t_bar) rounds per phase, split per variant. A predicting or
/// Newton variant is infeasible when its level would fall below `min_level`.
BudgetAllocation budget_allocation(double t_bar, double r, double h, Variant variant,
                                   int min_level = 1);

void write_run_csv(std::ostream& out, const RunRecord& record);
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace dpc
