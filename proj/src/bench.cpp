#include "dpc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "dpc/rng.hpp"

namespace dpc {

double default_reference_tolerance(const Objective& objective) {
  return 1e-11 * std::sqrt(static_cast<double>(objective.n() * objective.p()));
}

namespace {

BlockVector newton_solve(const Objective& objective, BlockVector y, double t, double tol,
                         int max_iterations) {
  constexpr double kArmijo = 1e-4;
  for (int it = 0; it < max_iterations; ++it) {
    const BlockVector g = objective.gradient(y, t);
    const double gnorm = g.norm();
    if (gnorm <= tol) return y;
    Eigen::LLT<Mat> llt(objective.dense_hessian(y, t));
    if (llt.info() != Eigen::Success) throw NumericalError("reference Hessian not positive definite");
    const Vec d = -llt.solve(g.stacked());
    const double f0 = objective.value(y, t);
    const double slope = g.stacked().dot(d);
    double step = 1.0;
    BlockVector trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = BlockVector(y.n(), y.p(), y.stacked() + step * d);
      // Near the solution function values stop resolving the decrease; a
      // smaller gradient is accepted instead.
      if (objective.value(trial, t) <= f0 + kArmijo * step * slope ||
          objective.gradient(trial, t).norm() < gnorm) {
        break;
      }
      step *= 0.5;
    }
    y = std::move(trial);
  }
  if (objective.gradient(y, t).norm() <= tol) return y;
  throw NumericalError(fmt::format("reference Newton stalled at t={:.17g}", t));
}

}  // namespace

std::vector<BlockVector> optimal_trajectory(const Objective& objective,
                                            const std::vector<double>& times,
                                            const BlockVector& warm_start,
                                            ReferenceOptions options) {
  objective.check_conforms(warm_start);
  const double tol = options.tolerance > 0.0 ? options.tolerance
                                             : default_reference_tolerance(objective);
  std::vector<BlockVector> out;
  out.reserve(times.size());
  BlockVector y = warm_start;
  for (double t : times) {
    y = newton_solve(objective, y, t, tol, options.max_iterations);
    out.push_back(y);
  }
  return out;
}

std::vector<double> sample_times(double t0, double h, int steps) {
  std::vector<double> times{t0};
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    t = t + h;
    times.push_back(t);
  }
  return times;
}

RunRecord simulate(const Objective& objective, const MethodConfig& config, const BlockVector& y0,
                   int steps, const std::vector<BlockVector>& reference,
                   SimulationOptions options) {
  config.validate();
  if (static_cast<int>(reference.size()) != steps + 1) {
    throw std::invalid_argument("reference must have steps + 1 points");
  }
  RunRecord record;
  record.config = config;
  const auto times = sample_times(options.t0, config.h, steps);
  const double e0 = (y0 - reference[0]).norm();
  record.rows.push_back({0, times[0], e0, e0, 0, 0});
  if (options.keep_iterates) record.iterates.push_back(y0);

  auto finish_row = [&](int k, const BlockVector& output, const BlockVector& predicted,
                        long long rounds, long long scalars) {
    const double err = (output - reference[k]).norm();
    const double err_pred = (predicted - reference[k]).norm();
    if (!std::isfinite(err)) {
      throw NumericalError(fmt::format("tracking error not finite at k={}", k));
    }
    record.rows.push_back({k, times[k], err, err_pred, rounds, scalars});
    if (options.keep_iterates) record.iterates.push_back(output);
  };

  if (options.engine == Engine::network) {
    NetworkOptions net;
    net.t0 = options.t0;
    const NetworkRun run = run_decentralized(config, objective, y0, steps, net);
    long long rounds = 0;
    for (int k = 1; k <= steps; ++k) {
      rounds += run.ledger.rounds_prediction[k - 1] + run.ledger.rounds_correction[k - 1];
      finish_row(k, run.outputs[k], run.predicted[k], rounds, rounds * objective.p());
    }
    if (steps > 0 && objective.graph().edge_count() > 0 &&
        run.ledger.scalars_per_neighbor() != rounds * objective.p()) {
      throw NumericalError("ledger scalar count disagrees with round count");
    }
    return record;
  }

  const CommRequirement per_step =
      comm_requirements(config.variant, config.K, config.K_prime, objective.p(), config.n_C,
                        config.n_EC);
  MethodState state = initial_state(y0, options.t0);
  for (int k = 1; k <= steps; ++k) {
    StepResult r = step(state, objective, config);
    finish_row(k, r.output, r.predicted, static_cast<long long>(k) * per_step.rounds(),
               static_cast<long long>(k) * per_step.scalars_per_neighbor);
    state = std::move(r.state);
  }
  return record;
}

int default_k_bar(int steps) { return std::max(steps / 2, steps - 200); }

double asymptotic_error(const std::vector<double>& errors, int k_bar) {
  if (k_bar < 0 || static_cast<int>(errors.size()) <= k_bar + 1) {
    throw std::invalid_argument("record too short for the requested k_bar");
  }
  return *std::max_element(errors.begin() + k_bar + 1, errors.end());
}

double asymptotic_error(const RunRecord& record, int k_bar) {
  std::vector<double> errors;
  errors.reserve(record.rows.size());
  for (const auto& row : record.rows) errors.push_back(row.err);
  return asymptotic_error(errors, k_bar);
}

PowerFit fit_power_law(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) {
    throw std::invalid_argument("power-law fit needs at least two matching points");
  }
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) {
      throw std::invalid_argument("power-law fit needs positive values");
    }
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("power-law fit needs distinct h values");
  PowerFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

BenchmarkSpec BenchmarkSpec::for_scale(Scale scale) {
  BenchmarkSpec spec;
  if (scale == Scale::paper) {
    spec.n = 50;
    spec.p = 10;
  }
  return spec;
}

Problem paper_benchmark(std::uint64_t seed, const BenchmarkSpec& spec) {
  if (spec.n < 1 || spec.p < 1) throw ConfigError("benchmark needs n, p >= 1");
  const double range = spec.range > 0.0 ? spec.range : benchmark_range(spec.n);
  auto graph = std::make_shared<const NetworkGraph>(random_geometric_graph(
      spec.n, spec.p, range, splitmix64(seed ^ fnv1a("graph"))));

  Rng q_rng = named_stream(seed, "Q");
  Rng b_rng = named_stream(seed, "b");
  Rng phase_rng = named_stream(seed, "phases");
  std::uniform_real_distribution<double> diag(1.0, 2.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  const int p = spec.p;
  const Vec amplitude = Vec::Constant(p, spec.amplitude);
  std::vector<UtilitySpec> utilities;
  for (int i = 0; i < spec.n; ++i) {
    Vec d(p);
    for (int l = 0; l < p; ++l) d(l) = diag(q_rng);
    Vec v(p);
    for (int l = 0; l < p; ++l) v(l) = unit(q_rng) / std::sqrt(static_cast<double>(p));
    Vec b(p);
    for (int l = 0; l < p; ++l) b(l) = coef(b_rng);
    Vec phase_c(p), phase_d(p);
    for (int l = 0; l < p; ++l) phase_c(l) = phase(phase_rng);
    for (int l = 0; l < p; ++l) phase_d(l) = phase(phase_rng);
    Mat Q = d.asDiagonal();
    Q += v * v.transpose();
    utilities.push_back({Q, b, VectorSignal::cosine(amplitude, phase_c, spec.omega),
                         VectorSignal::cosine(amplitude, phase_d, spec.omega)});
  }

  auto objective = std::make_shared<Objective>(resource_allocation_objective(
      graph, VectorSignal::zero(graph->edge_count() * p), spec.beta, utilities));
  const ConstantsBundle constants =
      quadratic_logistic_constants(*graph, utilities, spec.beta, spec.amplitude, spec.omega);
  objective->set_analytic_constants(constants);

  Problem problem;
  problem.name = fmt::format("resource-allocation n={} p={}", spec.n, spec.p);
  problem.graph = graph;
  problem.objective = objective;
  problem.utilities = std::move(utilities);
  problem.constants = constants;
  problem.y0 = BlockVector(spec.n, p);
  problem.seed = seed;
  return problem;
}

int StepsRule::steps_for(double h) const {
  return std::max(min_steps, static_cast<int>(std::ceil(horizon / h - 1e-9)));
}

std::string config_label(const MethodConfig& c) {
  std::string label(variant_name(c.variant));
  if (has_prediction(c.variant) || c.variant == Variant::RN) label += fmt::format(" K={}", c.K);
  if (is_newton(c.variant)) label += fmt::format(" K'={}", c.K_prime);
  label += fmt::format(" gamma={:.6g}", c.gamma);
  if (c.n_C != 1) label += fmt::format(" nC={}", c.n_C);
  if (c.n_EC != 0) label += fmt::format(" nEC={}", c.n_EC);
  return label;
}

SweepResult sweep_h(const Problem& problem, const std::vector<MethodConfig>& configs,
                    const std::vector<double>& h_grid, const StepsRule& rule, int jobs) {
  const Objective& objective = *problem.objective;
  const std::size_t nh = h_grid.size();
  const std::size_t nc = configs.size();

  // References first, one per h; then every (config, h) cell.
  std::vector<std::vector<BlockVector>> references(nh);
  for (std::size_t j = 0; j < nh; ++j) {
    const int steps = rule.steps_for(h_grid[j]);
    references[j] = optimal_trajectory(objective, sample_times(0.0, h_grid[j], steps), problem.y0);
  }

  std::vector<double> cell(nc * nh, 0.0);
  std::vector<std::string> failure(nc * nh);
  auto run_cell = [&](std::size_t idx) {
    const std::size_t c = idx / nh;
    const std::size_t j = idx % nh;
    MethodConfig config = configs[c];
    config.h = h_grid[j];
    const int steps = rule.steps_for(config.h);
    try {
      const RunRecord rec = simulate(objective, config, problem.y0, steps, references[j]);
      cell[idx] = asymptotic_error(rec, default_k_bar(steps));
    } catch (const std::exception& e) {
      failure[idx] = e.what();
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(nc * nh)));
  if (workers == 1) {
    for (std::size_t idx = 0; idx < nc * nh; ++idx) run_cell(idx);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t idx = w; idx < nc * nh; idx += workers) run_cell(idx);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failure) {
    if (!f.empty()) throw NumericalError(f);
  }

  SweepResult result;
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> errs;
    for (std::size_t j = 0; j < nh; ++j) {
      const auto& cfg = configs[c];
      result.rows.push_back(
          {cfg.variant, h_grid[j], cfg.K, cfg.K_prime, cfg.gamma, cell[c * nh + j]});
      errs.push_back(cell[c * nh + j]);
    }
    if (nh >= 2) result.fits.push_back({config_label(configs[c]), fit_power_law(h_grid, errs)});
  }
  return result;
}

BudgetAllocation budget_allocation(double t_bar, double r, double h, Variant variant,
                                   int min_level) {
  if (!(t_bar > 0.0)) throw ConfigError("t_bar must be positive");
  if (!(r > 0.0 && r <= 0.5)) throw ConfigError("r must lie in (0, 0.5]");
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  BudgetAllocation a;
  a.variant = variant;
  // The small epsilon keeps exact ratios such as 0.5 * 1 / 0.1 at 5.
  a.rounds = static_cast<int>(std::floor(r * h / t_bar + 1e-9));
  const int level = a.rounds - 1;
  switch (variant) {
    case Variant::RG:
      a.n_C = a.n_EC = a.rounds;
      a.feasible = a.rounds >= 1;
      break;
    case Variant::RN:
      a.n_C = a.n_EC = 1;
      a.K = a.K_prime = std::max(level, 0);
      a.feasible = level >= min_level;
      break;
    case Variant::DPC_G:
    case Variant::DAPC_G:
      a.n_C = a.rounds;
      a.K = std::max(level, 0);
      a.feasible = a.rounds >= 1 && level >= min_level;
      break;
    case Variant::DPC_N:
    case Variant::DAPC_N:
      a.n_C = 1;
      a.K = a.K_prime = std::max(level, 0);
      a.feasible = level >= min_level;
      break;
  }
  return a;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  out << "k,t,err,err_pred,rounds_cum,scalars_cum\n";
  for (const auto& r : record.rows) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{},{}\n", r.k, r.t, r.err, r.err_pred,
                       r.rounds_cum, r.scalars_cum);
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "variant,h,K,Kprime,gamma,asymptotic_err\n";
  for (const auto& r : result.rows) {
    out << fmt::format("{},{:.17g},{},{},{:.17g},{:.17g}\n", variant_name(r.variant), r.h, r.K,
                       r.K_prime, r.gamma, r.asymptotic_err);
  }
}

}  // namespace dpc
