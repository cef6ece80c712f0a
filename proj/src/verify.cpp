#include "dpc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "dpc/rng.hpp"

namespace dpc {

namespace {

constexpr double kGradStep = 1e-5;
constexpr double kHessStep = 1e-4;

BlockVector random_point(const Objective& objective, Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  BlockVector y(objective.n(), objective.p());
  for (Eigen::Index k = 0; k < y.dimension(); ++k) y.stacked()(k) = u(rng);
  return y;
}

BlockVector unit_direction(const Objective& objective, Rng& rng) {
  std::normal_distribution<double> g;
  BlockVector u(objective.n(), objective.p());
  for (Eigen::Index k = 0; k < u.dimension(); ++k) u.stacked()(k) = g(rng);
  u *= 1.0 / u.norm();
  return u;
}

double relative(double err, double scale) { return err / std::max(1.0, scale); }

}  // namespace

Mat dense_truncated_inverse(const SplitHessian& split, int K) {
  const Mat D = split.dense_d();
  const Mat B = split.dense_b();
  const Mat Dinv = D.llt().solve(Mat::Identity(D.rows(), D.cols()));
  const Mat step = Dinv * B;
  Mat term = Dinv;
  Mat sum = Dinv;
  for (int tau = 1; tau <= K; ++tau) {
    term = step * term;
    sum += term;
  }
  return sum;
}

SuiteResult verify_derivatives(const Objective& objective, std::uint64_t seed) {
  SuiteResult r{"derivatives", true, ""};
  Rng rng(seed);
  std::uniform_real_distribution<double> tdist(0.0, 100.0);
  double worst_grad = 0, worst_hess = 0, worst_time = 0, worst_sym = 0;
  for (int probe = 0; probe < 10; ++probe) {
    const BlockVector y = random_point(objective, rng, 5.0);
    const double t = tdist(rng);
    const BlockVector g = objective.gradient(y, t);
    const Mat hess = objective.dense_hessian(y, t);
    worst_sym = std::max(worst_sym, relative((hess - hess.transpose()).norm(), hess.norm()));
    Vec fd_grad(y.dimension());
    for (Eigen::Index k = 0; k < y.dimension(); ++k) {
      BlockVector yp = y, ym = y;
      yp.stacked()(k) += kGradStep;
      ym.stacked()(k) -= kGradStep;
      fd_grad(k) = (objective.value(yp, t) - objective.value(ym, t)) / (2 * kGradStep);
    }
    worst_grad = std::max(worst_grad, relative((fd_grad - g.stacked()).norm(), g.norm()));

    const BlockVector u = unit_direction(objective, rng);
    const Vec hv = hess * u.stacked();
    const Vec fd_hv = (objective.gradient(y + kHessStep * u, t).stacked() -
                       objective.gradient(y - kHessStep * u, t).stacked()) /
                      (2 * kHessStep);
    worst_hess = std::max(worst_hess, relative((fd_hv - hv).norm(), hv.norm()));

    const BlockVector tg = objective.time_gradient(y, t);
    const Vec fd_t = (objective.gradient(y, t + kGradStep).stacked() -
                      objective.gradient(y, t - kGradStep).stacked()) /
                     (2 * kGradStep);
    worst_time = std::max(worst_time, relative((fd_t - tg.stacked()).norm(), tg.norm()));
  }
  r.passed = worst_grad <= 1e-6 && worst_hess <= 1e-5 && worst_time <= 1e-6 && worst_sym <= 1e-10;
  r.detail = fmt::format("grad={:.3e} hessvec={:.3e} time={:.3e} asym={:.3e}", worst_grad,
                         worst_hess, worst_time, worst_sym);
  return r;
}

SuiteResult verify_splitting(const Objective& objective, const BlockVector& y, double t) {
  SuiteResult r{"splitting", true, ""};
  const SplitHessian split = assemble_split(objective, y, t);
  const Mat hess = objective.dense_hessian(y, t);
  const double recon = (split.dense_d() - split.dense_b() - hess).cwiseAbs().maxCoeff();
  const Mat B = split.dense_b();
  const double bsym = (B - B.transpose()).cwiseAbs().maxCoeff();
  const double contraction = splitting_contraction(split);
  r.passed = recon <= 1e-12 && bsym <= 1e-12 && contraction < 1.0;
  r.detail = fmt::format("D-B residual={:.3e} B asym={:.3e} contraction={:.6f}", recon, bsym,
                         contraction);
  return r;
}

SuiteResult verify_truncation_equivalence(const Objective& objective, const BlockVector& y,
                                          double t, const TruncatedSolver& solver) {
  SuiteResult r{"truncation-equivalence", true, ""};
  const SplitHessian split = assemble_split(objective, y, t);
  Rng rng(0xabc);
  double worst = 0.0;
  for (int K = 0; K <= 8; ++K) {
    const BlockVector v = unit_direction(objective, rng);
    const BlockVector x = solver(split, v, K);
    const Vec dense = dense_truncated_inverse(split, K) * v.stacked();
    worst = std::max(worst, (x.stacked() - dense).norm() / std::max(1e-300, dense.norm()));
  }
  r.passed = worst <= 1e-10;
  r.detail = fmt::format("max relative deviation from dense series={:.3e}", worst);
  return r;
}

SuiteResult verify_truncation_error(const Objective& objective, const BlockVector& y, double t,
                                    const ConstantsBundle& constants) {
  // The residual I - (D-B) H_K equals D^{1/2} X^{K+1} D^{-1/2}; its D-weighted
  // norm is exactly ||X||^{K+1}.
  SuiteResult r{"truncation-error", true, ""};
  const SplitHessian split = assemble_split(objective, y, t);
  const Mat D = split.dense_d();
  Eigen::SelfAdjointEigenSolver<Mat> eig(D);
  const Mat root = eig.operatorSqrt();
  const Mat inv_root = eig.operatorInverseSqrt();
  const Mat X = inv_root * split.dense_b() * inv_root;
  const double x_norm = Eigen::SelfAdjointEigenSolver<Mat>(X).eigenvalues().cwiseAbs().maxCoeff();
  const Mat hess = D - split.dense_b();
  const Mat I = Mat::Identity(D.rows(), D.cols());
  const double H = compute_constants(constants, 1.0, 0, 0, 1.0).H;
  double worst_ratio = 0.0;
  double worst_h = 0.0;
  for (int K = 0; K <= 8; ++K) {
    const Mat HK = dense_truncated_inverse(split, K);
    const Mat residual = inv_root * (I - hess * HK) * root;
    const double e = residual.operatorNorm();
    worst_ratio = std::max(worst_ratio, e - std::pow(x_norm, K + 1));
    worst_h = std::max(worst_h, HK.operatorNorm() - H);
  }
  r.passed = worst_ratio <= 1e-9 && worst_h <= 1e-9;
  r.detail = fmt::format("max(e_D - |X|^(K+1))={:.3e} max(|H_K| - H)={:.3e} |X|={:.6f}",
                         worst_ratio, worst_h, x_norm);
  return r;
}

SuiteResult verify_prediction(const Problem& problem) {
  SuiteResult r{"prediction", true, ""};
  const Objective& obj = *problem.objective;
  const BoundReport report = compute_constants(problem.constants, 1.0, 0, 0, 1.0);
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  std::vector<double> worst;
  bool bounded = true;
  for (double h : hs) {
    const int steps = 40;
    const auto times = sample_times(0.0, h, steps);
    const auto ref = optimal_trajectory(obj, times, problem.y0);
    MethodConfig cfg;
    cfg.variant = Variant::DPC_G;
    cfg.h = h;
    cfg.K = 80;
    double w = 0.0;
    for (int k = 0; k < steps; ++k) {
      MethodState s = initial_state(ref[k], times[k]);
      const BlockVector pred = predict(s, obj, cfg, TimeDerivativeMode::exact);
      w = std::max(w, (pred - ref[k + 1]).norm());
    }
    worst.push_back(w);
    bounded = bounded && w <= report.Delta * h * h;
  }
  const double slope = fit_power_law(hs, worst).slope;
  r.passed = bounded && slope >= 1.7 && slope <= 2.3;
  r.detail = fmt::format("max err at h=0.2: {:.3e} (Delta h^2 = {:.3e}), slope={:.3f}", worst[0],
                         report.Delta * 0.04, slope);
  return r;
}

SuiteResult verify_equivalence(const Problem& problem, int steps) {
  SuiteResult r{"decentralized-equivalence", true, ""};
  const Objective& obj = *problem.objective;
  double worst = 0.0;
  for (Variant v : {Variant::DPC_G, Variant::DAPC_G, Variant::DPC_N, Variant::DAPC_N, Variant::RG,
                    Variant::RN}) {
    MethodConfig cfg;
    cfg.variant = v;
    cfg.h = 0.1;
    cfg.K = 3;
    cfg.K_prime = 3;
    cfg.gamma = is_newton(v) ? 1.0 : 1.0 / (problem.constants.L + problem.constants.M);
    if (is_running(v)) cfg.n_EC = 1;
    const NetworkRun net = run_decentralized(cfg, obj, problem.y0, steps);
    MethodState state = initial_state(problem.y0);
    for (int k = 1; k <= steps; ++k) {
      StepResult s = step(state, obj, cfg);
      worst = std::max(worst, (s.output.stacked() - net.outputs[k].stacked()).cwiseAbs().maxCoeff());
      worst = std::max(worst,
                       (s.predicted.stacked() - net.predicted[k].stacked()).cwiseAbs().maxCoeff());
      state = std::move(s.state);
    }
  }
  r.passed = worst <= 1e-12;
  r.detail = fmt::format("max coordinate deviation over {} steps: {:.3e}", steps, worst);
  return r;
}

SuiteResult verify_accounting(const Problem& problem, const CommFunction& comm) {
  SuiteResult r{"accounting", true, ""};
  const Objective& obj = *problem.objective;
  const int steps = 4;
  int mismatches = 0;
  int cases = 0;
  for (Variant v : {Variant::DPC_G, Variant::DAPC_G, Variant::DPC_N, Variant::DAPC_N}) {
    for (auto [K, Kp] : {std::pair{0, 0}, std::pair{2, 1}, std::pair{5, 3}}) {
      MethodConfig cfg;
      cfg.variant = v;
      cfg.h = 0.1;
      cfg.K = K;
      cfg.K_prime = Kp;
      cfg.gamma = is_newton(v) ? 1.0 : 0.1;
      const NetworkRun run = run_decentralized(cfg, obj, problem.y0, steps);
      const CommRequirement expect = comm(v, K, Kp, obj.p(), cfg.n_C, cfg.n_EC);
      ++cases;
      bool ok = true;
      for (int k = 0; k < steps; ++k) {
        ok = ok && run.ledger.rounds_prediction[k] == expect.prediction_rounds &&
             run.ledger.rounds_correction[k] == expect.correction_rounds;
      }
      for (const auto& [link, count] : run.ledger.scalars_per_link) {
        ok = ok && count == expect.scalars_per_neighbor * steps;
      }
      if (!ok) ++mismatches;
    }
  }
  r.passed = mismatches == 0;
  r.detail = fmt::format("{} of {} (variant, K, K') combinations disagree with the ledger",
                         mismatches, cases);
  return r;
}

SuiteResult verify_locality(const Problem& problem) {
  SuiteResult r{"locality", true, ""};
  const Objective& obj = *problem.objective;
  const NetworkGraph& graph = obj.graph();
  for (int K : {2, 1}) {
    int far_i = -1, far_j = -1;
    for (int i = 0; i < graph.n() && far_i < 0; ++i) {
      const auto dist = graph.distances_from(i);
      for (int j = 0; j < graph.n(); ++j) {
        if (dist[j] > K + 1) {
          far_i = i;
          far_j = j;
          break;
        }
      }
    }
    if (far_i < 0) continue;
    MethodConfig cfg;
    cfg.variant = Variant::DPC_G;
    cfg.h = 0.1;
    cfg.K = K;
    cfg.gamma = 0.1;
    const BlockVector y0 = BlockVector::constant(obj.n(), obj.p(), 0.5);
    const NetworkRun base = run_decentralized(cfg, obj, y0, 1);
    auto perturbed_run = [&](int source) {
      NetworkOptions opt;
      opt.hook = [source](int step, int, int from, int, Vec& payload) {
        if (step == 0 && from == source) payload.array() += 1.0;
      };
      return run_decentralized(cfg, obj, y0, 1, opt);
    };
    const NetworkRun far = perturbed_run(far_j);
    const int near_j = graph.neighbors(far_i).front();
    const NetworkRun near = perturbed_run(near_j);
    const bool far_unchanged = far.predicted[1].block(far_i) == base.predicted[1].block(far_i);
    const bool near_changed = near.predicted[1].block(far_i) != base.predicted[1].block(far_i);
    r.passed = far_unchanged && near_changed;
    r.detail = fmt::format("K={} node {}: far source {} unchanged={}, neighbor {} changed={}", K,
                           far_i, far_j, far_unchanged, near_j, near_changed);
    return r;
  }
  r.passed = false;
  r.detail = "graph diameter too small for a locality probe";
  return r;
}

std::vector<SuiteResult> run_verification(const VerifyComponents& components, std::uint64_t seed) {
  const Problem problem = paper_benchmark(seed);
  const Objective& obj = *problem.objective;
  Rng rng = named_stream(seed, "verify");
  const BlockVector y = random_point(obj, rng, 5.0);
  const double t = 3.7;

  std::vector<SuiteResult> out;
  auto guarded = [&out](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };
  guarded("derivatives", [&] { return verify_derivatives(obj, seed); });
  guarded("splitting", [&] { return verify_splitting(obj, y, t); });
  guarded("truncation-equivalence",
          [&] { return verify_truncation_equivalence(obj, y, t, components.solver); });
  guarded("truncation-error",
          [&] { return verify_truncation_error(obj, y, t, problem.constants); });
  guarded("prediction", [&] { return verify_prediction(problem); });
  guarded("decentralized-equivalence", [&] { return verify_equivalence(problem, 100); });
  guarded("accounting", [&] { return verify_accounting(problem, components.comm); });
  guarded("locality", [&] { return verify_locality(problem); });
  return out;
}

}  // namespace dpc
