#include "dpc/netsim.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "dpc/rng.hpp"

namespace dpc {

CommRequirement comm_requirements(Variant variant, int K, int K_prime, int p, int n_C, int n_EC) {
  if (K < 0 || K_prime < 0 || p < 1 || n_C < 1 || n_EC < 0) {
    throw ConfigError("invalid communication parameters");
  }
  CommRequirement r;
  switch (variant) {
    case Variant::DPC_G:
    case Variant::DAPC_G:
      r.prediction_rounds = K + 1;
      r.correction_rounds = n_C;
      break;
    case Variant::DPC_N:
    case Variant::DAPC_N:
      r.prediction_rounds = K + 1;
      r.correction_rounds = n_C * (K_prime + 1);
      break;
    case Variant::RG:
      r.correction_rounds = n_C + n_EC;
      break;
    case Variant::RN:
      r.correction_rounds = n_C * (K_prime + 1) + n_EC * (K + 1);
      break;
  }
  r.scalars_per_neighbor = static_cast<long long>(p) * r.rounds();
  return r;
}

long long CommLedger::total_rounds() const {
  long long total = 0;
  for (int r : rounds_prediction) total += r;
  for (int r : rounds_correction) total += r;
  return total;
}

long long CommLedger::scalars_per_neighbor() const {
  return scalars_per_link.empty() ? 0 : scalars_per_link.begin()->second;
}

namespace {

/// Node-local D^{ii} factor and B^{ij} blocks, built from the node's view.
struct LocalSplit {
  Eigen::LLT<Mat> llt;
  std::vector<Mat> b;
};

class Network {
 public:
  Network(const Objective& objective, const NetworkOptions& options, CommLedger& ledger)
      : objective_(objective), graph_(objective.graph()), options_(options), ledger_(ledger) {
    if (options_.delivery_shuffle_seed) rng_.seed(*options_.delivery_shuffle_seed);
  }

  void begin_step(int step) {
    step_ = step;
    round_ = 0;
  }

  /// One synchronous round: every node sends its payload to all neighbors.
  /// Returns each node's view: own block, neighbor blocks, NaN elsewhere.
  std::vector<BlockVector> exchange(const std::vector<Vec>& payload) {
    const int n = graph_.n();
    const int p = graph_.p();
    struct Message {
      int from;
      int to;
      Vec data;
    };
    std::vector<Message> outbox;
    for (int from = 0; from < n; ++from) {
      for (int to : graph_.neighbors(from)) outbox.push_back({from, to, payload[from]});
    }
    if (options_.delivery_shuffle_seed) std::shuffle(outbox.begin(), outbox.end(), rng_);

    std::vector<std::map<int, Vec>> inbox(n);
    for (auto& msg : outbox) {
      if (options_.hook) options_.hook(step_, round_, msg.from, msg.to, msg.data);
      if (options_.trace) {
        *options_.trace << fmt::format("{} {} {} {} {:.17g}\n", step_, round_, msg.from, msg.to,
                                       msg.data.norm());
      }
      ledger_.scalars_per_link[{msg.from, msg.to}] += p;
      inbox[msg.to][msg.from] = std::move(msg.data);
    }

    std::vector<BlockVector> views;
    views.reserve(n);
    for (int i = 0; i < n; ++i) {
      BlockVector view = BlockVector::constant(n, p, std::numeric_limits<double>::quiet_NaN());
      view.block(i) = payload[i];
      for (const auto& [from, data] : inbox[i]) view.block(from) = data;
      views.push_back(std::move(view));
    }
    ++round_;
    return views;
  }

  LocalSplit local_split(int i, const BlockVector& view, double t) const {
    LocalSplit s;
    s.llt.compute(objective_.diagonal_block(i, view, t));
    if (s.llt.info() != Eigen::Success) {
      throw SplitError("D block " + std::to_string(i) + " is not positive definite");
    }
    for (const auto& slot : graph_.incidence(i)) {
      s.b.push_back(-objective_.cross_block(i, slot, view, t));
    }
    return s;
  }

  /// K sweeps of x_{tau+1} = D^{-1}(B x_tau + v), starting at x_0 = D^{-1} v.
  std::vector<Vec> truncated(const std::vector<LocalSplit>& splits, const std::vector<Vec>& v,
                             int K) {
    const int n = graph_.n();
    std::vector<Vec> x(n);
    for (int i = 0; i < n; ++i) x[i] = splits[i].llt.solve(v[i]);
    for (int tau = 0; tau < K; ++tau) {
      const auto views = exchange(x);
      std::vector<Vec> next(n);
      for (int i = 0; i < n; ++i) {
        Vec acc = v[i];
        const auto& inc = graph_.incidence(i);
        for (std::size_t s = 0; s < inc.size(); ++s) {
          acc.noalias() += splits[i].b[s] * views[i].block(inc[s].neighbor);
        }
        next[i] = splits[i].llt.solve(acc);
      }
      x = std::move(next);
    }
    return x;
  }

  int round() const { return round_; }

 private:
  const Objective& objective_;
  const NetworkGraph& graph_;
  const NetworkOptions& options_;
  CommLedger& ledger_;
  Rng rng_;
  int step_ = 0;
  int round_ = 0;
};

std::vector<Vec> split_blocks(const BlockVector& y) {
  std::vector<Vec> out(y.n());
  for (int i = 0; i < y.n(); ++i) out[i] = y.block(i);
  return out;
}

BlockVector stack_blocks(const std::vector<Vec>& blocks, int p) {
  BlockVector y(static_cast<int>(blocks.size()), p);
  for (std::size_t i = 0; i < blocks.size(); ++i) y.block(static_cast<int>(i)) = blocks[i];
  return y;
}

}  // namespace

NetworkRun run_decentralized(const MethodConfig& config, const Objective& objective,
                             const BlockVector& y0, int steps, const NetworkOptions& options) {
  config.validate();
  objective.check_conforms(y0);
  if (steps < 0) throw ConfigError("steps must be nonnegative");

  const int n = objective.n();
  const int p = objective.p();
  const Variant v = config.variant;
  const bool backward = uses_backward_difference(v);

  NetworkRun run;
  Network net(objective, options, run.ledger);
  std::vector<Vec> y = split_blocks(y0);
  double t = options.t0;
  double t_prev = t;

  run.outputs.push_back(y0);
  run.predicted.push_back(y0);
  run.times.push_back(t);

  auto correction = [&](std::vector<Vec> current, double t_next, double gamma, int level) {
    const auto views = net.exchange(current);
    std::vector<Vec> g(n);
    for (int i = 0; i < n; ++i) g[i] = objective.local_gradient(i, views[i], t_next);
    if (!is_newton(v)) {
      for (int i = 0; i < n; ++i) current[i] = current[i] - gamma * g[i];
      return current;
    }
    std::vector<LocalSplit> splits;
    splits.reserve(n);
    for (int i = 0; i < n; ++i) splits.push_back(net.local_split(i, views[i], t_next));
    const auto x = net.truncated(splits, g, level);
    for (int i = 0; i < n; ++i) current[i] = current[i] - gamma * x[i];
    return current;
  };

  for (int k = 0; k < steps; ++k) {
    net.begin_step(k);
    const double t_next = t + config.h;

    std::vector<Vec> predicted = y;
    if (has_prediction(v)) {
      const auto views = net.exchange(y);
      std::vector<Vec> rhs(n);
      std::vector<LocalSplit> splits;
      splits.reserve(n);
      for (int i = 0; i < n; ++i) {
        if (backward) {
          if (k >= 1) {
            // Both gradients at y_k; the older one uses the retained sample t_{k-1}.
            const Vec previous = objective.local_gradient(i, views[i], t_prev);
            const Vec current = objective.local_gradient(i, views[i], t);
            rhs[i] = -((1.0 / config.h) * (current - previous));
          } else {
            rhs[i] = Vec::Zero(p);
          }
        } else {
          rhs[i] = -objective.local_time_gradient(i, views[i], t);
        }
        splits.push_back(net.local_split(i, views[i], t));
      }
      const auto x = net.truncated(splits, rhs, config.K);
      if (!backward || k >= 1) {
        for (int i = 0; i < n; ++i) predicted[i] = y[i] + config.h * x[i];
      }
    }
    const int prediction_rounds = net.round();

    const double gamma = config.gamma_at(k + 1);
    std::vector<Vec> current = predicted;
    for (int c = 0; c < config.n_C; ++c) current = correction(current, t_next, gamma, config.K_prime);
    const std::vector<Vec> output = current;
    for (int c = 0; c < config.n_EC; ++c) current = correction(current, t_next, gamma, config.K);

    run.ledger.rounds_prediction.push_back(prediction_rounds);
    run.ledger.rounds_correction.push_back(net.round() - prediction_rounds);

    y = std::move(current);
    t_prev = t;
    t = t_next;
    run.outputs.push_back(stack_blocks(output, p));
    run.predicted.push_back(stack_blocks(predicted, p));
    run.times.push_back(t);
  }
  return run;
}

}  // namespace dpc
