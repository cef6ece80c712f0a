#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "dpc/algorithms.hpp"

namespace dpc {

/// Per-step communication counts of one node for a variant.
struct CommRequirement {
  int prediction_rounds = 0;
  int correction_rounds = 0;
  /// Scalars a node sends to each neighbor in one step.
  long long scalars_per_neighbor = 0;

  int rounds() const { return prediction_rounds + correction_rounds; }
  bool operator==(const CommRequirement&) const = default;
};

/// Closed-form accounting. With n_C = 1, n_EC = 0:
///   DPC-G, DAPC-G: (K+1, 1, (K+1)p + p)
///   DPC-N, DAPC-N: (K+1, K'+1, (K+1)p + (K'+1)p)
/// Running baselines: RG (0, n_C + n_EC), RN (0, n_C(K'+1) + n_EC(K+1)).
CommRequirement comm_requirements(Variant variant, int K, int K_prime, int p, int n_C = 1,
                                  int n_EC = 0);

struct CommLedger {
  std::vector<int> rounds_prediction;
  std::vector<int> rounds_correction;
  /// Cumulative scalars sent over each directed link (from, to).
  std::map<std::pair<int, int>, long long> scalars_per_link;

  long long total_rounds() const;
  /// Cumulative scalars on one directed link; every link carries the same count.
  long long scalars_per_neighbor() const;
};

/// Called for every message before delivery; may modify the payload.
using MessageHook = std::function<void(int step, int round, int from, int to, Vec& payload)>;

struct NetworkOptions {
  MessageHook hook;
  /// One line per message: "step round from to payload_norm".
  std::ostream* trace = nullptr;
  /// Deliver the messages of each round in a shuffled order.
  std::optional<std::uint64_t> delivery_shuffle_seed;
  double t0 = 0.0;
};

struct NetworkRun {
  /// Entry k is y_k (entry 0 is y0); the iterate after the n_C corrections.
  std::vector<BlockVector> outputs;
  /// Entry k >= 1 is y_{k|k-1}; entry 0 is y0.
  std::vector<BlockVector> predicted;
  std::vector<double> times;
  CommLedger ledger;
};

/// Synchronous message-passing execution. Each node keeps only its own block
/// and sees its neighbors' blocks through delivered messages; everything
/// else in its view is NaN, so any non-local read poisons the result.
NetworkRun run_decentralized(const MethodConfig& config, const Objective& objective,
                             const BlockVector& y0, int steps, const NetworkOptions& options = {});

}  // namespace dpc
