#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dpc/bench.hpp"

namespace dpc {

using CommFunction = std::function<CommRequirement(Variant, int, int, int, int, int)>;

/// Components under test; the defaults are the library implementations.
/// Tests swap in deliberately broken versions to check that a suite notices.
struct VerifyComponents {
  TruncatedSolver solver = [](const SplitHessian& s, const BlockVector& v, int K) {
    return truncated_solve(s, v, K);
  };
  CommFunction comm = comm_requirements;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Dense sum_{tau<=K} (D^{-1}B)^tau D^{-1}.
Mat dense_truncated_inverse(const SplitHessian& split, int K);

SuiteResult verify_derivatives(const Objective& objective, std::uint64_t seed);
SuiteResult verify_splitting(const Objective& objective, const BlockVector& y, double t);
SuiteResult verify_truncation_equivalence(const Objective& objective, const BlockVector& y,
                                          double t, const TruncatedSolver& solver);
SuiteResult verify_truncation_error(const Objective& objective, const BlockVector& y, double t,
                                    const ConstantsBundle& constants);
SuiteResult verify_prediction(const Problem& problem);
SuiteResult verify_equivalence(const Problem& problem, int steps);
SuiteResult verify_accounting(const Problem& problem, const CommFunction& comm);
SuiteResult verify_locality(const Problem& problem);

/// All suites at desk scale on the benchmark drawn from `seed`.
std::vector<SuiteResult> run_verification(const VerifyComponents& components, std::uint64_t seed);

}  // namespace dpc
