#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpc/bench.hpp"

namespace dpc {

enum class Subcommand { run, sweep, budget, verify, bounds };

/// Method settings as read from a config; "gamma" may be "auto", which selects
/// 1/(L+M) for gradient corrections and 1 for Newton corrections.
struct MethodSpec {
  Variant variant = Variant::DPC_G;
  double h = 0.1;
  int K = 3;
  int K_prime = 3;
  std::optional<double> gamma;
  int n_C = 1;
  int n_EC = 0;
  std::optional<double> harmonic_a;

  MethodConfig resolve(const ConstantsBundle& constants) const;
};

struct CliConfig {
  Subcommand subcommand = Subcommand::run;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  Scale scale = Scale::desk;
  int jobs = 1;

  BenchmarkSpec problem;
  MethodSpec method;

  int steps = 500;
  Engine engine = Engine::direct;

  std::vector<double> sweep_h{0.2, 0.1, 0.05, 0.02};
  std::vector<MethodSpec> sweep_methods;
  StepsRule steps_rule;

  double t_bar = 0.1;
  double r = 0.5;
  std::vector<double> budget_h{1.0, 0.5, 0.2};
  int min_level = 1;
};

/// Applies a JSON config document to `config`. Unknown keys and ill-typed
/// values raise ConfigError. With `scale_fixed` the file's "scale" key is ignored.
void apply_config_json(const std::string& text, CliConfig& config, bool scale_fixed = false);

/// Full command line handling. Returns the process exit code: 0 success,
/// 2 config error, 3 numerical failure, 4 verification failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpc
