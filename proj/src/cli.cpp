#include "dpc/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <CLI11.hpp>
#include <json.hpp>

#include "dpc/verify.hpp"

namespace dpc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("'{}' must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}{}'", where, key));
  }
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("bad value for '{}{}'", where, key));
  }
}

Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw ConfigError(fmt::format("unknown scale '{}'", s));
}

Engine parse_engine(const std::string& s) {
  if (s == "direct") return Engine::direct;
  if (s == "network") return Engine::network;
  throw ConfigError(fmt::format("unknown engine '{}'", s));
}

Variant variant_from(const std::string& s) {
  try {
    return parse_variant(s);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("unknown variant '{}'", s));
  }
}

MethodSpec read_method(const json& obj, const std::string& where, MethodSpec spec) {
  check_keys(obj, where,
             {"variant", "h", "K", "Kprime", "gamma", "n_C", "n_EC", "gamma_schedule"});
  std::string name(variant_name(spec.variant));
  read(obj, "variant", name, where);
  spec.variant = variant_from(name);
  read(obj, "h", spec.h, where);
  read(obj, "K", spec.K, where);
  read(obj, "Kprime", spec.K_prime, where);
  read(obj, "n_C", spec.n_C, where);
  read(obj, "n_EC", spec.n_EC, where);
  if (obj.contains("gamma")) {
    const json& g = obj.at("gamma");
    if (g.is_string() && g.get<std::string>() == "auto") {
      spec.gamma.reset();
    } else if (g.is_number()) {
      spec.gamma = g.get<double>();
    } else {
      throw ConfigError(fmt::format("bad value for '{}gamma'", where));
    }
  }
  if (obj.contains("gamma_schedule")) {
    const json& s = obj.at("gamma_schedule");
    const std::string sw = where + "gamma_schedule.";
    check_keys(s, sw, {"type", "a"});
    std::string type = "harmonic";
    double a = 0.9;
    read(s, "type", type, sw);
    read(s, "a", a, sw);
    if (type == "constant") {
      spec.harmonic_a.reset();
    } else if (type == "harmonic") {
      spec.harmonic_a = a;
    } else {
      throw ConfigError(fmt::format("unknown gamma schedule '{}'", type));
    }
  }
  return spec;
}

std::vector<MethodSpec> default_sweep_methods() {
  MethodSpec rg;
  rg.variant = Variant::RG;
  rg.K = rg.K_prime = 0;
  MethodSpec dpcg;
  dpcg.variant = Variant::DPC_G;
  dpcg.K = 8;
  dpcg.K_prime = 0;
  MethodSpec dpcn;
  dpcn.variant = Variant::DPC_N;
  dpcn.K = dpcn.K_prime = 8;
  dpcn.gamma = 1.0;
  return {rg, dpcg, dpcn};
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    f << content;
    if (!f.flush()) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string method_block(const MethodConfig& c) {
  return fmt::format(
      "[method]\nvariant={}\nh={:.17g}\nK={}\nKprime={}\ngamma={:.17g}\nn_C={}\nn_EC={}\n"
      "gamma_schedule={}\n",
      variant_name(c.variant), c.h, c.K, c.K_prime, c.gamma, c.n_C, c.n_EC,
      c.gamma_schedule ? "harmonic" : "constant");
}

std::string problem_block(const CliConfig& cfg, const Problem& problem) {
  const ConstantsBundle& c = problem.constants;
  return fmt::format(
      "[problem]\nname={}\nseed={}\nn={}\np={}\nedges={}\nbeta={:.17g}\nomega={:.17g}\n"
      "amplitude={:.17g}\n[constants]\nm={:.17g}\nM={:.17g}\nell={:.17g}\nL={:.17g}\n"
      "C0={:.17g}\nC1={:.17g}\nC2={:.17g}\nC3={:.17g}\n",
      problem.name, cfg.seed, problem.graph->n(), problem.graph->p(),
      problem.graph->edge_count(), cfg.problem.beta, cfg.problem.omega, cfg.problem.amplitude,
      c.m, c.M, c.ell, c.L, c.C0, c.C1, c.C2, c.C3);
}

Problem build_problem(const CliConfig& cfg) { return paper_benchmark(cfg.seed, cfg.problem); }

int cmd_run(const CliConfig& cfg, std::ostream& out) {
  const Problem problem = build_problem(cfg);
  MethodConfig method = cfg.method.resolve(problem.constants);
  method.validate();
  if (cfg.steps < 1) throw ConfigError("run.steps must be at least 1");
  const auto reference = optimal_trajectory(*problem.objective,
                                            sample_times(0.0, method.h, cfg.steps), problem.y0);
  SimulationOptions opts;
  opts.engine = cfg.engine;
  const RunRecord record =
      simulate(*problem.objective, method, problem.y0, cfg.steps, reference, opts);
  const int k_bar = default_k_bar(cfg.steps);
  const double asym = asymptotic_error(record, k_bar);

  std::ostringstream csv;
  write_run_csv(csv, record);
  const fs::path dir(cfg.out_dir);
  write_atomic(dir / "run.csv", csv.str());

  const BoundReport bounds =
      compute_constants(problem.constants, method.h, method.K, method.K_prime, method.gamma);
  std::string summary = problem_block(cfg, problem) + method_block(method);
  summary += fmt::format("[run]\nsteps={}\nengine={}\nk_bar={}\nasymptotic_err={:.17g}\n"
                         "final_err={:.17g}\nrounds_total={}\nscalars_total={}\n",
                         cfg.steps, cfg.engine == Engine::network ? "network" : "direct", k_bar,
                         asym, record.rows.back().err, record.rows.back().rounds_cum,
                         record.rows.back().scalars_cum);
  summary += fmt::format("drift_bound={:.17g}\n", solution_drift_bound(problem.constants, method.h));
  summary += to_key_value(bounds);
  write_atomic(dir / "summary.txt", summary);
  out << fmt::format("run {} asymptotic_err={:.6e} -> {}\n", config_label(method), asym,
                     dir.string());
  return 0;
}

int cmd_sweep(const CliConfig& cfg, std::ostream& out) {
  const Problem problem = build_problem(cfg);
  std::vector<MethodConfig> configs;
  for (const MethodSpec& spec : cfg.sweep_methods) {
    MethodConfig c = spec.resolve(problem.constants);
    c.validate();
    configs.push_back(c);
  }
  if (cfg.sweep_h.empty()) throw ConfigError("sweep.h must not be empty");
  for (double h : cfg.sweep_h) {
    if (!(h > 0.0)) throw ConfigError("sweep.h entries must be positive");
  }
  const SweepResult result = sweep_h(problem, configs, cfg.sweep_h, cfg.steps_rule, cfg.jobs);

  std::ostringstream csv;
  write_sweep_csv(csv, result);
  const fs::path dir(cfg.out_dir);
  write_atomic(dir / "sweep.csv", csv.str());

  std::string summary = problem_block(cfg, problem);
  summary += fmt::format("[sweep]\nhorizon={:.17g}\nmin_steps={}\n", cfg.steps_rule.horizon,
                         cfg.steps_rule.min_steps);
  for (const SweepFit& f : result.fits) {
    summary += fmt::format("[fit]\nlabel={}\nslope={:.17g}\nintercept={:.17g}\n", f.label,
                           f.fit.slope, f.fit.intercept);
    out << fmt::format("slope {:.3f}  {}\n", f.fit.slope, f.label);
  }
  for (const MethodConfig& c : configs) {
    for (double h : cfg.sweep_h) {
      summary += fmt::format("[cell]\nlabel={}\n", config_label(c));
      summary += to_key_value(compute_constants(problem.constants, h, c.K, c.K_prime, c.gamma));
    }
  }
  write_atomic(dir / "sweep_summary.txt", summary);
  return 0;
}

int cmd_budget(const CliConfig& cfg, std::ostream& out) {
  std::string csv = "h,variant,rounds,n_C,n_EC,K,Kprime,feasible\n";
  for (double h : cfg.budget_h) {
    for (Variant v : {Variant::RG, Variant::RN, Variant::DPC_G, Variant::DPC_N, Variant::DAPC_G,
                      Variant::DAPC_N}) {
      const BudgetAllocation a = budget_allocation(cfg.t_bar, cfg.r, h, v, cfg.min_level);
      const std::string line =
          fmt::format("{:.17g},{},{},{},{},{},{},{}\n", h, variant_name(v), a.rounds, a.n_C,
                      a.n_EC, a.K, a.K_prime, a.feasible ? 1 : 0);
      csv += line;
      out << line;
    }
  }
  write_atomic(fs::path(cfg.out_dir) / "budget.csv", csv);
  return 0;
}

int cmd_bounds(const CliConfig& cfg, std::ostream& out) {
  const Problem problem = build_problem(cfg);
  const MethodConfig method = cfg.method.resolve(problem.constants);
  method.validate();
  const BoundReport bounds =
      compute_constants(problem.constants, method.h, method.K, method.K_prime, method.gamma);
  const std::string text = problem_block(cfg, problem) + method_block(method) +
                           fmt::format("drift_bound={:.17g}\n",
                                       solution_drift_bound(problem.constants, method.h)) +
                           to_key_value(bounds);
  write_atomic(fs::path(cfg.out_dir) / "bounds.txt", text);
  out << text;
  return 0;
}

int cmd_verify(const CliConfig& cfg, std::ostream& out) {
  const auto results = run_verification(VerifyComponents{}, cfg.seed);
  std::string text;
  std::vector<std::string> failed;
  for (const SuiteResult& r : results) {
    text += fmt::format("{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    if (!r.passed) failed.push_back(r.name);
  }
  out << text;
  write_atomic(fs::path(cfg.out_dir) / "verify.txt", text);
  if (!failed.empty()) {
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : ",") + f;
    throw VerificationFailure(fmt::format("failed suites: {}", names));
  }
  return 0;
}

std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += (c == '\n') ? ' ' : c;
  }
  return q + "\"";
}

int report(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << fmt::format("error code={} kind={} message={}\n", code, kind, quoted(message));
  return code;
}

}  // namespace

MethodConfig MethodSpec::resolve(const ConstantsBundle& constants) const {
  MethodConfig c;
  c.variant = variant;
  c.h = h;
  c.K = K;
  c.K_prime = K_prime;
  c.n_C = n_C;
  c.n_EC = n_EC;
  c.gamma = gamma ? *gamma : (is_newton(variant) ? 1.0 : 1.0 / (constants.L + constants.M));
  if (harmonic_a) c.gamma_schedule = harmonic_schedule(*harmonic_a);
  return c;
}

void apply_config_json(const std::string& text, CliConfig& config, bool scale_fixed) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  check_keys(doc, "", {"seed", "scale", "problem", "method", "run", "sweep", "budget"});
  read(doc, "seed", config.seed, "");
  if (!scale_fixed && doc.contains("scale")) {
    std::string s;
    read(doc, "scale", s, "");
    config.scale = parse_scale(s);
  }
  config.problem = BenchmarkSpec::for_scale(config.scale);
  if (doc.contains("problem")) {
    const json& p = doc.at("problem");
    check_keys(p, "problem.", {"n", "p", "beta", "omega", "amplitude", "range"});
    read(p, "n", config.problem.n, "problem.");
    read(p, "p", config.problem.p, "problem.");
    read(p, "beta", config.problem.beta, "problem.");
    read(p, "omega", config.problem.omega, "problem.");
    read(p, "amplitude", config.problem.amplitude, "problem.");
    read(p, "range", config.problem.range, "problem.");
  }
  if (doc.contains("method")) config.method = read_method(doc.at("method"), "method.", config.method);
  if (doc.contains("run")) {
    const json& r = doc.at("run");
    check_keys(r, "run.", {"steps", "engine"});
    read(r, "steps", config.steps, "run.");
    std::string engine = config.engine == Engine::network ? "network" : "direct";
    read(r, "engine", engine, "run.");
    config.engine = parse_engine(engine);
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    check_keys(s, "sweep.", {"h", "methods", "horizon", "min_steps"});
    read(s, "h", config.sweep_h, "sweep.");
    read(s, "horizon", config.steps_rule.horizon, "sweep.");
    read(s, "min_steps", config.steps_rule.min_steps, "sweep.");
    if (s.contains("methods")) {
      const json& list = s.at("methods");
      if (!list.is_array()) throw ConfigError("'sweep.methods' must be a list");
      config.sweep_methods.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        config.sweep_methods.push_back(
            read_method(list[i], fmt::format("sweep.methods[{}].", i), MethodSpec{}));
      }
    }
  }
  if (doc.contains("budget")) {
    const json& b = doc.at("budget");
    check_keys(b, "budget.", {"t_bar", "r", "h", "min_level"});
    read(b, "t_bar", config.t_bar, "budget.");
    read(b, "r", config.r, "budget.");
    read(b, "h", config.budget_h, "budget.");
    read(b, "min_level", config.min_level, "budget.");
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized prediction-correction tracking"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  int jobs = 1;
  for (const char* name : {"run", "sweep", "budget", "verify", "bounds"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory (default $DPC_OUT_DIR or ./out)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--scale", scale, "desk or paper");
    sub->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return report(err, 2, "config", e.what());
  }

  CliConfig cfg;
  try {
    const std::string which = app.get_subcommands().front()->get_name();
    cfg.subcommand = which == "run"      ? Subcommand::run
                     : which == "sweep"  ? Subcommand::sweep
                     : which == "budget" ? Subcommand::budget
                     : which == "verify" ? Subcommand::verify
                                         : Subcommand::bounds;
    if (scale) cfg.scale = parse_scale(*scale);
    cfg.problem = BenchmarkSpec::for_scale(cfg.scale);
    cfg.sweep_methods = default_sweep_methods();
    if (!config_path.empty()) {
      cfg.config_path = config_path;
      apply_config_json(read_file(config_path), cfg, scale.has_value());
    }
    if (const char* env = std::getenv("DPC_OUT_DIR"); env && *env) cfg.out_dir = env;
    if (out_dir) cfg.out_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    cfg.jobs = jobs;

    switch (cfg.subcommand) {
      case Subcommand::run: return cmd_run(cfg, out);
      case Subcommand::sweep: return cmd_sweep(cfg, out);
      case Subcommand::budget: return cmd_budget(cfg, out);
      case Subcommand::verify: return cmd_verify(cfg, out);
      case Subcommand::bounds: return cmd_bounds(cfg, out);
    }
  } catch (const VerificationFailure& e) {
    return report(err, 4, "verification", e.what());
  } catch (const ConfigError& e) {
    return report(err, 2, "config", e.what());
  } catch (const BoundsError& e) {
    return report(err, 2, "config", e.what());
  } catch (const GraphError& e) {
    return report(err, 2, "config", e.what());
  } catch (const NumericalError& e) {
    return report(err, 3, "numerical", e.what());
  } catch (const SplitError& e) {
    return report(err, 3, "numerical", e.what());
  } catch (const std::exception& e) {
    return report(err, 3, "internal", e.what());
  }
  return 0;
}

}  // namespace dpc
