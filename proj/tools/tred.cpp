// Command-line front end: one subcommand per experiment plus fit-slope.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tred/errors.hpp"
#include "tred/harness.hpp"
#include "tred/kernels.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBreakdown = 3;

struct Overrides {
  std::string config;
  std::vector<std::size_t> orders;
  std::optional<std::size_t> terms;
  std::optional<double> tmax;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string model;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--order", o.orders, "Approximation orders N (repeat or comma-separate)")
      ->delimiter(',');
  cmd->add_option("--terms", o.terms, "Series terms K");
  cmd->add_option("--tmax", o.tmax, "Final time");
  cmd->add_option("--steps", o.steps, "RK4 steps");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output directory");
}

int run_experiment(const std::string& name, const Overrides& o) {
  tred::ExperimentConfig cfg = o.config.empty() ? tred::default_config(name)
                                                : tred::load_config(o.config, name);
  if (!o.orders.empty()) cfg.orders = o.orders;
  if (o.terms) cfg.series_terms = *o.terms;
  if (o.tmax) cfg.t_max = *o.tmax;
  if (o.steps) cfg.steps = *o.steps;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.model.empty()) cfg.params["model"] = o.model;
  cfg.validate();

  const tred::RunResult result = tred::run(cfg);
  for (const auto& f : result.files) std::cout << f.string() << '\n';
  if (result.breakdown) {
    std::cerr << "tred: numerical breakdown recorded in manifest.json; partial results kept\n";
    return kExitBreakdown;
  }
  return kExitOk;
}

int run_fit(const std::string& csv, double t_lo, double t_hi) {
  std::cout << "series,slope,std_error,ci_low,ci_high,points,status\n";
  for (const auto& f : tred::fit_order_slope(csv, t_lo, t_hi)) {
    std::cout << f.series << ',' << tred::format_double(f.slope) << ','
              << tred::format_double(f.std_error) << ',' << tred::format_double(f.ci_low) << ','
              << tred::format_double(f.ci_high) << ',' << f.points << ','
              << (f.fitted ? "ok" : "skipped: " + f.reason) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("TRED_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) tred::kernels::set_thread_cap(cap);
  }

  CLI::App app{"Polynomial time-dependent reduced generators"};
  app.require_subcommand(1);

  Overrides o;
  std::string chosen;
  for (const std::string& name : tred::experiment_names()) {
    CLI::App* cmd = app.add_subcommand(name, "Run the " + name + " experiment");
    add_run_flags(cmd, o);
    if (name == "reduce") cmd->add_option("--model", o.model, "Model JSON {n, m, L, R, J}");
    cmd->callback([&chosen, name] { chosen = name; });
  }

  std::string csv;
  double t_lo = 2e-3, t_hi = 0.2;
  CLI::App* fit = app.add_subcommand("fit-slope", "Fit log-log error slopes of a CSV");
  fit->add_option("csv", csv, "error CSV (first column t)")->required();
  fit->add_option("--tmin", t_lo, "Window start");
  fit->add_option("--tmax", t_hi, "Window end");
  fit->callback([&chosen] { chosen = "fit-slope"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (chosen == "fit-slope") return run_fit(csv, t_lo, t_hi);
    return run_experiment(chosen, o);
  } catch (const tred::ConfigError& e) {
    std::cerr << "tred: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tred::NumericalBreakdown& e) {
    std::cerr << "tred: numerical breakdown at t = " << e.time() << ": " << e.what() << '\n';
    return kExitBreakdown;
  } catch (const std::invalid_argument& e) {
    std::cerr << "tred: invalid input: " << e.what() << '\n';
    return kExitConfig;
  }
}
