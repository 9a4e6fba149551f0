#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace tred {

/// One experiment run. `params` holds the experiment-specific record and is
/// validated key by key when the experiment starts.
struct ExperimentConfig {
  std::string experiment;  // linear-testbed | spin-boson | central-spin | ising-chain | reduce
  std::vector<std::size_t> orders;
  std::size_t series_terms = 100;
  double t_max = 1.0;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

const std::vector<std::string>& experiment_names();

/// Default configuration of an experiment.
ExperimentConfig default_config(const std::string& experiment);

/// Overlays a JSON document on the defaults of its "experiment" (or of
/// `experiment` when the document does not name one). Unknown keys, wrong
/// types and inconsistent values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& experiment = "");
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& experiment = "");

struct RunResult {
  std::vector<std::filesystem::path> files;  // CSV/JSON outputs, manifest last
  nlohmann::json manifest;
  bool breakdown = false;  // some oracle or integration broke down; partial results kept
};

/// Runs the experiment, writes its outputs under `output_dir`, then the manifest.
RunResult run(const ExperimentConfig& config);

/// Shortest decimal that round-trips to the same double; "nan"/"inf"/"-inf"
/// for non-finite values.
std::string format_double(double x);

struct SlopeFit {
  std::string series;
  double slope = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // slope - 2 std_error
  double ci_high = 0.0;  // slope + 2 std_error
  std::size_t points = 0;
  bool fitted = false;
  std::string reason;  // why the fit was skipped
};

/// Error values at or below this are treated as rounding noise (about 45 ulp
/// of an O(1) propagator).
inline constexpr double kErrorFloor = 1e-14;

/// Least-squares slope of log(err) against log(t) over t in [t_lo, t_hi],
/// using only points with err > kErrorFloor. Needs at least 5 such points.
SlopeFit fit_log_slope(std::span<const double> t, std::span<const double> err, double t_lo,
                       double t_hi);

/// Applies fit_log_slope to every column of `csv` whose name starts with "err".
std::vector<SlopeFit> fit_order_slope(const std::filesystem::path& csv, double t_lo,
                                      double t_hi);

}  // namespace tred
