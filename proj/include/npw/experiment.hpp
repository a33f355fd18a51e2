#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npw/sde.hpp"

namespace npw {

/// Config/validation failure naming the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  ModelParams model;
  IntegrationParams integration;
  std::vector<Method> methods;
  std::string out_dir = "out";
  int phi_points = 0;
  int two_n_max = 0;
  bool parallel_methods = false;
};

const char* method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

/// Parses the flat key = value experiment format.  Keys: chi, gamma,
/// alpha0 (or alpha0_re) and alpha0_im, dim, dt, t_final, n_traj, seed,
/// phi_points, methods (comma list), out_dir.  '#' starts a comment.
/// Defaults: dt 1e-3, t_final 7, n_traj 1e5, seed 42, dim the Poisson-tail
/// bound for alpha0, two_n_max = 2 (dim - 1), phi_points 4 two_n_max + 4,
/// all methods, out_dir "out".  Sample times are 101 uniform points.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct MethodSeries {
  Method method = Method::oracle;
  EnsembleTimeSeries series;
  std::string status = "ok";
};

struct ExperimentResult {
  std::vector<MethodSeries> series;
  const MethodSeries* find(Method m) const;
};

/// Runs every selected method (oracle via the Fock-basis master equation,
/// the rest via the SDE engine) on the shared sample-time grid.  A failing
/// method keeps its error text in status; the others still run.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Reference series from RK4 on the master equation; zero standard errors.
EnsembleTimeSeries run_oracle(const ExperimentConfig& cfg);

/// CSV columns: t, x_mean, x_stderr, n_mean, n_stderr, mean_weight;
/// 17 significant digits so a round trip through text is bit exact.
void write_csv(const EnsembleTimeSeries& s, std::ostream& out);
EnsembleTimeSeries read_csv(std::istream& in);
EnsembleTimeSeries read_csv_file(const std::string& path);

/// Writes <out_dir>/<method>.csv for every method in the result and
/// returns the paths in result order.
std::vector<std::string> write_csv_files(const ExperimentResult& result,
                                         const std::string& out_dir);

/// First sample time with |x_method - x_oracle| > 3 stderr_method + floor;
/// nullopt when the band holds over the whole shared horizon.  Negative
/// floor selects the default 0.02 max|x_oracle|.
std::optional<double> divergence_time(const EnsembleTimeSeries& method_series,
                                      const EnsembleTimeSeries& oracle_series,
                                      double abs_floor = -1.0);

}  // namespace npw
