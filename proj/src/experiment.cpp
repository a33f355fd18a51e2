#include "npw/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "npw/weighted.hpp"

namespace npw {

namespace {

constexpr int kSamplePoints = 101;  // uniform sample grid over [0, t_final]

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "cannot parse '" + value + "' as a number");
  }
  if (pos != value.size()) throw ConfigError(key, "trailing characters in '" + value + "'");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) throw ConfigError(key, "expected an integer, got '" + value + "'");
  return static_cast<std::int64_t>(v);
}

const std::vector<Method> kAllMethods = {Method::oracle, Method::numphase, Method::tw,
                                         Method::gaugep};

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::oracle: return "oracle";
    case Method::numphase: return "numphase";
    case Method::tw: return "tw";
    case Method::gaugep: return "gaugep";
  }
  return "?";
}

std::optional<Method> method_from_name(std::string_view name) {
  for (Method m : kAllMethods)
    if (name == method_name(m)) return m;
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text) {
  static const std::vector<std::string> known = {
      "chi",     "gamma", "alpha0", "alpha0_re",  "alpha0_im", "dim",     "dt",
      "t_final", "n_traj", "seed",  "phi_points", "methods",   "out_dir"};

  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(key, "unknown key");
    if (kv.count(key)) throw ConfigError(key, "duplicate key");
    if (value.empty()) throw ConfigError(key, "empty value");
    kv[key] = value;
  }

  for (const char* req : {"chi", "gamma"})
    if (!kv.count(req)) throw ConfigError(req, "missing required key");
  if (!kv.count("alpha0") && !kv.count("alpha0_re"))
    throw ConfigError("alpha0", "missing required key");
  if (kv.count("alpha0") && kv.count("alpha0_re"))
    throw ConfigError("alpha0", "give either alpha0 or alpha0_re, not both");

  ExperimentConfig cfg;
  cfg.model.chi = parse_double("chi", kv.at("chi"));
  cfg.model.gamma = parse_double("gamma", kv.at("gamma"));
  const double are = kv.count("alpha0") ? parse_double("alpha0", kv.at("alpha0"))
                                        : parse_double("alpha0_re", kv.at("alpha0_re"));
  const double aim = kv.count("alpha0_im") ? parse_double("alpha0_im", kv.at("alpha0_im")) : 0.0;
  cfg.model.alpha0 = Complex(are, aim);

  if (cfg.model.gamma < 0) throw ConfigError("gamma", "must be >= 0");
  if (cfg.model.chi < 0) throw ConfigError("chi", "must be >= 0");

  const int dim_floor = min_fock_dim(cfg.model.alpha0);
  cfg.model.dim =
      kv.count("dim") ? static_cast<int>(parse_int("dim", kv.at("dim"))) : dim_floor;
  if (cfg.model.dim < dim_floor)
    throw ConfigError("dim", "below the Poisson-tail bound " + std::to_string(dim_floor));

  cfg.two_n_max = 2 * (cfg.model.dim - 1);

  cfg.integration.dt = kv.count("dt") ? parse_double("dt", kv.at("dt")) : 1e-3;
  if (!(cfg.integration.dt > 0)) throw ConfigError("dt", "must be > 0");
  cfg.integration.t_final =
      kv.count("t_final") ? parse_double("t_final", kv.at("t_final")) : 7.0;
  if (cfg.integration.t_final < 0) throw ConfigError("t_final", "must be >= 0");
  cfg.integration.n_traj =
      kv.count("n_traj") ? parse_int("n_traj", kv.at("n_traj")) : 100000;
  if (cfg.integration.n_traj < 1) throw ConfigError("n_traj", "must be >= 1");
  if (kv.count("seed")) {
    const std::int64_t s = parse_int("seed", kv.at("seed"));
    if (s < 0) throw ConfigError("seed", "must be >= 0");
    cfg.integration.seed = static_cast<std::uint64_t>(s);
  }

  cfg.phi_points = kv.count("phi_points")
                       ? static_cast<int>(parse_int("phi_points", kv.at("phi_points")))
                       : 4 * cfg.two_n_max + 4;
  if (cfg.phi_points < 2 * cfg.two_n_max + 2)
    throw ConfigError("phi_points", "must be >= 2 two_n_max + 2 = " +
                                        std::to_string(2 * cfg.two_n_max + 2));

  if (kv.count("methods")) {
    std::stringstream ss(kv.at("methods"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto m = method_from_name(item);
      if (!m) throw ConfigError("methods", "unknown method '" + item + "'");
      if (std::find(cfg.methods.begin(), cfg.methods.end(), *m) == cfg.methods.end())
        cfg.methods.push_back(*m);
    }
    if (cfg.methods.empty()) throw ConfigError("methods", "at least one method required");
  } else {
    cfg.methods = kAllMethods;
  }

  if (kv.count("out_dir")) cfg.out_dir = kv.at("out_dir");

  // Shared sample grid for every method.
  cfg.integration.sample_times.clear();
  if (cfg.integration.t_final == 0) {
    cfg.integration.sample_times.push_back(0.0);
  } else {
    for (int i = 0; i < kSamplePoints; ++i)
      cfg.integration.sample_times.push_back(cfg.integration.t_final * i /
                                             (kSamplePoints - 1));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

const MethodSeries* ExperimentResult::find(Method m) const {
  for (const auto& s : series)
    if (s.method == m) return &s;
  return nullptr;
}

EnsembleTimeSeries run_oracle(const ExperimentConfig& cfg) {
  const ModelParams& mp = cfg.model;
  validate(mp);
  const DensityMatrix rho0 = outer(coherent_state(mp.alpha0, mp.dim));
  // Step small enough for the RK4 stability bound chi D^2 dt < 0.1 with the
  // dissipator's gamma D scale folded in; capped at the 1e-3 default.
  const double d = mp.dim;
  const double stiffness = std::max(mp.chi * d * d + mp.gamma * d, 1e-6);
  const double dt = std::min(1e-3, 0.09 / stiffness);

  std::vector<double> grid = cfg.integration.sample_times;
  const bool leading_zero = !grid.empty() && grid.front() == 0.0;
  if (leading_zero) grid.erase(grid.begin());

  EnsembleTimeSeries out;
  out.times = cfg.integration.sample_times;
  out.columns = {{"x", {}, {}}, {"n", {}, {}}};
  auto record = [&](const DensityMatrix& rho) {
    out.columns[0].mean.push_back(expect_position(rho));
    out.columns[0].sem.push_back(0.0);
    out.columns[1].mean.push_back(expect_number(rho));
    out.columns[1].sem.push_back(0.0);
    out.mean_weight.push_back(1.0);
  };
  if (leading_zero) record(rho0);
  if (!grid.empty()) {
    for (const DensityMatrix& rho : evolve_master(rho0, mp, grid, dt)) record(rho);
  }
  return out;
}

namespace {

EnsembleTimeSeries run_method(Method m, const ExperimentConfig& cfg) {
  const ModelParams& mp = cfg.model;
  const IntegrationParams& ip = cfg.integration;
  switch (m) {
    case Method::oracle:
      return run_oracle(cfg);
    case Method::numphase: {
      InitSummary summary;
      std::vector<NumPhasePath> base =
          init_numphase_ensemble(mp.alpha0, cfg.two_n_max, cfg.phi_points, 0.0, &summary);
      // Replicate the grid until the ensemble reaches n_traj trajectories;
      // replicas share weights but draw independent noise streams.
      const auto want = static_cast<std::size_t>(ip.n_traj);
      std::vector<NumPhasePath> paths;
      const std::size_t replicas = std::max<std::size_t>(1, (want + base.size() - 1) / base.size());
      paths.reserve(replicas * base.size());
      for (std::size_t r = 0; r < replicas; ++r)
        paths.insert(paths.end(), base.begin(), base.end());
      EnsembleTimeSeries s = run_ensemble(paths, mp, ip);
      {
        WeightedEnsemble<int> ens;
        ens.reserve(base.size());
        for (const auto& p : base) ens.push_back({0, p.omega});
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "initial grid: %zu points x %zu replicas, E[w^2]/E[w] = %.6g, "
                      "E[w^2]/E[w]^2 = %.6g",
                      base.size(), replicas, weight_ratio_unsquared(ens),
                      efficiency(ens));
        s.notes = buf;
      }
      return s;
    }
    case Method::tw:
      return run_ensemble(init_tw_ensemble(mp.alpha0, ip.n_traj, ip.seed), mp, ip);
    case Method::gaugep:
      return run_ensemble(init_gauge_p_ensemble(mp.alpha0, ip.n_traj), mp, ip);
  }
  throw std::logic_error("run_method: unreachable");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.methods.empty())
    throw std::invalid_argument("run_experiment: no methods selected");
  // Canonical execution order keeps logs and outputs stable.
  std::vector<Method> order;
  for (Method m : kAllMethods)
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end())
      order.push_back(m);

  ExperimentResult result;
  result.series.resize(order.size());
  auto run_one = [&](std::size_t i) {
    result.series[i].method = order[i];
    try {
      result.series[i].series = run_method(order[i], cfg);
      result.series[i].status = result.series[i].series.status;
    } catch (const std::exception& e) {
      result.series[i].status = std::string("error: ") + e.what();
    }
  };
  if (cfg.parallel_methods) {
    std::vector<std::future<void>> jobs;
    for (std::size_t i = 0; i < order.size(); ++i)
      jobs.push_back(std::async(std::launch::async, run_one, i));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t i = 0; i < order.size(); ++i) run_one(i);
  }
  return result;
}

void write_csv(const EnsembleTimeSeries& s, std::ostream& out) {
  out << "t,x_mean,x_stderr,n_mean,n_stderr,mean_weight\n";
  const SeriesColumn* x = s.find("x");
  const SeriesColumn* n = s.find("n");
  if (!x || !n) throw std::runtime_error("write_csv: series lacks x/n columns");
  char buf[256];
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.times[i],
                  x->mean[i], x->sem[i], n->mean[i], n->sem[i], s.mean_weight[i]);
    out << buf;
  }
}

EnsembleTimeSeries read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("read_csv: empty stream");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "t,x_mean,x_stderr,n_mean,n_stderr,mean_weight")
    throw std::runtime_error("read_csv: unexpected header '" + header + "'");
  EnsembleTimeSeries s;
  s.columns = {{"x", {}, {}}, {"n", {}, {}}};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    double v[6];
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3],
                    &v[4], &v[5]) != 6)
      throw std::runtime_error("read_csv: malformed row '" + line + "'");
    s.times.push_back(v[0]);
    s.columns[0].mean.push_back(v[1]);
    s.columns[0].sem.push_back(v[2]);
    s.columns[1].mean.push_back(v[3]);
    s.columns[1].sem.push_back(v[4]);
    s.mean_weight.push_back(v[5]);
  }
  return s;
}

EnsembleTimeSeries read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  return read_csv(in);
}

std::vector<std::string> write_csv_files(const ExperimentResult& result,
                                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + out_dir + ": " +
                             ec.message());
  std::vector<std::string> paths;
  for (const auto& ms : result.series) {
    if (ms.status.rfind("error:", 0) == 0) continue;  // nothing to write
    const std::string path =
        (fs::path(out_dir) / (std::string(method_name(ms.method)) + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(ms.series, out);
    if (!out) throw std::runtime_error("write failed for " + path);
    paths.push_back(path);
  }
  return paths;
}

std::optional<double> divergence_time(const EnsembleTimeSeries& method_series,
                                      const EnsembleTimeSeries& oracle_series,
                                      double abs_floor) {
  const std::size_t n = std::min(method_series.times.size(), oracle_series.times.size());
  if (n == 0) throw std::invalid_argument("divergence_time: empty series");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(method_series.times[i] - oracle_series.times[i]) > 1e-9)
      throw std::invalid_argument("divergence_time: mismatched time grids");
  const SeriesColumn* xm = method_series.find("x");
  const SeriesColumn* xo = oracle_series.find("x");
  if (!xm || !xo) throw std::invalid_argument("divergence_time: series lacks x column");

  double floor = abs_floor;
  if (floor < 0) {
    double peak = 0;
    for (std::size_t i = 0; i < oracle_series.times.size(); ++i)
      peak = std::max(peak, std::abs(xo->mean[i]));
    floor = 0.02 * peak;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(xm->mean[i] - xo->mean[i]) > 3.0 * xm->sem[i] + floor)
      return method_series.times[i];
  }
  return std::nullopt;
}

}  // namespace npw
