#include "npw.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "npw/experiment.hpp"

struct npw_config {
  npw::ExperimentConfig cfg;
};

struct npw_result {
  npw::ExperimentResult res;
};

namespace {

thread_local std::string g_last_error;

npw_status fail(npw_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
npw_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NPW_OK;
  } catch (const npw::ConfigError& e) {
    return fail(NPW_ERR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(NPW_ERR_INVALID, e.what());
  } catch (const std::domain_error& e) {
    return fail(NPW_ERR_INVALID, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(NPW_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(NPW_ERR_RUNTIME, e.what());
  }
}

}  // namespace

extern "C" {

const char* npw_last_error(void) { return g_last_error.c_str(); }

npw_status npw_config_parse(const char* text, npw_config** out) {
  if (!text || !out) return fail(NPW_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new npw_config{npw::parse_config(text)}; });
}

npw_status npw_config_load(const char* path, npw_config** out) {
  if (!path || !out) return fail(NPW_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new npw_config{npw::load_config_file(path)}; });
}

void npw_config_free(npw_config* cfg) { delete cfg; }

npw_status npw_config_set_methods(npw_config* cfg, const char* comma_list) {
  if (!cfg || !comma_list) return fail(NPW_ERR_INVALID, "null argument");
  return guarded([&] {
    std::vector<npw::Method> methods;
    std::stringstream ss(comma_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto m = npw::method_from_name(item.substr(b, e - b + 1));
      if (!m) throw std::invalid_argument("unknown method '" + item + "'");
      methods.push_back(*m);
    }
    if (methods.empty()) throw std::invalid_argument("no methods given");
    cfg->cfg.methods = methods;
  });
}

npw_status npw_config_set_seed(npw_config* cfg, uint64_t seed) {
  if (!cfg) return fail(NPW_ERR_INVALID, "null argument");
  cfg->cfg.integration.seed = seed;
  return NPW_OK;
}

npw_status npw_config_set_out_dir(npw_config* cfg, const char* dir) {
  if (!cfg || !dir) return fail(NPW_ERR_INVALID, "null argument");
  cfg->cfg.out_dir = dir;
  return NPW_OK;
}

npw_status npw_config_set_threads(npw_config* cfg, int threads) {
  if (!cfg || threads < 0) return fail(NPW_ERR_INVALID, "invalid thread count");
  cfg->cfg.integration.threads = threads;
  return NPW_OK;
}

npw_status npw_config_set_parallel_methods(npw_config* cfg, int enabled) {
  if (!cfg) return fail(NPW_ERR_INVALID, "null argument");
  cfg->cfg.parallel_methods = enabled != 0;
  return NPW_OK;
}

const char* npw_config_out_dir(const npw_config* cfg) {
  return cfg ? cfg->cfg.out_dir.c_str() : "";
}

npw_status npw_run(const npw_config* cfg, npw_result** out) {
  if (!cfg || !out) return fail(NPW_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new npw_result{npw::run_experiment(cfg->cfg)}; });
}

void npw_result_free(npw_result* res) { delete res; }

int npw_result_method_count(const npw_result* res) {
  return res ? static_cast<int>(res->res.series.size()) : 0;
}

const char* npw_result_method_name(const npw_result* res, int i) {
  if (!res || i < 0 || i >= npw_result_method_count(res)) return "";
  return npw::method_name(res->res.series[static_cast<std::size_t>(i)].method);
}

const char* npw_result_method_status(const npw_result* res, int i) {
  if (!res || i < 0 || i >= npw_result_method_count(res)) return "";
  return res->res.series[static_cast<std::size_t>(i)].status.c_str();
}

const char* npw_result_method_notes(const npw_result* res, int i) {
  if (!res || i < 0 || i >= npw_result_method_count(res)) return "";
  return res->res.series[static_cast<std::size_t>(i)].series.notes.c_str();
}

npw_status npw_result_write_csv(const npw_result* res, const char* out_dir) {
  if (!res || !out_dir) return fail(NPW_ERR_INVALID, "null argument");
  return guarded([&] { npw::write_csv_files(res->res, out_dir); });
}

npw_status npw_divergence_time(const char* oracle_csv, const char* method_csv,
                               double abs_floor, int* found, double* t_out) {
  if (!oracle_csv || !method_csv || !found || !t_out)
    return fail(NPW_ERR_INVALID, "null argument");
  return guarded([&] {
    const auto oracle = npw::read_csv_file(oracle_csv);
    const auto method = npw::read_csv_file(method_csv);
    const auto t = npw::divergence_time(method, oracle, abs_floor);
    *found = t.has_value() ? 1 : 0;
    *t_out = t.value_or(0.0);
  });
}

npw_status npw_wigner_csv(double alpha_re, double alpha_im, int two_n_max,
                          int phi_points, const char* out_path) {
  if (!out_path) return fail(NPW_ERR_INVALID, "null argument");
  return guarded([&] {
    const auto w =
        npw::coherent_closed_form(npw::Complex(alpha_re, alpha_im), two_n_max);
    const auto grid = npw::make_phi_grid(phi_points);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + std::string(out_path));
    npw::write_wigner_csv(w, grid, out);
    if (!out) throw std::ios_base::failure("write failed for " + std::string(out_path));
  });
}

}  // extern "C"
