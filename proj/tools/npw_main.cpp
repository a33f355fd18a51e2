// npw: experiment runner for the number-phase Wigner toolkit.
// Links the C API only.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "npw.h"

namespace {

int die(npw_status code) {
  std::fprintf(stderr, "error: %s\n", npw_last_error());
  return static_cast<int>(code);
}

struct ConfigDeleter {
  void operator()(npw_config* c) const { npw_config_free(c); }
};
struct ResultDeleter {
  void operator()(npw_result* r) const { npw_result_free(r); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"number-phase Wigner stochastic simulation toolkit"};
  app.require_subcommand(1);

  // simulate
  std::string config_path, out_dir;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  int threads = 0;
  bool has_seed = false, parallel_methods = false;
  auto* sim = app.add_subcommand("simulate", "run the configured methods and write CSVs");
  sim->add_option("--config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--method", methods,
                  "method to run (numphase|tw|gaugep|oracle); repeatable, overrides the config");
  sim->add_option("--out", out_dir, "output directory (overrides the config)");
  sim->add_option("--seed", seed, "RNG seed (overrides the config)")
      ->each([&](const std::string&) { has_seed = true; });
  sim->add_option("--threads", threads, "worker threads per method (0 = hardware)");
  sim->add_flag("--parallel-methods", parallel_methods, "run the selected methods concurrently");

  // report
  std::string oracle_csv, method_csv;
  double floor = -1.0;
  auto* rep = app.add_subcommand("report", "print the divergence time of a method vs the oracle");
  rep->add_option("--oracle", oracle_csv, "oracle CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--method", method_csv, "method CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--floor", floor, "absolute error floor (default 0.02 max|x_oracle|)");

  // wigner-csv
  double alpha_re = 0.0, alpha_im = 0.0;
  int two_n_max = 40, phi_points = 0;
  std::string wigner_out = "wigner.csv";
  auto* wig = app.add_subcommand("wigner-csv",
                                 "export the coherent-state W(n, phi) table as CSV");
  wig->add_option("--alpha-re", alpha_re, "Re alpha")->required();
  wig->add_option("--alpha-im", alpha_im, "Im alpha");
  wig->add_option("--two-n-max", two_n_max, "largest 2n row");
  wig->add_option("--phi-points", phi_points, "phi grid size (default 4 two_n_max + 4)");
  wig->add_option("--out", wigner_out, "output file");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    npw_config* raw = nullptr;
    if (auto rc = npw_config_load(config_path.c_str(), &raw); rc != NPW_OK) return die(rc);
    std::unique_ptr<npw_config, ConfigDeleter> cfg(raw);
    if (!methods.empty()) {
      std::string joined;
      for (const auto& m : methods) {
        if (!joined.empty()) joined += ',';
        joined += m;
      }
      if (auto rc = npw_config_set_methods(cfg.get(), joined.c_str()); rc != NPW_OK)
        return die(rc);
    }
    if (has_seed)
      if (auto rc = npw_config_set_seed(cfg.get(), seed); rc != NPW_OK) return die(rc);
    if (!out_dir.empty())
      if (auto rc = npw_config_set_out_dir(cfg.get(), out_dir.c_str()); rc != NPW_OK)
        return die(rc);
    if (threads > 0)
      if (auto rc = npw_config_set_threads(cfg.get(), threads); rc != NPW_OK) return die(rc);
    if (parallel_methods)
      if (auto rc = npw_config_set_parallel_methods(cfg.get(), 1); rc != NPW_OK)
        return die(rc);

    npw_result* raw_res = nullptr;
    if (auto rc = npw_run(cfg.get(), &raw_res); rc != NPW_OK) return die(rc);
    std::unique_ptr<npw_result, ResultDeleter> res(raw_res);
    if (auto rc = npw_result_write_csv(res.get(), npw_config_out_dir(cfg.get()));
        rc != NPW_OK)
      return die(rc);

    bool any_error = false;
    for (int i = 0; i < npw_result_method_count(res.get()); ++i) {
      const char* name = npw_result_method_name(res.get(), i);
      const char* status = npw_result_method_status(res.get(), i);
      const char* notes = npw_result_method_notes(res.get(), i);
      std::printf("method %-8s  %s\n", name, status);
      if (notes[0]) std::printf("  %s\n", notes);
      if (std::string(status).rfind("error:", 0) == 0) any_error = true;
    }
    std::printf("wrote CSVs to %s\n", npw_config_out_dir(cfg.get()));
    return any_error ? 1 : 0;
  }

  if (rep->parsed()) {
    int found = 0;
    double t = 0.0;
    if (auto rc = npw_divergence_time(oracle_csv.c_str(), method_csv.c_str(), floor, &found, &t);
        rc != NPW_OK)
      return die(rc);
    if (found)
      std::printf("divergence_time=%.17g\n", t);
    else
      std::printf("divergence_time=none\n");
    return 0;
  }

  if (wig->parsed()) {
    if (phi_points <= 0) phi_points = 4 * two_n_max + 4;
    if (auto rc = npw_wigner_csv(alpha_re, alpha_im, two_n_max, phi_points, wigner_out.c_str());
        rc != NPW_OK)
      return die(rc);
    std::printf("wrote %s\n", wigner_out.c_str());
    return 0;
  }
  return 0;
}
