// Exercises the shared-library surface the CLI is built on.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "npw.h"

namespace {
std::string tmp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}
}  // namespace

TEST_CASE("config parse errors carry the key name") {
  npw_config* cfg = nullptr;
  CHECK(npw_config_parse("gamma = 0.1\nalpha0 = 1\n", &cfg) == NPW_ERR_PARSE);
  CHECK(cfg == nullptr);
  CHECK(std::strstr(npw_last_error(), "chi") != nullptr);

  CHECK(npw_config_parse("chi = 1\ngamma = -2\nalpha0 = 1\n", &cfg) == NPW_ERR_PARSE);
  CHECK(std::strstr(npw_last_error(), "gamma") != nullptr);
}

TEST_CASE("end-to-end: run, write, report") {
  const std::string dir = tmp_dir("npw_capi");
  npw_config* cfg = nullptr;
  REQUIRE(npw_config_parse(
              "chi = 1\ngamma = 0.02\nalpha0 = 1.1\nn_traj = 1500\nt_final = 0.5\n"
              "methods = oracle,tw\nseed = 9\n",
              &cfg) == NPW_OK);
  REQUIRE(cfg != nullptr);
  CHECK(npw_config_set_out_dir(cfg, dir.c_str()) == NPW_OK);
  CHECK(npw_config_set_threads(cfg, 2) == NPW_OK);
  CHECK(npw_config_set_seed(cfg, 77) == NPW_OK);
  CHECK(npw_config_set_methods(cfg, "oracle, tw") == NPW_OK);
  CHECK(npw_config_set_methods(cfg, "oracle,warp") == NPW_ERR_INVALID);

  npw_result* res = nullptr;
  REQUIRE(npw_run(cfg, &res) == NPW_OK);
  REQUIRE(res != nullptr);
  REQUIRE(npw_result_method_count(res) == 2);
  CHECK(std::string(npw_result_method_name(res, 0)) == "oracle");
  CHECK(std::string(npw_result_method_name(res, 1)) == "tw");
  CHECK(std::string(npw_result_method_status(res, 0)) == "ok");
  CHECK(std::string(npw_result_method_status(res, 1)) == "ok");

  REQUIRE(npw_result_write_csv(res, dir.c_str()) == NPW_OK);
  CHECK(std::filesystem::exists(dir + "/oracle.csv"));
  CHECK(std::filesystem::exists(dir + "/tw.csv"));

  int found = -1;
  double t = -1;
  REQUIRE(npw_divergence_time((dir + "/oracle.csv").c_str(), (dir + "/tw.csv").c_str(),
                              -1.0, &found, &t) == NPW_OK);
  CHECK(found == 0);  // tw tracks the oracle over this short horizon

  npw_result_free(res);
  npw_config_free(cfg);
  std::filesystem::remove_all(dir);
}

TEST_CASE("wigner table export") {
  const std::string dir = tmp_dir("npw_capi_wigner");
  const std::string path = dir + "/w.csv";
  REQUIRE(npw_wigner_csv(1.0, 0.0, 30, 64, path.c_str()) == NPW_OK);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "two_n,phi,w");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 31 * 64);

  // a too-small table trips the Poisson-tail guard
  CHECK(npw_wigner_csv(1.0, 0.0, 6, 64, path.c_str()) == NPW_ERR_INVALID);
  CHECK(npw_wigner_csv(1.0, 0.0, 30, 64, (dir + "/nope/x.csv").c_str()) == NPW_ERR_IO);
  std::filesystem::remove_all(dir);
}
