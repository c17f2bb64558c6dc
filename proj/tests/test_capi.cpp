#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lpsim/lpsim.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void shrink(lpsim_config* cfg) {
  REQUIRE(lpsim_config_set(cfg, "node_count", "40") == LPSIM_OK);
  REQUIRE(lpsim_config_set(cfg, "duration", "600") == LPSIM_OK);
  REQUIRE(lpsim_config_set(cfg, "warmup", "200") == LPSIM_OK);
}

}  // namespace

TEST_CASE("version and error strings are always present") {
  CHECK(lpsim_version() != nullptr);
  CHECK(lpsim_last_error() != nullptr);
}

TEST_CASE("config handle lifecycle and validation") {
  lpsim_config* cfg = lpsim_config_new();
  REQUIRE(cfg != nullptr);
  CHECK(lpsim_config_set(cfg, "Pr_serve", "0.1") == LPSIM_OK);
  CHECK(lpsim_config_set(cfg, "bogus_key", "1") == LPSIM_ERR_CONFIG);
  CHECK(std::string(lpsim_last_error()).find("InvalidConfig") != std::string::npos);
  CHECK(lpsim_config_set(cfg, nullptr, "1") == LPSIM_ERR_INVALID_ARG);
  CHECK(lpsim_config_set(nullptr, "seed", "1") == LPSIM_ERR_INVALID_ARG);

  lpsim_config* copy = lpsim_config_clone(cfg);
  REQUIRE(copy != nullptr);
  lpsim_config_free(copy);
  lpsim_config_free(cfg);
}

TEST_CASE("config file loading") {
  {
    std::ofstream out("/tmp/lpsim_capi_cfg.txt");
    out << "seed=5\nnode_count=40\nduration=600\nwarmup=200\n";
  }
  lpsim_config* cfg = lpsim_config_load("/tmp/lpsim_capi_cfg.txt");
  REQUIRE(cfg != nullptr);
  lpsim_config_free(cfg);

  CHECK(lpsim_config_load("/tmp/lpsim_no_such_file.txt") == nullptr);
  CHECK(std::strlen(lpsim_last_error()) > 0);
}

TEST_CASE("run writes deterministic metrics and CRL files") {
  lpsim_config* cfg = lpsim_config_new();
  shrink(cfg);
  REQUIRE(lpsim_run(cfg, "/tmp/lpsim_m1.csv", "/tmp/lpsim_c1.txt") == LPSIM_OK);
  REQUIRE(lpsim_run(cfg, "/tmp/lpsim_m2.csv", "/tmp/lpsim_c2.txt") == LPSIM_OK);
  CHECK(read_file("/tmp/lpsim_m1.csv") == read_file("/tmp/lpsim_m2.csv"));
  CHECK(read_file("/tmp/lpsim_c1.txt") == read_file("/tmp/lpsim_c2.txt"));

  std::string csv = read_file("/tmp/lpsim_m1.csv");
  CHECK(csv.rfind("key,value,seed,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row

  // CRL path is optional.
  CHECK(lpsim_run(cfg, "/tmp/lpsim_m3.csv", nullptr) == LPSIM_OK);
  CHECK(lpsim_run(cfg, nullptr, nullptr) == LPSIM_ERR_INVALID_ARG);
  lpsim_config_free(cfg);
}

TEST_CASE("invalid config fails at run time with a config error") {
  lpsim_config* cfg = lpsim_config_new();
  REQUIRE(lpsim_config_set(cfg, "gamma", "500") == LPSIM_OK);  // not a tau multiple
  CHECK(lpsim_run(cfg, "/tmp/lpsim_bad.csv", nullptr) == LPSIM_ERR_CONFIG);
  lpsim_config_free(cfg);
}

TEST_CASE("sweep emits one row per value-seed pair") {
  lpsim_config* cfg = lpsim_config_new();
  shrink(cfg);
  REQUIRE(lpsim_sweep(cfg, "Pr_serve", "0.02,0.06", "1,2,3", "/tmp/lpsim_sweep.csv") ==
          LPSIM_OK);
  std::string csv = read_file("/tmp/lpsim_sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 rows
  CHECK(csv.find("Pr_serve,0.02,1,") != std::string::npos);
  CHECK(csv.find("Pr_serve,0.06,3,") != std::string::npos);

  CHECK(lpsim_sweep(cfg, "Pr_serve", "", "1", "/tmp/x.csv") == LPSIM_ERR_INVALID_ARG);
  CHECK(lpsim_sweep(cfg, "bogus", "1", "1", "/tmp/x.csv") == LPSIM_ERR_CONFIG);
  lpsim_config_free(cfg);
}
