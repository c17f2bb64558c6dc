#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "lpsim/lpsim.h"

namespace {

struct ConfigDeleter {
  void operator()(lpsim_config* c) const { lpsim_config_free(c); }
};
using ConfigPtr = std::unique_ptr<lpsim_config, ConfigDeleter>;

ConfigPtr load_config(const std::string& path) {
  if (path.empty()) return ConfigPtr(lpsim_config_new());
  return ConfigPtr(lpsim_config_load(path.c_str()));
}

int fail(const std::string& what) {
  std::fprintf(stderr, "%s: %s\n", what.c_str(), lpsim_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpsim — pseudonymous peer-to-peer LBS simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lpsim_version()));

  std::string config_path, output_path, crl_path, key, values, seeds;
  long seed = -1;

  CLI::App* run = app.add_subcommand("run", "single deterministic run");
  run->add_option("-c,--config", config_path, "config file (key=value lines)");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("-o,--output", output_path, "metrics CSV path")->required();
  run->add_option("--crl", crl_path, "also write the final revocation list here");

  CLI::App* sweep = app.add_subcommand("sweep", "vary one key across seeds");
  sweep->add_option("-c,--config", config_path, "config file (key=value lines)");
  sweep->add_option("--key", key, "config key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--seeds", seeds, "comma-separated seeds")->required();
  sweep->add_option("-o,--output", output_path, "metrics CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  ConfigPtr cfg = load_config(config_path);
  if (!cfg) return fail("config");
  if (seed >= 0 &&
      lpsim_config_set(cfg.get(), "seed", std::to_string(seed).c_str()) != LPSIM_OK)
    return fail("config");

  if (run->parsed()) {
    if (lpsim_run(cfg.get(), output_path.c_str(),
                  crl_path.empty() ? nullptr : crl_path.c_str()) != LPSIM_OK)
      return fail("run");
    std::printf("wrote %s\n", output_path.c_str());
    return 0;
  }

  if (lpsim_sweep(cfg.get(), key.c_str(), values.c_str(), seeds.c_str(),
                  output_path.c_str()) != LPSIM_OK)
    return fail("sweep");
  std::printf("wrote %s\n", output_path.c_str());
  return 0;
}
