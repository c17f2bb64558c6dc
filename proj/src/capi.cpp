#include "lpsim/lpsim.h"

#include <fstream>
#include <sstream>

#include "sim_engine.hpp"

struct lpsim_config {
  lpsim::SimConfig cfg;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int code_for(const lpsim::SchemeError& e) {
  switch (e.code) {
    case lpsim::ErrorCode::InvalidConfig:
    case lpsim::ErrorCode::BadParameters:
      return LPSIM_ERR_CONFIG;
    case lpsim::ErrorCode::TraceParseError:
      return LPSIM_ERR_IO;
    default:
      return LPSIM_ERR_RUN;
  }
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int write_file(const char* path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    set_error(std::string("cannot write: ") + path);
    return LPSIM_ERR_IO;
  }
  out << content;
  return LPSIM_OK;
}

}  // namespace

extern "C" {

const char* lpsim_version(void) { return "1.0.0"; }

const char* lpsim_last_error(void) { return g_last_error.c_str(); }

lpsim_config* lpsim_config_new(void) { return new lpsim_config{}; }

lpsim_config* lpsim_config_load(const char* path) {
  if (!path) {
    set_error("null path");
    return nullptr;
  }
  try {
    return new lpsim_config{lpsim::SimConfig::load_file(path)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

lpsim_config* lpsim_config_clone(const lpsim_config* cfg) {
  if (!cfg) {
    set_error("null config");
    return nullptr;
  }
  return new lpsim_config{cfg->cfg};
}

int lpsim_config_set(lpsim_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return LPSIM_ERR_INVALID_ARG;
  }
  try {
    cfg->cfg.set(key, value);
    return LPSIM_OK;
  } catch (const lpsim::SchemeError& e) {
    set_error(e.what());
    return code_for(e);
  }
}

void lpsim_config_free(lpsim_config* cfg) { delete cfg; }

int lpsim_run(const lpsim_config* cfg, const char* metrics_csv_path,
              const char* crl_path) {
  if (!cfg || !metrics_csv_path) {
    set_error("null argument");
    return LPSIM_ERR_INVALID_ARG;
  }
  try {
    lpsim::RunOutput out = lpsim::run_simulation(cfg->cfg);
    std::string csv = lpsim::metrics_csv_header() + "\n" +
                      lpsim::metrics_csv_row("run", "", std::to_string(cfg->cfg.seed),
                                             out.metrics) +
                      "\n";
    if (int rc = write_file(metrics_csv_path, csv); rc != LPSIM_OK) return rc;
    if (crl_path)
      if (int rc = write_file(crl_path, out.final_crl.to_text()); rc != LPSIM_OK)
        return rc;
    return LPSIM_OK;
  } catch (const lpsim::SchemeError& e) {
    set_error(e.what());
    return code_for(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return LPSIM_ERR_RUN;
  }
}

int lpsim_sweep(const lpsim_config* cfg, const char* key, const char* values,
                const char* seeds, const char* metrics_csv_path) {
  if (!cfg || !key || !values || !seeds || !metrics_csv_path) {
    set_error("null argument");
    return LPSIM_ERR_INVALID_ARG;
  }
  std::vector<std::string> value_list = split_csv(values);
  std::vector<std::string> seed_list = split_csv(seeds);
  if (value_list.empty() || seed_list.empty()) {
    set_error("empty sweep list");
    return LPSIM_ERR_INVALID_ARG;
  }
  try {
    std::string csv = lpsim::metrics_csv_header() + "\n";
    for (const std::string& value : value_list)
      for (const std::string& seed : seed_list) {
        lpsim::SimConfig point = cfg->cfg;
        point.set(key, value);
        point.set("seed", seed);
        lpsim::RunOutput out = lpsim::run_simulation(point);
        csv += lpsim::metrics_csv_row(key, value, seed, out.metrics) + "\n";
      }
    return write_file(metrics_csv_path, csv);
  } catch (const lpsim::SchemeError& e) {
    set_error(e.what());
    return code_for(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return LPSIM_ERR_RUN;
  }
}

}  // extern "C"
