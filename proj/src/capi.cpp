#include "flatlab/flatlab.h"

#include <json.hpp>

#include <cstring>
#include <string>

#include "experiment.hpp"
#include "forms_io.hpp"

using namespace flatlab;

struct flatlab_config {
  ExperimentConfig cfg;
  mutable std::string json_cache;
};

struct flatlab_report {
  RunResult result;
};

struct flatlab_form {
  LoadedForm form;
};

namespace {

thread_local std::string t_last_error;

flatlab_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::io_error:
      return FLATLAB_ERR_IO;
    case ErrorCode::config_error:
      return FLATLAB_ERR_CONFIG;
    case ErrorCode::internal:
      return FLATLAB_ERR_INTERNAL;
    default:
      return FLATLAB_ERR_DOMAIN;
  }
}

template <class Fn>
flatlab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_of(e);
  } catch (const nlohmann::json::exception& e) {
    t_last_error = e.what();
    return FLATLAB_ERR_CONFIG;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return FLATLAB_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* flatlab_version(void) { return "0.1.0"; }

const char* flatlab_last_error(void) { return t_last_error.c_str(); }

const char* flatlab_list_presets(void) {
  static const std::string catalog = list_presets_text();
  return catalog.c_str();
}

flatlab_status flatlab_config_parse(const char* json_text, flatlab_config** out) {
  if (!json_text || !out) {
    t_last_error = "null argument";
    return FLATLAB_ERR_CONFIG;
  }
  return guarded([&] {
    auto* handle = new flatlab_config{ExperimentConfig::parse(json_text), {}};
    *out = handle;
    return FLATLAB_OK;
  });
}

flatlab_status flatlab_config_load(const char* path, flatlab_config** out) {
  if (!path || !out) {
    t_last_error = "null argument";
    return FLATLAB_ERR_CONFIG;
  }
  return guarded([&] {
    auto* handle = new flatlab_config{ExperimentConfig::load(path), {}};
    *out = handle;
    return FLATLAB_OK;
  });
}

flatlab_status flatlab_config_validate(const flatlab_config* cfg) {
  if (!cfg) {
    t_last_error = "null config";
    return FLATLAB_ERR_CONFIG;
  }
  return guarded([&] {
    cfg->cfg.validate();
    return FLATLAB_OK;
  });
}

const char* flatlab_config_json(const flatlab_config* cfg) {
  if (!cfg) return "";
  cfg->json_cache = cfg->cfg.canonical_json();
  return cfg->json_cache.c_str();
}

void flatlab_config_set_seed(flatlab_config* cfg, uint64_t seed) {
  if (cfg) cfg->cfg.seed = seed;
}

void flatlab_config_free(flatlab_config* cfg) { delete cfg; }

flatlab_status flatlab_run(const flatlab_config* cfg, int threads, const char* out_dir,
                           flatlab_report** out) {
  if (!cfg || !out) {
    t_last_error = "null argument";
    return FLATLAB_ERR_CONFIG;
  }
  return guarded([&]() -> flatlab_status {
    set_num_threads(threads);
    RunResult result = run_experiment(cfg->cfg, out_dir ? out_dir : "");
    auto* handle = new flatlab_report{std::move(result)};
    *out = handle;
    return handle->result.all_passed ? FLATLAB_OK : FLATLAB_ERR_CHECKS;
  });
}

const char* flatlab_report_json(const flatlab_report* rep) {
  return rep ? rep->result.report_json.c_str() : "";
}

int flatlab_report_all_passed(const flatlab_report* rep) {
  return rep && rep->result.all_passed ? 1 : 0;
}

void flatlab_report_free(flatlab_report* rep) { delete rep; }

flatlab_status flatlab_form_load(const char* path, flatlab_form** out) {
  if (!path || !out) {
    t_last_error = "null argument";
    return FLATLAB_ERR_CONFIG;
  }
  return guarded([&] {
    auto* handle = new flatlab_form{load_form(path)};
    *out = handle;
    return FLATLAB_OK;
  });
}

flatlab_status flatlab_form_to_csv(const flatlab_form* form, const char* csv_path) {
  if (!form || !csv_path) {
    t_last_error = "null argument";
    return FLATLAB_ERR_CONFIG;
  }
  return guarded([&] {
    form_to_csv(form->form, csv_path);
    return FLATLAB_OK;
  });
}

void flatlab_form_free(flatlab_form* form) { delete form; }

}  // extern "C"
