/*
 * flatlab C API: flat-connection cohomology invariants on torus grids.
 *
 * The library is driven through opaque handles and integer status codes.
 * Every function that can fail returns a flatlab_status; the most recent
 * error message for the calling thread is available from flatlab_last_error().
 * Strings returned by the library stay owned by the handle they came from
 * (or by the library for flatlab_list_presets) and are valid until the handle
 * is freed / the next call from the same thread.
 */

#ifndef FLATLAB_H
#define FLATLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum flatlab_status {
  FLATLAB_OK = 0,
  FLATLAB_ERR_IO = 1,
  FLATLAB_ERR_CONFIG = 2,
  FLATLAB_ERR_DOMAIN = 3,   /* dimension/degree/arity violations */
  FLATLAB_ERR_CHECKS = 4,   /* run finished but some checks failed */
  FLATLAB_ERR_INTERNAL = 5
} flatlab_status;

typedef struct flatlab_config flatlab_config;
typedef struct flatlab_report flatlab_report;
typedef struct flatlab_form flatlab_form;

const char* flatlab_version(void);

/* Thread-local message describing the last failure. */
const char* flatlab_last_error(void);

/* Stable catalog of algebras, polynomial presets, family kinds, generators. */
const char* flatlab_list_presets(void);

/* ---- experiment configs (JSON, versioned schema, unknown keys rejected) -- */
flatlab_status flatlab_config_parse(const char* json_text, flatlab_config** out);
flatlab_status flatlab_config_load(const char* path, flatlab_config** out);
flatlab_status flatlab_config_validate(const flatlab_config* cfg);
/* Canonical JSON (defaults filled in). Owned by the config handle. */
const char* flatlab_config_json(const flatlab_config* cfg);
/* Override the seed / worker count before running. threads <= 0 = auto. */
void flatlab_config_set_seed(flatlab_config* cfg, uint64_t seed);
void flatlab_config_free(flatlab_config* cfg);

/* ---- running -------------------------------------------------------------
 * Deterministic given (config, seed); writes report.json and optional dumps
 * under out_dir (pass NULL to skip files). Returns FLATLAB_OK when every
 * requested check passed, FLATLAB_ERR_CHECKS when the run completed with
 * failures; the report handle is produced in both cases. */
flatlab_status flatlab_run(const flatlab_config* cfg, int threads, const char* out_dir,
                           flatlab_report** out);
const char* flatlab_report_json(const flatlab_report* rep);
int flatlab_report_all_passed(const flatlab_report* rep);
void flatlab_report_free(flatlab_report* rep);

/* ---- form dumps ---------------------------------------------------------- */
flatlab_status flatlab_form_load(const char* path, flatlab_form** out);
flatlab_status flatlab_form_to_csv(const flatlab_form* form, const char* csv_path);
void flatlab_form_free(flatlab_form* form);

#ifdef __cplusplus
}
#endif

#endif /* FLATLAB_H */
