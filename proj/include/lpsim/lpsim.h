#ifndef LPSIM_H
#define LPSIM_H

/* C interface to the simulator: opaque config handle, error codes, and the
 * run/sweep drivers. All functions are synchronous and thread-compatible
 * (distinct handles may be used from distinct threads). */

#ifdef __cplusplus
extern "C" {
#endif

#define LPSIM_OK 0
#define LPSIM_ERR_INVALID_ARG 1 /* null pointer / malformed argument */
#define LPSIM_ERR_CONFIG 2      /* unknown key, bad value, failed validation */
#define LPSIM_ERR_IO 3          /* file could not be read or written */
#define LPSIM_ERR_RUN 4         /* simulation failed */

typedef struct lpsim_config lpsim_config;

const char* lpsim_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
const char* lpsim_last_error(void);

lpsim_config* lpsim_config_new(void);
lpsim_config* lpsim_config_load(const char* path); /* NULL on failure */
lpsim_config* lpsim_config_clone(const lpsim_config* cfg);
int lpsim_config_set(lpsim_config* cfg, const char* key, const char* value);
void lpsim_config_free(lpsim_config* cfg);

/* One deterministic run. Writes the metrics CSV (header plus one row) to
 * metrics_csv_path and, unless crl_path is NULL, the final revocation list
 * text to crl_path. */
int lpsim_run(const lpsim_config* cfg, const char* metrics_csv_path,
              const char* crl_path);

/* Varies one config key over comma-separated values crossed with
 * comma-separated seeds; writes a header plus one row per (value, seed). */
int lpsim_sweep(const lpsim_config* cfg, const char* key, const char* values,
                const char* seeds, const char* metrics_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* LPSIM_H */
