/* npwigner C API: number-phase Wigner stochastic simulation toolkit.
 *
 * All functions return NPW_OK on success; on failure they return an error
 * code and leave a human-readable message in npw_last_error() (thread local).
 * Handles are opaque and must be released with the matching _free call.
 */
#ifndef NPW_H
#define NPW_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npw_status {
  NPW_OK = 0,
  NPW_ERR_PARSE = 1,    /* malformed config / CSV */
  NPW_ERR_INVALID = 2,  /* invalid argument or violated invariant */
  NPW_ERR_RUNTIME = 3,  /* numerical failure during a run */
  NPW_ERR_IO = 4        /* file system failure */
} npw_status;

typedef struct npw_config npw_config;
typedef struct npw_result npw_result;

/* Message for the most recent failure on this thread ("" if none). */
const char* npw_last_error(void);

/* --- experiment configuration ------------------------------------------- */

/* Parse the flat key = value experiment format (see README for keys). */
npw_status npw_config_parse(const char* text, npw_config** out);
npw_status npw_config_load(const char* path, npw_config** out);
void npw_config_free(npw_config* cfg);

/* Overrides applied after parsing (CLI flags). */
npw_status npw_config_set_methods(npw_config* cfg, const char* comma_list);
npw_status npw_config_set_seed(npw_config* cfg, uint64_t seed);
npw_status npw_config_set_out_dir(npw_config* cfg, const char* dir);
npw_status npw_config_set_threads(npw_config* cfg, int threads);
npw_status npw_config_set_parallel_methods(npw_config* cfg, int enabled);

const char* npw_config_out_dir(const npw_config* cfg);

/* --- runs ---------------------------------------------------------------- */

npw_status npw_run(const npw_config* cfg, npw_result** out);
void npw_result_free(npw_result* res);

int npw_result_method_count(const npw_result* res);
const char* npw_result_method_name(const npw_result* res, int i);
/* "ok", an abort diagnostic, or "error: ..." */
const char* npw_result_method_status(const npw_result* res, int i);
/* Extra per-method diagnostics (e.g. initial-ensemble figures of merit). */
const char* npw_result_method_notes(const npw_result* res, int i);

/* Write <out_dir>/<method>.csv for each method that produced a series. */
npw_status npw_result_write_csv(const npw_result* res, const char* out_dir);

/* --- reports ------------------------------------------------------------- */

/* First time where |x_method - x_oracle| > 3 stderr + floor.  Passing a
 * negative floor selects the default 0.02 max|x_oracle|.  *found is 0 when
 * the band holds over the whole shared horizon. */
npw_status npw_divergence_time(const char* oracle_csv, const char* method_csv,
                               double abs_floor, int* found, double* t_out);

/* Export the closed-form coherent-state Wigner table W(n, phi) on the
 * (two_n, phi) grid as CSV (columns two_n, phi, w). */
npw_status npw_wigner_csv(double alpha_re, double alpha_im, int two_n_max,
                          int phi_points, const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NPW_H */
