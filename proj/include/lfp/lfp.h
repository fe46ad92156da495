#ifndef LFP_LFP_H
#define LFP_LFP_H

/*
 * C interface to the LFP library.
 *
 * Objects are opaque handles created by the *_create / *_init / lfp_solve
 * functions and released with the matching *_free function. Every fallible
 * call returns an lfp_status; on failure a message describing the error is
 * available from lfp_last_error() on the calling thread until the next call.
 *
 * Arrays of points are row-major: point i occupies x[i*dim .. i*dim+dim-1].
 */

#include <stddef.h>
#include <stdint.h>

#if defined(LFP_BUILDING_LIBRARY)
#define LFP_API __attribute__((visibility("default")))
#else
#define LFP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lfp_status {
  LFP_OK = 0,
  LFP_ERR_INVALID_ARGUMENT = 1,
  LFP_ERR_CONFIG = 2,
  LFP_ERR_IO = 3,
  LFP_ERR_SIZE_LIMIT = 4,
  LFP_ERR_DOMAIN = 5,
  LFP_ERR_DIMENSION_MISMATCH = 6,
  LFP_ERR_SINGULAR = 7,
  LFP_ERR_RANK_DEFICIENT = 8,
  LFP_ERR_STEP_SIZE = 9,
  LFP_ERR_DIVERGENCE = 10,
  LFP_ERR_TOLERANCE = 11,
  LFP_ERR_MISSING_FIELD = 12,
  LFP_ERR_INVALID_SPEC = 13,
  LFP_ERR_INTERNAL = 100
} lfp_status;

typedef enum lfp_net_form { LFP_FORM_GENERAL = 0, LFP_FORM_ONE_D = 1 } lfp_net_form;

typedef enum lfp_intercept { LFP_INTERCEPT_NONE = 0, LFP_INTERCEPT_UNPENALIZED = 1 } lfp_intercept;

typedef struct lfp_dataset lfp_dataset;
typedef struct lfp_lattice lfp_lattice;
typedef struct lfp_solution lfp_solution;
typedef struct lfp_net lfp_net;

LFP_API const char* lfp_version(void);
LFP_API const char* lfp_status_string(lfp_status status);
/* Message of the most recent failure on this thread ("" if none). */
LFP_API const char* lfp_last_error(void);

/* ---- datasets ---- */
LFP_API lfp_status lfp_dataset_create(const double* x, const double* y, size_t samples,
                                      size_t dim, lfp_dataset** out);
LFP_API lfp_status lfp_dataset_read_csv(const char* path, lfp_dataset** out);
LFP_API lfp_status lfp_dataset_write_csv(const lfp_dataset* data, const char* path);
LFP_API lfp_status lfp_dataset_shape(const lfp_dataset* data, size_t* samples, size_t* dim);
/* Writes 16 hex digits and a terminating NUL into hash (17 bytes). */
LFP_API lfp_status lfp_dataset_hash(const lfp_dataset* data, char hash[17]);
LFP_API void lfp_dataset_free(lfp_dataset* data);

/* ---- frequency lattices ---- */
LFP_API lfp_status lfp_lattice_create(int dim, double period, int half_width, lfp_lattice** out);
/* Number of nonzero frequencies on the lattice. */
LFP_API lfp_status lfp_lattice_size(const lfp_lattice* lattice, size_t* size);
LFP_API void lfp_lattice_free(lfp_lattice* lattice);

/* c(xi) for a nonzero frequency vector of length dim. */
LFP_API lfp_status lfp_coefficient(const double* xi, int dim, double a, double b, double* out);

/* ---- LFP solutions ---- */
LFP_API lfp_status lfp_solve(const lfp_dataset* data, const lfp_lattice* lattice, double a,
                             double b, double epsilon, lfp_intercept intercept,
                             lfp_solution** out);
LFP_API lfp_status lfp_solution_predict(const lfp_solution* sol, const double* x, size_t points,
                                        double* out);
LFP_API lfp_status lfp_solution_fp_norm(const lfp_solution* sol, double* out);
LFP_API lfp_status lfp_solution_intercept(const lfp_solution* sol, double* out);
/* Coefficients on the positive half of the lattice; count must equal size / 2. */
LFP_API lfp_status lfp_solution_spectrum(const lfp_solution* sol, double* re, double* im,
                                         size_t count);
LFP_API void lfp_solution_free(lfp_solution* sol);

/* ---- two-layer networks ---- */
/* width counts neurons before ASI; with asi != 0 the network has 2 * width. */
LFP_API lfp_status lfp_net_init(size_t dim, size_t width, lfp_net_form form, const char* preset,
                                uint64_t seed, int asi, lfp_net** out);
LFP_API lfp_status lfp_net_width(const lfp_net* net, size_t* width);
LFP_API lfp_status lfp_net_forward(const lfp_net* net, const double* x, size_t points,
                                   double* out);
LFP_API lfp_status lfp_net_coefficients(const lfp_net* net, double* a, double* b);
LFP_API lfp_status lfp_net_loss(const lfp_net* net, const lfp_dataset* data, double* out);
LFP_API void lfp_net_free(lfp_net* net);

/* ---- experiment pipelines ---- */
/*
 * Runs a named command (gen-data, compare, flow-verify, sweep, solve, train,
 * plot) with a JSON configuration or manifest. out_dir may be NULL or empty
 * to skip writing files. On LFP_OK, *report_json receives a JSON report that
 * the caller releases with lfp_string_free; the report's boolean "passed"
 * says whether the run's checks succeeded.
 */
LFP_API lfp_status lfp_run(const char* command, const char* config_json, const char* out_dir,
                           size_t workers, char** report_json);
LFP_API void lfp_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
