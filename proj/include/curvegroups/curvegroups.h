#ifndef CURVEGROUPS_H
#define CURVEGROUPS_H

/* C interface to the curvegroups library: estimate J regression curves,
 * test whether they form K groups of equal mean functions, and select K.
 *
 * Every function returns a cg_status. On failure cg_last_error() gives a
 * message for the calling thread. Handles are opaque and owned by the
 * caller, who releases them with the matching *_destroy function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CURVEGROUPS_BUILDING_LIBRARY)
#    define CG_API __declspec(dllexport)
#  else
#    define CG_API __declspec(dllimport)
#  endif
#else
#  define CG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cg_status {
  CG_OK = 0,
  CG_INVALID_ARGUMENT = 1,
  CG_DUPLICATE_CURVE_ID = 2,
  CG_EMPTY_CURVE = 3,
  CG_NON_FINITE_VALUE = 4,
  CG_DEGENERATE_FIT = 5,
  CG_ALL_CANDIDATES_DEGENERATE = 6,
  CG_EMPTY_CLUSTER_UNRECOVERABLE = 7,
  CG_TOO_LARGE = 8,
  CG_NEGATIVE_VARIANCE = 9,
  CG_ORIGIN_POINT = 10,
  CG_PARSE_ERROR = 11,
  CG_IO_ERROR = 12,
  CG_INTERNAL_ERROR = 99
} cg_status;

typedef enum cg_kernel { CG_KERNEL_EPANECHNIKOV = 0, CG_KERNEL_GAUSSIAN = 1 } cg_kernel;
typedef enum cg_norm { CG_NORM_CM = 0, CG_NORM_KS = 1 } cg_norm;
typedef enum cg_tunnel_format { CG_TUNNEL_CARTESIAN = 0, CG_TUNNEL_POLAR = 1 } cg_tunnel_format;

typedef enum cg_result_kind {
  CG_RESULT_ESTIMATES = 0,
  CG_RESULT_TEST = 1,
  CG_RESULT_SELECTION = 2,
  CG_RESULT_MONTE_CARLO = 3
} cg_result_kind;

typedef struct cg_collection cg_collection;
typedef struct cg_result cg_result;

/* Message of the last failure on this thread; empty after success. */
CG_API const char* cg_last_error(void);
CG_API const char* cg_status_name(cg_status status);
CG_API const char* cg_version(void);

/* ---- collections ---- */

/* CSV with header curve_id,x,y. */
CG_API cg_status cg_collection_read_csv(const char* path, cg_collection** out);
/* Tunnel sections: section_id,x,y (cartesian) or section_id,angle,radius. */
CG_API cg_status cg_collection_read_tunnel(const char* path, cg_tunnel_format format,
                                           cg_collection** out);
/* Builds a collection from `curves` arrays; curve j has sizes[j] points. */
CG_API cg_status cg_collection_create(size_t curves, const char* const* ids,
                                      const size_t* sizes, const double* const* xs,
                                      const double* const* ys, cg_collection** out);
CG_API cg_status cg_collection_curve_count(const cg_collection* c, size_t* out);
CG_API cg_status cg_collection_total_size(const cg_collection* c, size_t* out);
CG_API void cg_collection_destroy(cg_collection* c);

/* ---- options ---- */

typedef struct cg_fit_options {
  size_t grid_size;        /* Q, default 100 */
  double grid_trim;        /* fraction trimmed at each end, default 0.025 */
  cg_kernel kernel;        /* default Epanechnikov */
  size_t candidates;       /* bandwidth candidates, default 30 */
  int binning;             /* nonzero enables binning above the threshold, default 1 */
} cg_fit_options;

typedef struct cg_test_options {
  cg_fit_options fit;
  cg_norm norm;            /* default CM */
  size_t boot;             /* B, default 500 */
  double alpha;            /* default 0.05 */
  uint64_t seed;
  int reselect_bandwidth;  /* default 1 */
  size_t restarts;         /* default 20 */
  size_t threads;          /* default 1 */
} cg_test_options;

typedef struct cg_simulate_options {
  const char* scenario;    /* "three:R#:V#", "thirty" or "onetwenty" */
  double a;                /* thirty-curve shift */
  int heteroscedastic;     /* thirty-curve variance mode */
  const size_t* n;         /* per-curve sizes, or one size, or the thirty-curve total */
  size_t n_count;
  size_t runs;
  int select_k;            /* 1: select K per run, 0: test H0(k), -1 (default): by scenario */
  size_t k;                /* tested K; 0 (default) means 1 for three, 5 for thirty */
  size_t k_max;            /* 0 means J */
  int noise_as_sd;         /* 120-curve noise read as sd 1.3 */
  cg_test_options test;
} cg_simulate_options;

CG_API void cg_fit_options_init(cg_fit_options* o);
CG_API void cg_test_options_init(cg_test_options* o);
CG_API void cg_simulate_options_init(cg_simulate_options* o);

/* ---- pipelines ---- */

CG_API cg_status cg_fit(const cg_collection* c, const cg_fit_options* o, cg_result** out);
CG_API cg_status cg_test(const cg_collection* c, size_t k, const cg_test_options* o,
                         cg_result** out);
CG_API cg_status cg_autok(const cg_collection* c, size_t k_max, const cg_test_options* o,
                          cg_result** out);
CG_API cg_status cg_simulate(const cg_simulate_options* o, cg_result** out);

/* ---- results ---- */

CG_API cg_status cg_result_kind_of(const cg_result* r, cg_result_kind* out);
/* Tested K, or the selected K. */
CG_API cg_status cg_result_k(const cg_result* r, size_t* out);
CG_API cg_status cg_result_statistic(const cg_result* r, double* out);
CG_API cg_status cg_result_p_value(const cg_result* r, double* out);
CG_API cg_status cg_result_reject(const cg_result* r, int* out);
CG_API cg_status cg_result_saturated(const cg_result* r, int* out);
/* Monte Carlo rejection rate over successful runs. */
CG_API cg_status cg_result_rate(const cg_result* r, double* out);
/* 1-based group labels; `len` receives J. Copies min(J, capacity) values. */
CG_API cg_status cg_result_assignment(const cg_result* r, size_t* labels, size_t capacity,
                                      size_t* len);
/* Bandwidth of curve j (estimates, test or selection results). */
CG_API cg_status cg_result_bandwidth(const cg_result* r, size_t j, double* out);
/* Estimate of curve j on the grid; `len` receives Q. */
CG_API cg_status cg_result_curve_values(const cg_result* r, size_t j, double* values,
                                        size_t capacity, size_t* len);

CG_API cg_status cg_result_write_json(const cg_result* r, const char* path);
/* Monte Carlo table, or section_id,group labels for test/selection results. */
CG_API cg_status cg_result_write_csv(const cg_result* r, const char* path);
/* angle,radius,group rows of the pooled group fits. */
CG_API cg_status cg_result_write_profile(const cg_result* r, const char* path);
CG_API void cg_result_destroy(cg_result* r);

#ifdef __cplusplus
}
#endif

#endif /* CURVEGROUPS_H */
