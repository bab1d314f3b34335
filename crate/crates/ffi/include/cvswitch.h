#ifndef CVSWITCH_H
#define CVSWITCH_H

/* Generated by cbindgen from cvswitch-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which receiver a per-receiver query refers to.
 */
typedef enum CvsBob {
  CVS_BOB_BOB1 = 0,
  CVS_BOB_BOB2 = 1,
} CvsBob;

/**
 * Routing verdict.
 */
typedef enum CvsRoute {
  CVS_ROUTE_ROUTE_BOB1 = 0,
  CVS_ROUTE_ROUTE_BOB2 = 1,
  CVS_ROUTE_ROUTE_NONE = 2,
} CvsRoute;

/**
 * Status codes returned by every API function.
 */
typedef enum CvsStatus {
  CVS_STATUS_OK = 0,
  CVS_STATUS_NULL_POINTER = 1,
  CVS_STATUS_INVALID_PARAMS = 2,
  CVS_STATUS_INVALID_UTF8 = 3,
  CVS_STATUS_PARSE_ERROR = 4,
  CVS_STATUS_UNKNOWN_NAME = 5,
  CVS_STATUS_SAMPLING_ERROR = 6,
} CvsStatus;

/**
 * Opaque handle to a parsed and elaborated circuit.
 */
typedef struct CvsCircuit CvsCircuit;

/**
 * Opaque parameter handle.
 */
typedef struct CvsParams CvsParams;

/**
 * Analytic report for one parameter point.
 */
typedef struct CvsReport {
  double v1_x;
  double v1_y;
  double v2_x;
  double v2_y;
  double f1;
  double f2;
  double w35_total;
  double w36_total;
  enum CvsRoute route;
} CvsReport;

/**
 * Monte-Carlo moment estimates for one output mode.
 */
typedef struct CvsMoments {
  double mean_x;
  double mean_y;
  double var_x;
  double var_y;
  double se_var_x;
  double se_var_y;
  uint64_t n;
} CvsMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread; empty string if none.
 */
const char *cvs_last_error_message(void);

/**
 * Allocates a parameter set. Input variances are the coherent-state unit.
 * Returns NULL if any value is non-finite.
 */
struct CvsParams *cvs_params_new(double r_a,
                                 double r_b,
                                 double g1,
                                 double g2,
                                 double alpha_re,
                                 double alpha_im);

/**
 * Frees a parameter handle. NULL is ignored.
 *
 * # Safety
 * `p` must come from `cvs_params_new` and not be freed twice.
 */
void cvs_params_free(struct CvsParams *p);

/**
 * Fills `out` with the analytic report for `p`.
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum CvsStatus cvs_report(const struct CvsParams *p, struct CvsReport *out);

/**
 * Teleportation fidelity at the chosen receiver.
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum CvsStatus cvs_fidelity(const struct CvsParams *p, enum CvsBob which, double *out);

/**
 * Monte-Carlo moment estimates for both receivers. Deterministic in
 * (`shots`, `seed`).
 *
 * # Safety
 * All pointers must be valid.
 */
enum CvsStatus cvs_mc_sample(const struct CvsParams *p,
                             uint64_t shots,
                             uint64_t seed,
                             struct CvsMoments *bob1,
                             struct CvsMoments *bob2);

/**
 * Parses and elaborates circuit source (UTF-8, NUL-terminated). On parse
 * failure the error message carries `line:column`.
 *
 * # Safety
 * `source` must be a valid C string; `out` a valid pointer.
 */
enum CvsStatus cvs_circuit_parse(const char *source, struct CvsCircuit **out);

/**
 * Frees a circuit handle. NULL is ignored.
 *
 * # Safety
 * `c` must come from `cvs_circuit_parse` and not be freed twice.
 */
void cvs_circuit_free(struct CvsCircuit *c);

/**
 * Number of OUTPUT modes in the circuit.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CvsStatus cvs_circuit_output_count(const struct CvsCircuit *c, uintptr_t *out);

/**
 * Means and variances of a named OUTPUT mode: writes
 * {mean_x, mean_y, var_x, var_y} into `stats`.
 *
 * # Safety
 * Pointers must be valid; `stats` must have room for 4 doubles.
 */
enum CvsStatus cvs_circuit_output_stats(const struct CvsCircuit *c,
                                        const char *name,
                                        double *stats);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CVSWITCH_H */
