#ifndef OAMPUMP_H
#define OAMPUMP_H

/* C interface to the OAM pump simulator. All handles are opaque; every
 * function returning oampump_status leaves a message retrievable with
 * oampump_last_error() on the calling thread when it fails. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(OAMPUMP_BUILDING)
#    define OAMPUMP_API __declspec(dllexport)
#  else
#    define OAMPUMP_API __declspec(dllimport)
#  endif
#else
#  define OAMPUMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oampump_status {
  OAMPUMP_OK = 0,
  OAMPUMP_ERR_INVALID_ARGUMENT = 1,
  OAMPUMP_ERR_CONFIG = 2,
  OAMPUMP_ERR_GAP_CLOSED = 3,
  OAMPUMP_ERR_EDGE_LEAK = 4,
  OAMPUMP_ERR_STEP_FAILURE = 5,
  OAMPUMP_ERR_UNSTABLE = 6,
  OAMPUMP_ERR_UNREPRESENTABLE = 7,
  OAMPUMP_ERR_IO = 8,
  OAMPUMP_ERR_BUFFER_TOO_SMALL = 9,
  OAMPUMP_ERR_INTERNAL = 10
} oampump_status;

typedef enum oampump_band { OAMPUMP_BAND_LOWER = 0, OAMPUMP_BAND_UPPER = 1 } oampump_band;

typedef struct oampump_model oampump_model;
typedef struct oampump_trajectory oampump_trajectory;

OAMPUMP_API const char* oampump_version(void);
/* Snake-case name of a status ("gap_closed", ...). */
OAMPUMP_API const char* oampump_status_name(oampump_status status);
/* Process exit code for a status: 0 ok, 2 config error, 3 numerical failure. */
OAMPUMP_API int oampump_exit_code(oampump_status status);
/* Message of the last failure on this thread ("" if none). */
OAMPUMP_API const char* oampump_last_error(void);

/* Lattice model with tunneling amplitudes J0, J1 and alpha0 = alpha1 = pi. */
OAMPUMP_API oampump_status oampump_model_create(double j0, double j1, oampump_model** out);
OAMPUMP_API void oampump_model_destroy(oampump_model* model);

/* Bloch band energies at momentum k and phases (beta0, beta1). */
OAMPUMP_API oampump_status oampump_model_bands(const oampump_model* model, double k, double beta0,
                                               double beta1, double* lower, double* upper);

/* Chern numbers of both bands for the default loop (clockwise when
 * clockwise != 0) on an n_k x n_t grid. */
OAMPUMP_API oampump_status oampump_model_chern(const oampump_model* model, double period,
                                               int clockwise, int n_k, int n_t, int* lower,
                                               int* upper);

/* Pumps the band Wannier state of the cell starting at even site l0 through
 * `cycles` laps of the default loop, sampling every dt (plus half cycles). */
OAMPUMP_API oampump_status oampump_pump_run(const oampump_model* model, double period,
                                            double cycles, int l0, oampump_band band, double dt,
                                            oampump_trajectory** out);
OAMPUMP_API void oampump_trajectory_destroy(oampump_trajectory* traj);
OAMPUMP_API size_t oampump_trajectory_samples(const oampump_trajectory* traj);
OAMPUMP_API oampump_status oampump_trajectory_sample(const oampump_trajectory* traj, size_t index,
                                                     double* time, double* mean_l);
/* P_l at one sample (0 outside the simulated lattice). */
OAMPUMP_API oampump_status oampump_trajectory_probability(const oampump_trajectory* traj,
                                                          size_t index, int l, double* p);

/* Stage digits of a multistage switch. digits receives up to `capacity`
 * entries (stage 0 first); *count is the number of stages. */
OAMPUMP_API oampump_status oampump_plan_switch(long long delta_l, int base, int stages,
                                               int balanced, int* digits, size_t capacity,
                                               size_t* count, double* total_periods);

/* Runs a named experiment from a JSON config document and writes its
 * artifacts into out_dir. seed may be NULL. The JSON summary is copied into
 * summary (NUL-terminated, truncated to len) when summary is not NULL; on
 * failure a JSON error object is copied instead. */
OAMPUMP_API oampump_status oampump_run_experiment(const char* experiment, const char* config_json,
                                                  const char* out_dir, const uint64_t* seed,
                                                  char* summary, size_t len);

#ifdef __cplusplus
}
#endif

#endif /* OAMPUMP_H */
