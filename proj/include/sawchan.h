#ifndef SAWCHAN_H
#define SAWCHAN_H

/* C interface to the sawtooth-map dephasing channel library.
 *
 * Every fallible call returns a sawchan_status. On failure a message is
 * available from sawchan_last_error() until the next call on the same
 * thread. Handles are opaque and owned by the caller. */

#include <stddef.h>
#include <stdint.h>

#if defined(SAWCHAN_BUILDING_LIBRARY)
#define SAWCHAN_API __attribute__((visibility("default")))
#else
#define SAWCHAN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sawchan_status {
  SAWCHAN_OK = 0,
  SAWCHAN_INVALID = 1,   /* bad argument or configuration */
  SAWCHAN_RESOURCE = 2,  /* memory budget, file system */
  SAWCHAN_NUMERICAL = 3, /* e.g. density matrix not PSD */
  SAWCHAN_INTERNAL = 4
} sawchan_status;

typedef enum sawchan_coupling {
  SAWCHAN_COUPLING_KICKED = 0,
  SAWCHAN_COUPLING_SINP = 1
} sawchan_coupling;

typedef struct sawchan_torus sawchan_torus;
typedef struct sawchan_state sawchan_state;
typedef struct sawchan_experiment sawchan_experiment;

SAWCHAN_API const char* sawchan_version(void);
SAWCHAN_API const char* sawchan_last_error(void);

/* ---- torus and environment states ---- */

/* phi0/theta0: pass NaN for the default shift sqrt(2)/5. */
SAWCHAN_API sawchan_status sawchan_torus_create(int N, double phi0, double theta0, sawchan_torus** out);
SAWCHAN_API void sawchan_torus_destroy(sawchan_torus* torus);
SAWCHAN_API int sawchan_torus_dimension(const sawchan_torus* torus);
SAWCHAN_API double sawchan_torus_hbar(const sawchan_torus* torus);

SAWCHAN_API sawchan_status sawchan_state_momentum(const sawchan_torus* torus, int index, sawchan_state** out);
SAWCHAN_API sawchan_status sawchan_state_haar(const sawchan_torus* torus, uint64_t seed, sawchan_state** out);
SAWCHAN_API void sawchan_state_destroy(sawchan_state* state);
/* One map period with effective kick strength k_eff. */
SAWCHAN_API sawchan_status sawchan_state_step(sawchan_state* state, double k_eff);
SAWCHAN_API double sawchan_state_norm(const sawchan_state* state);
/* Copies N interleaved (re, im) pairs in momentum order n = -N/2 .. N/2-1. */
SAWCHAN_API sawchan_status sawchan_state_amplitudes(const sawchan_state* state, double* out, size_t out_len);
SAWCHAN_API sawchan_status sawchan_state_overlap(const sawchan_state* a, const sawchan_state* b, double* re,
                                                 double* im);

/* ---- channel ---- */

typedef struct sawchan_channel_params {
  double K;
  double eta;
  int n0;
  int nq;
  sawchan_coupling coupling;
} sawchan_channel_params;

/* Fills out[0..nq-1] with S_e of the unpolarized input for trains of
 * length 1..nq. */
SAWCHAN_API sawchan_status sawchan_entropy_growth(const sawchan_state* omega0, const sawchan_channel_params* params,
                                                  double* out, size_t out_len);
/* Gram matrix G_jl = <omega_l|omega_j>, 4^nq interleaved (re, im), row major. */
SAWCHAN_API sawchan_status sawchan_gram_matrix(const sawchan_state* omega0, const sawchan_channel_params* params,
                                               double* out, size_t out_len);
SAWCHAN_API sawchan_status sawchan_fidelity_decay_rate(const sawchan_state* omega0,
                                                       const sawchan_channel_params* params, double* out);
SAWCHAN_API sawchan_status sawchan_stochastic_rate(double g, double* out);
SAWCHAN_API sawchan_status sawchan_capacity_estimate(double rate, double* out);

/* ---- forgetfulness ---- */

typedef struct sawchan_block_params {
  int N;
  int L;
  double K_transmit;
  double K_idle;
  double eta;
  sawchan_coupling coupling;
  int omega0_momentum; /* nonzero: momentum eigenstate, else Haar */
  int omega0_index;
  uint64_t seed; /* Haar state and optimizer */
  int starts;
  int refinements;
} sawchan_block_params;

SAWCHAN_API sawchan_status sawchan_max_trace_distance(const sawchan_block_params* params, double* out);

/* ---- classical map ---- */

/* out[0..L_max] receives C(L) of the quadratic observable. */
SAWCHAN_API sawchan_status sawchan_autocorrelation(double K, size_t particles, double P0, uint64_t seed, int L_max,
                                                   double* out, size_t out_len);
SAWCHAN_API sawchan_status sawchan_diffusion(double K, int steps, size_t particles, uint64_t seed, double* out);

/* ---- scenarios ---- */

/* scenario uses the CLI spelling, e.g. "entropy-scan". */
SAWCHAN_API sawchan_status sawchan_experiment_create(const char* scenario, sawchan_experiment** out);
SAWCHAN_API sawchan_status sawchan_experiment_load_file(sawchan_experiment* exp, const char* path);
SAWCHAN_API sawchan_status sawchan_experiment_load_text(sawchan_experiment* exp, const char* text);
/* Seed list text such as "1,2,5..9". */
SAWCHAN_API sawchan_status sawchan_experiment_set_seeds(sawchan_experiment* exp, const char* seeds);
SAWCHAN_API sawchan_status sawchan_experiment_set_output(sawchan_experiment* exp, const char* directory);
SAWCHAN_API sawchan_status sawchan_experiment_run(sawchan_experiment* exp, int threads);
/* Valid after a successful run, until the handle is destroyed. */
SAWCHAN_API const char* sawchan_experiment_csv_path(const sawchan_experiment* exp);
SAWCHAN_API void sawchan_experiment_destroy(sawchan_experiment* exp);

/* Summary JSON of a scenario CSV; free with sawchan_free_string. */
SAWCHAN_API sawchan_status sawchan_summarize(const char* csv_path, char** json_out);
SAWCHAN_API void sawchan_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif
