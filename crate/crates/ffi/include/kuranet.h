#ifndef KURANET_H
#define KURANET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KnStatus {
  KN_STATUS_OK = 0,
  /**
   * Malformed input: bad graph, parameters, plan or configuration.
   */
  KN_STATUS_INVALID_INPUT = 1,
  /**
   * A checked condition does not hold.
   */
  KN_STATUS_CHECK_FAILED = 2,
  /**
   * The computation failed at run time (non-finite state, horizon too short).
   */
  KN_STATUS_RUNTIME = 3,
  /**
   * The instance lies outside the sufficient regime; the report is still produced.
   */
  KN_STATUS_VACUOUS = 4,
  KN_STATUS_NULL_POINTER = 5,
  KN_STATUS_INVALID_UTF8 = 6,
  KN_STATUS_PANIC = 7,
} KnStatus;

/**
 * Opaque weighted graph.
 */
typedef struct KnGraph KnGraph;

/**
 * Opaque sampled trajectory.
 */
typedef struct KnTrajectory KnTrajectory;

typedef struct KnGraphConstants {
  size_t n;
  size_t r;
  size_t card_e;
  size_t card_ec;
  double lambda1;
  double a_u;
  double a_l;
} KnGraphConstants;

/**
 * Model parameters; `omega_natural` points at `n` values, `n` taken from the graph.
 */
typedef struct KnParams {
  double m;
  double coupling_k;
  double alpha;
  const double *omega_natural;
} KnParams;

typedef struct KnDiagSample {
  double t;
  double d_theta;
  double d_omega;
  double e1;
  double e2;
} KnDiagSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null.
 * Valid until the next call into this library on the same thread.
 */
const char *kn_last_error(void);

/**
 * Builds a graph from a row-major `n × n` weight matrix.
 *
 * # Safety
 * `weights` must point at `n * n` readable doubles; `out` must be writable.
 */
enum KnStatus kn_graph_from_matrix(size_t n, const double *weights, struct KnGraph **out);

/**
 * Builds a graph from a JSON graph spec such as `{"kind": "ring", "n": 5}`.
 *
 * # Safety
 * `spec_json` must be a nul-terminated string; `out` must be writable.
 */
enum KnStatus kn_graph_generate_json(const char *spec_json, struct KnGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle from this library not yet freed.
 */
void kn_graph_free(struct KnGraph *graph);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t kn_graph_n(const struct KnGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum KnStatus kn_graph_is_connected(const struct KnGraph *graph, bool *out);

/**
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum KnStatus kn_graph_constants(const struct KnGraph *graph, struct KnGraphConstants *out);

/**
 * Writes `θ̇` and `ω̇` for the given state.
 *
 * # Safety
 * All arrays hold `n` doubles, `n` being the graph's vertex count.
 */
enum KnStatus kn_phase_rhs(const struct KnGraph *graph,
                           const struct KnParams *params,
                           const double *theta,
                           const double *omega,
                           double *dtheta_out,
                           double *domega_out);

/**
 * Phase energy of a state with `n` oscillators.
 *
 * # Safety
 * `params.omega_natural`, `theta` and `omega` hold `n` doubles; `out` is writable.
 */
enum KnStatus kn_energy_e1(size_t n,
                           const struct KnParams *params,
                           const double *theta,
                           const double *omega,
                           double *out);

/**
 * Frequency energy, which needs the graph for `ω̇`.
 *
 * # Safety
 * As [`kn_phase_rhs`]; `out` is writable.
 */
enum KnStatus kn_energy_e2(const struct KnGraph *graph,
                           const struct KnParams *params,
                           const double *theta,
                           const double *omega,
                           double *out);

/**
 * Integrates from `t = 0` with fixed-step RK4.
 *
 * # Safety
 * As [`kn_phase_rhs`] for the arrays; `out` is writable.
 */
enum KnStatus kn_integrate(const struct KnGraph *graph,
                           const struct KnParams *params,
                           const double *theta0,
                           const double *omega0,
                           double dt,
                           double t_max,
                           uint64_t sample_every,
                           struct KnTrajectory **out);

/**
 * # Safety
 * `traj` must be null or a handle from this library not yet freed.
 */
void kn_trajectory_free(struct KnTrajectory *traj);

/**
 * Sample count, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t kn_trajectory_len(const struct KnTrajectory *traj);

/**
 * Oscillator count, or 0 for a null or empty handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t kn_trajectory_n(const struct KnTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be writable.
 */
enum KnStatus kn_trajectory_diag(const struct KnTrajectory *traj,
                                 size_t index,
                                 struct KnDiagSample *out);

/**
 * Copies sample `index` into `theta_out` and `omega_out` (`n` doubles each) and its time into `t_out`.
 *
 * # Safety
 * `traj` must be a live handle; the output pointers must be writable.
 */
enum KnStatus kn_trajectory_state(const struct KnTrajectory *traj,
                                  size_t index,
                                  double *t_out,
                                  double *theta_out,
                                  double *omega_out);

/**
 * Assumption report JSON for a run configuration. Returns `CheckFailed` with
 * the report still written when some condition fails.
 *
 * # Safety
 * `config_json` must be a nul-terminated string; `report_out` must be writable.
 */
enum KnStatus kn_check_json(const char *config_json, char **report_out);

/**
 * Verification report JSON; the status follows the `verify` command.
 *
 * # Safety
 * As [`kn_check_json`].
 */
enum KnStatus kn_verify_json(const char *config_json, char **report_out);

/**
 * The `simulate` CSV; `full` appends the state columns.
 *
 * # Safety
 * As [`kn_check_json`].
 */
enum KnStatus kn_simulate_csv(const char *config_json, bool full, char **csv_out);

/**
 * The `scan` CSV; `CheckFailed` when no grid point qualifies.
 *
 * # Safety
 * As [`kn_check_json`].
 */
enum KnStatus kn_scan_csv(const char *config_json, char **csv_out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void kn_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KURANET_H */
