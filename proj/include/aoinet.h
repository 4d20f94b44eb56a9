#ifndef AOINET_H
#define AOINET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one of these; on failure the
 * per-thread message from aoinet_last_error() describes what went wrong. */
enum {
  AOINET_OK = 0,
  AOINET_ERR_PARAM = 1,       /* invalid argument values */
  AOINET_ERR_NUMERIC = 2,     /* an iterative scheme missed its tolerance */
  AOINET_ERR_UNSUPPORTED = 3, /* formula used outside its parameter regime */
  AOINET_ERR_DEGENERATE = 4,  /* zero-variance distribution, point mass */
  AOINET_ERR_UNSTABLE = 5,    /* unstable queue, quantity diverges */
  AOINET_ERR_TOPOLOGY = 6,    /* spatial sampling or topology inconsistency */
  AOINET_ERR_INTERNAL = 7     /* anything else */
};

const char* aoinet_version(void);

/* Message attached to the most recent failing call on this thread; empty
 * string if none. The pointer stays valid until the next failing call. */
const char* aoinet_last_error(void);

/* ---- special functions ---- */

int aoinet_reg_inc_beta(double x, double a, double b, double* out);
int aoinet_lower_inc_gamma(double a, double y, double* out);
int aoinet_gauss_2f1(double a, double b, double c, double z, double* out);

/* ---- conditional success probability moments ----
 * theta is the linear SIR threshold; chi is the fraction of queues idle. */

/* b-th moment with full path-loss compensation (eps = 1), interferers
 * active independently per slot. */
int aoinet_moment_closed_form(int b, double theta, double eta, double chi,
                              double* out);

/* Same regime with the interferer population thinned once by 1-chi. */
int aoinet_moment_closed_form_static(int b, double theta, double eta,
                                     double chi, double* out);

/* b-th moment by direct quadrature, valid for 0 < eps <= 1. */
int aoinet_moment_integral(int b, double theta, double eta, double eps,
                           double chi, double* out);

/* ---- success-probability distribution across links ---- */

/* Beta-approximated CCDF at reliability level delta. Returns
 * AOINET_ERR_DEGENERATE when the moment pair has zero variance. */
int aoinet_meta_ccdf(double delta, double m1, double m2, double* out);

/* Same CCDF with the degenerate case folded in as a step at m1. */
int aoinet_meta_ccdf_or_point(double delta, double m1, double m2, double* out);

/* Splits the fitted distribution into n_classes equiprobable classes.
 * d must hold n_classes entries (ascending representative values);
 * boundaries may be NULL or hold n_classes + 1 entries. */
int aoinet_quantize(int n_classes, double m1, double m2, double* d,
                    double* boundaries);

/* ---- per-class queue ---- */

/* Geo/Geo/1 stationary description for arrival probability alpha and
 * service probability d: stability flag, idle probability x0 and the
 * geometric occupancy ratio. Any output pointer may be NULL. */
int aoinet_queue_steady_state(double alpha, double d, int* stable, double* x0,
                              double* ratio);

/* Mean sojourn time in slots; AOINET_ERR_UNSTABLE when alpha >= d. */
int aoinet_mean_sojourn(double alpha, double d, double* out);

/* Sojourn-time PMF over m = 1, 2, ... (index 0 always carries mass 0),
 * truncated once cumulative mass reaches 1 - truncation. Writes up to cap
 * entries into out and stores the full length in *len; a cap smaller than
 * *len means the copy was truncated, not an error. */
int aoinet_sojourn_pmf(double alpha, double d, double truncation, double* out,
                       size_t cap, size_t* len);

/* Peak age per class (1/alpha + mean sojourn) and averaged over classes.
 * Unbounded entries come back as INFINITY. per_class may be NULL; d holds
 * n_classes ascending service probabilities. */
int aoinet_peak_aoi(double alpha, const double* d, int n_classes,
                    double* per_class, double* network);

/* ---- coupled equilibrium ---- */

typedef struct {
  double tol;      /* convergence threshold on successive chi iterates */
  int max_iters;
  double chi_init; /* starting busy fraction, in [0, 1] */
  double damping;  /* 1 = plain fixed-point iteration */
} aoinet_fixed_point_config;

void aoinet_fixed_point_config_default(aoinet_fixed_point_config* cfg);

typedef struct aoinet_equilibrium aoinet_equilibrium;

/* Solves the interference/idleness fixed point and attaches the full
 * downstream bundle (moments, class table, per-class queues, peak age).
 * cfg may be NULL for defaults. Non-convergence is not an error: the call
 * succeeds and aoinet_equilibrium_converged reports 0. The handle must be
 * released with aoinet_equilibrium_free. */
int aoinet_solve(double alpha, double theta, double eta, double eps,
                 int n_classes, const aoinet_fixed_point_config* cfg,
                 aoinet_equilibrium** out);

double aoinet_equilibrium_chi(const aoinet_equilibrium* eq);
int aoinet_equilibrium_converged(const aoinet_equilibrium* eq);
int aoinet_equilibrium_iterations(const aoinet_equilibrium* eq);
void aoinet_equilibrium_moments(const aoinet_equilibrium* eq, double* m1,
                                double* m2);
int aoinet_equilibrium_class_count(const aoinet_equilibrium* eq);

/* One class row, index in [0, class_count). mean_sojourn and peak_aoi are
 * INFINITY for an unstable class. Any output pointer may be NULL. */
int aoinet_equilibrium_class_row(const aoinet_equilibrium* eq, int index,
                                 double* d, int* stable, double* x0,
                                 double* mean_sojourn, double* peak_aoi);

/* Class-averaged peak age; INFINITY when any class is unstable. */
double aoinet_equilibrium_network_peak(const aoinet_equilibrium* eq);

/* CCDF of the success probability at the solved moments, evaluated on a
 * caller-supplied grid; the degenerate case degrades to a step at m1. */
int aoinet_equilibrium_ccdf(const aoinet_equilibrium* eq, const double* deltas,
                            size_t n, double* out);

/* Copies up to cap iterates (starting at chi_init) into out when out is
 * non-NULL; returns the full trajectory length either way. */
size_t aoinet_equilibrium_trajectory(const aoinet_equilibrium* eq, double* out,
                                     size_t cap);

void aoinet_equilibrium_free(aoinet_equilibrium* eq);

/* Largest alpha on the grid (ascending) for which every class is stable,
 * solving each point from the maximal-interference start chi_init = 0.
 * *found is 0 when no grid point qualifies. cfg may be NULL. */
int aoinet_stability_frontier(double theta, double eta, double eps,
                              int n_classes, const double* alpha_grid,
                              size_t n, const aoinet_fixed_point_config* cfg,
                              int* found, double* alpha_out);

/* ---- network simulation ---- */

typedef struct {
  double bs_density;       /* BS per km^2 */
  double area_side;        /* km, square torus */
  double alpha;            /* arrival probability per slot */
  double theta;            /* linear SIR threshold */
  double eta;              /* path-loss exponent */
  double eps;              /* path-loss compensation factor */
  double rho;              /* power-control target, dBm; cancels in SIR */
  uint64_t n_slots_max;    /* measurement slots, also the warmup cap */
  uint64_t warmup_window;  /* slots per steady-state check */
  double steady_tol;
  uint64_t seed;
  int n_realizations;
} aoinet_sim_config;

void aoinet_sim_config_default(aoinet_sim_config* cfg);

typedef struct aoinet_sim_result aoinet_sim_result;

/* Runs n_realizations independent drops on jobs worker threads. Results
 * are identical for any jobs >= 1. The handle must be released with
 * aoinet_sim_free. */
int aoinet_simulate(const aoinet_sim_config* cfg, int jobs,
                    aoinet_sim_result** out);

int aoinet_sim_realization_count(const aoinet_sim_result* res);

/* Per-realization row. mean_sojourn, network_peak and x0_hat are NaN when
 * the realization produced no samples. Any output pointer may be NULL. */
int aoinet_sim_realization_row(const aoinet_sim_result* res, int index,
                               int* steady, uint64_t* warmup_slots,
                               uint64_t* measured_slots, double* mean_sojourn,
                               double* network_peak, double* x0_hat);

/* Empirical CCDF of per-device success rates on a caller-supplied grid,
 * pooling devices with at least min_attempts measured attempts. */
int aoinet_sim_ccdf(const aoinet_sim_result* res, const double* deltas,
                    size_t n, uint64_t min_attempts, double* out);

/* Pooled sojourn and peak means, inclusion counts for the given
 * min_attempts threshold, and whether every realization settled. Any
 * output pointer may be NULL. */
int aoinet_sim_summary(const aoinet_sim_result* res, uint64_t min_attempts,
                       double* mean_sojourn, double* network_peak,
                       uint64_t* devices_included, uint64_t* devices_excluded,
                       int* all_steady);

/* Devices ranked by success rate and split into n_classes equal groups,
 * ascending. Each output array, when non-NULL, must hold n_classes
 * entries; empty groups come back as NaN with devices = 0. */
int aoinet_sim_class_rows(const aoinet_sim_result* res, int n_classes,
                          uint64_t min_attempts, double* mean_success,
                          double* mean_sojourn, double* peak,
                          uint64_t* devices);

void aoinet_sim_free(aoinet_sim_result* res);

#ifdef __cplusplus
}
#endif

#endif /* AOINET_H */
