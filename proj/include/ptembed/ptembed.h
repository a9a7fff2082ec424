#ifndef PTEMBED_PTEMBED_H
#define PTEMBED_PTEMBED_H

/*
 * C interface to the ptembed library: Hermitian embedding of N free
 * PT-symmetric spins, post-selected dynamics, central-spin overlaps and
 * the figure-data pipelines.
 *
 * Every fallible call returns a ptembed_status. On failure the message of
 * the most recent error on the calling thread is available through
 * ptembed_last_error(). Handles are opaque and released with the matching
 * *_free function; passing NULL to a *_free function is a no-op.
 *
 * Complex arrays are interleaved (re, im) doubles; matrices are row-major.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PTEMBED_BUILDING_LIBRARY)
#    define PTEMBED_API __declspec(dllexport)
#  else
#    define PTEMBED_API __declspec(dllimport)
#  endif
#else
#  define PTEMBED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ptembed_status {
  PTEMBED_OK = 0,
  PTEMBED_ERR_INVALID_ARGUMENT = 1,
  PTEMBED_ERR_OUT_OF_DOMAIN = 2,
  PTEMBED_ERR_CAP_EXCEEDED = 3,
  PTEMBED_ERR_NOT_HERMITIAN = 4,
  PTEMBED_ERR_NOT_POSITIVE = 5,
  PTEMBED_ERR_NO_CONVERGENCE = 6,
  PTEMBED_ERR_SINGULAR_Q = 7,
  PTEMBED_ERR_BAD_LENGTH = 8,
  PTEMBED_ERR_BAD_SITE = 9,
  PTEMBED_ERR_BAD_INDEX = 10,
  PTEMBED_ERR_DIM_MISMATCH = 11,
  PTEMBED_ERR_NOT_PT_NORMALIZED = 12,
  PTEMBED_ERR_NOT_DENSITY_MATRIX = 13,
  PTEMBED_ERR_NO_BRACKET = 14,
  PTEMBED_ERR_DEGENERATE_FIT = 15,
  PTEMBED_ERR_NULL_POINTER = 16,
  PTEMBED_ERR_BUFFER_TOO_SMALL = 17,
  PTEMBED_ERR_INTERNAL = 18
} ptembed_status;

PTEMBED_API const char* ptembed_status_name(ptembed_status status);
PTEMBED_API const char* ptembed_last_error(void);
PTEMBED_API const char* ptembed_version(void);

/* ---- parameters ---------------------------------------------------- */

typedef struct ptembed_params ptembed_params;

typedef struct ptembed_param_values {
  int n_spins;
  double alpha;
  double theta;
  double theta1;
  double phi1;
  double log_c;
  int dense_cap;
  int construction_cap;
} ptembed_param_values;

PTEMBED_API ptembed_status ptembed_params_from_alpha(int n_spins, double alpha, double theta1, double phi1,
                                                     ptembed_params** out);
PTEMBED_API ptembed_status ptembed_params_from_theta(int n_spins, double theta, double theta1, double phi1,
                                                     ptembed_params** out);
PTEMBED_API ptembed_status ptembed_params_set_caps(ptembed_params* params, int dense_cap, int construction_cap);
PTEMBED_API ptembed_status ptembed_params_get(const ptembed_params* params, ptembed_param_values* out);
PTEMBED_API void ptembed_params_free(ptembed_params* params);

/* ---- scalar helpers ------------------------------------------------ */

PTEMBED_API ptembed_status ptembed_theta_of_alpha(double alpha, double* theta);
PTEMBED_API ptembed_status ptembed_dpmax_log(int n_spins, double theta, double* out);
PTEMBED_API ptembed_status ptembed_phi1_star(int n_spins, double* phi1);

typedef struct ptembed_f_values {
  double f1;
  double f2;
  double f3;
} ptembed_f_values;

PTEMBED_API ptembed_status ptembed_f_values_eval(int n_spins, double beta, double phi1, double theta1,
                                                 ptembed_f_values* out);
/* f3 with phi1 pinned at phi1_star(n_ref) and theta1 = pi/2. */
PTEMBED_API ptembed_status ptembed_pinned_f3(int n_spins, int n_ref, double* f3);
PTEMBED_API ptembed_status ptembed_solve_beta(int n_spins, double f3, double* beta);

/* ---- operators ----------------------------------------------------- */

typedef struct ptembed_model ptembed_model;

typedef enum ptembed_operator {
  PTEMBED_OP_SEED = 0,
  PTEMBED_OP_P = 1,
  PTEMBED_OP_P_INV = 2,
  PTEMBED_OP_Q = 3,
  PTEMBED_OP_ETA = 4,
  PTEMBED_OP_H_PT = 5,
  PTEMBED_OP_A = 6,
  PTEMBED_OP_B = 7,
  PTEMBED_OP_H_TOTAL = 8
} ptembed_operator;

PTEMBED_API ptembed_status ptembed_model_build(const ptembed_params* params, ptembed_model** out);
PTEMBED_API ptembed_status ptembed_model_dim(const ptembed_model* model, ptembed_operator op, size_t* dim);
/* Writes dim*dim complex entries (2*dim*dim doubles). */
PTEMBED_API ptembed_status ptembed_model_copy_operator(const ptembed_model* model, ptembed_operator op,
                                                       double* out, size_t capacity_doubles);
PTEMBED_API ptembed_status ptembed_model_c(const ptembed_model* model, double* c, double* log_c);
PTEMBED_API void ptembed_model_free(ptembed_model* model);

typedef struct ptembed_pauli_list ptembed_pauli_list;

/* Pauli strings of H_T (ancilla factor first), sorted by (weight, label). */
PTEMBED_API ptembed_status ptembed_model_pauli(const ptembed_model* model, double cutoff, ptembed_pauli_list** out);
PTEMBED_API size_t ptembed_pauli_count(const ptembed_pauli_list* list);
PTEMBED_API ptembed_status ptembed_pauli_term(const ptembed_pauli_list* list, size_t index, const char** label,
                                              double* coefficient);
PTEMBED_API void ptembed_pauli_free(ptembed_pauli_list* list);

typedef struct ptembed_n2_coefficients {
  double a1;
  double a2;
  double b1;
  double b2;
  double exchange_asymmetry;
  double resynthesis_residual;
  double max_other_coefficient;
} ptembed_n2_coefficients;

PTEMBED_API ptembed_status ptembed_n2_coefficients_eval(double alpha, ptembed_n2_coefficients* out);

/* ---- dynamics ------------------------------------------------------ */

typedef struct ptembed_trajectory ptembed_trajectory;

typedef struct ptembed_trajectory_row {
  double t;
  double success_prob;
  double failure_prob;
  double pt_norm;
  double euclid_norm;
  double oracle_distance;
  double form_residual;
} ptembed_trajectory_row;

/* psi0 may be NULL for the default P (x)|down_x> state; otherwise it holds
 * 2^N interleaved complex amplitudes (psi0_len = 2^N). */
PTEMBED_API ptembed_status ptembed_trajectory_run(const ptembed_params* params, const double* psi0, size_t psi0_len,
                                                  const double* t_grid, size_t n_times, ptembed_trajectory** out);
PTEMBED_API ptembed_status ptembed_trajectory_size(const ptembed_trajectory* traj, size_t* rows, size_t* bath_dim);
PTEMBED_API ptembed_status ptembed_trajectory_row_get(const ptembed_trajectory* traj, size_t index,
                                                      ptembed_trajectory_row* out);
/* Post-selected (unnormalized) bath state of row `index`: 2*bath_dim doubles. */
PTEMBED_API ptembed_status ptembed_trajectory_state(const ptembed_trajectory* traj, size_t index, double* out,
                                                    size_t capacity_doubles);
PTEMBED_API void ptembed_trajectory_free(ptembed_trajectory* traj);

/* ---- central spin -------------------------------------------------- */

typedef enum ptembed_overlap_method {
  PTEMBED_OVERLAP_DENSE = 0,
  PTEMBED_OVERLAP_BINOMIAL = 1
} ptembed_overlap_method;

typedef struct ptembed_overlap_report {
  double overlap_re;
  double overlap_im;
  double modulus_sq;
  double p2_mean;
  double p2q_mean;
  double dpmax_log;
  double f1;
  double f2;
  double f3;
  double beta;
  double route_difference;
} ptembed_overlap_report;

PTEMBED_API ptembed_status ptembed_overlap(const ptembed_params* params, ptembed_overlap_method method,
                                           ptembed_overlap_report* out);

typedef struct ptembed_darkstate_report {
  double epsilon;
  double eigen_residual;
  double dark_entropy_plus;
  double dark_entropy_minus;
  double bright_entropy;
  double overlap_re;
  double overlap_im;
  double overlap_modulus_sq;
  double spin_flip;
  double commutator_norm;
  double spectrum_residual;
  double dark_residual_plus;
  double dark_residual_minus;
  double splitting;
  double bath_site_entropy;
} ptembed_darkstate_report;

PTEMBED_API ptembed_status ptembed_darkstate(const ptembed_params* params, int k, double m_y,
                                             ptembed_darkstate_report* out);

/* ---- contours and fits --------------------------------------------- */

PTEMBED_API ptembed_status ptembed_log_spaced_sizes(double n_min, double n_max, int n_points, int* out,
                                                    size_t capacity, size_t* count);

typedef struct ptembed_contour ptembed_contour;

/* Bisection in alpha at phi1 = phi1_star(N) for each N; N values whose
 * target is not crossed on [alpha_lo, alpha_hi] are recorded as skipped. */
PTEMBED_API ptembed_status ptembed_contour_trace(double target, const int* n_list, size_t count, double alpha_lo,
                                                 double alpha_hi, double theta1, int threads, ptembed_contour** out);
PTEMBED_API ptembed_status ptembed_contour_size(const ptembed_contour* contour, size_t* points, size_t* skipped);
PTEMBED_API ptembed_status ptembed_contour_point(const ptembed_contour* contour, size_t index, int* n_spins,
                                                 double* alpha, double* residual);
PTEMBED_API ptembed_status ptembed_contour_skip(const ptembed_contour* contour, size_t index, int* n_spins,
                                                const char** reason);
PTEMBED_API void ptembed_contour_free(ptembed_contour* contour);

typedef struct ptembed_fit {
  double a;
  double b;
  double gamma;
  double residual_rms;
} ptembed_fit;

PTEMBED_API ptembed_status ptembed_power_law_fit(const double* n, const double* alpha, size_t count,
                                                 ptembed_fit* out);

typedef struct ptembed_line_fit {
  double slope;
  double intercept;
  double r_squared;
  int used;
} ptembed_line_fit;

/* ln(a - alpha) against ln n over points with n >= n_min. */
PTEMBED_API ptembed_status ptembed_inset_fit(double a, const double* n, const double* alpha, size_t count,
                                             double n_min, ptembed_line_fit* out);

/* ---- verification suite -------------------------------------------- */

typedef struct ptembed_verify_options {
  uint64_t seed;
  double tolerance_override; /* NaN: keep per-check tolerances */
  double orthogonality_theta;
  int max_n;
  int dense_cap;
} ptembed_verify_options;

typedef struct ptembed_check {
  const char* name;
  int passed;
  double residual;
  double tolerance;
  const char* detail;
} ptembed_check;

typedef struct ptembed_verify_report ptembed_verify_report;

PTEMBED_API void ptembed_verify_options_default(ptembed_verify_options* out);
PTEMBED_API ptembed_status ptembed_verify_run(const ptembed_verify_options* options, ptembed_verify_report** out);
PTEMBED_API size_t ptembed_verify_count(const ptembed_verify_report* report);
PTEMBED_API ptembed_status ptembed_verify_check(const ptembed_verify_report* report, size_t index,
                                                ptembed_check* out);
PTEMBED_API void ptembed_verify_free(ptembed_verify_report* report);

#ifdef __cplusplus
}
#endif

#endif /* PTEMBED_PTEMBED_H */
