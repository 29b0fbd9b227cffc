#ifndef PARSIMONY_H
#define PARSIMONY_H

/* C interface to the parsimony matrix-completion library.
 *
 * A pattern describes a partially specified real matrix: fixed entries plus
 * "classes" of tied unknown positions sharing one scalar each. The solvers
 * look for completions whose inverse (square) or Moore-Penrose pseudoinverse
 * (rectangular, full row rank) vanishes at the transposed unknown positions,
 * equivalently stationary points of log|det| (square) or of the log
 * determinant of the positive polar factor (rectangular).
 *
 * Conventions at this boundary:
 *   - indices are 1-based,
 *   - matrices are dense row-major double buffers,
 *   - every fallible call returns a pmc_status; pmc_last_error() gives a
 *     thread-local message for the most recent failure on this thread.
 *
 * Unknown-vector coordinate c corresponds to class c in the order classes
 * were added with pmc_pattern_tie; cells neither specified nor tied when
 * pmc_pattern_finalize runs are appended as singleton classes in row-major
 * order after the explicit classes.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define PMC_API __declspec(dllexport)
#else
#  define PMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pmc_status {
    PMC_OK = 0,
    PMC_ERR_INVALID_ARGUMENT = 1,
    PMC_ERR_PATTERN = 2,
    PMC_ERR_DIMENSION = 3,
    PMC_ERR_SINGULAR = 4,
    PMC_ERR_RANK = 5,
    PMC_ERR_DOMAIN = 6,
    /* solver failure reasons */
    PMC_ERR_SINGULAR_START = 7,
    PMC_ERR_SINGULAR_NEWTON_MATRIX = 8,
    PMC_ERR_MAX_ITERS = 9,
    PMC_ERR_STEP_UNDERFLOW = 10,
    /* accessor misuse / absent optional value */
    PMC_ERR_UNSET = 11,
    PMC_ERR_INTERNAL = 12
} pmc_status;

typedef struct pmc_pattern pmc_pattern;
typedef struct pmc_solution pmc_solution;
typedef struct pmc_solution_set pmc_solution_set;

typedef struct pmc_config {
    double grad_tol;        /* convergence: max |gradient component| below this */
    double dedup_tol;       /* relative x-distance treated as one solution */
    uint64_t max_iters;     /* per solve attempt */
    uint64_t starts;        /* multistart attempts */
    double start_range;     /* <= 0: auto 2*(1+max |specified value|) */
    uint64_t seed;
    double singular_guard;  /* relative distance-from-singularity floor */
} pmc_config;

/* Fill cfg with the defaults: 1e-10, 1e-6, 100, 200, auto, 0, 1e-12. */
PMC_API void pmc_config_init(pmc_config* cfg);

PMC_API const char* pmc_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
PMC_API const char* pmc_last_error(void);

/* Stable name for a solver failure reason (0 singular_start,
 * 1 singular_newton_matrix, 2 max_iters, 3 step_underflow). */
PMC_API const char* pmc_failure_name(int reason);

/* ---- pattern construction ---- */

/* NULL on invalid dimensions. */
PMC_API pmc_pattern* pmc_pattern_new(int64_t rows, int64_t cols);
PMC_API void pmc_pattern_free(pmc_pattern* p);

/* Fix entry (i,j) to value. */
PMC_API pmc_status pmc_pattern_specify(pmc_pattern* p, int64_t i, int64_t j,
                                       double value);

/* Add one class of n tied positions; ij holds i1,j1,i2,j2,...,in,jn. */
PMC_API pmc_status pmc_pattern_tie(pmc_pattern* p, const int64_t* ij, size_t n);

#define PMC_MODE_AUTO 0        /* square iff rows == cols */
#define PMC_MODE_SQUARE 1
#define PMC_MODE_RECTANGULAR 2

/* Complete uncovered cells as singleton classes, validate, and freeze the
 * pattern. No mutation is allowed afterwards; solvers require a finalized
 * pattern. */
PMC_API pmc_status pmc_pattern_finalize(pmc_pattern* p, int mode);

PMC_API int64_t pmc_pattern_rows(const pmc_pattern* p);
PMC_API int64_t pmc_pattern_cols(const pmc_pattern* p);
/* Unknown count; -1 before finalize. */
PMC_API int64_t pmc_pattern_k(const pmc_pattern* p);
/* 1 when finalized rectangular, 0 when square, -1 before finalize. */
PMC_API int pmc_pattern_rectangular(const pmc_pattern* p);

/* ---- structural pre-check (square patterns; others come back clear) ---- */

#define PMC_WARN_SINGLE_ROW 1u      /* all unknowns in one row */
#define PMC_WARN_SINGLE_COL 2u      /* all unknowns in one column */
#define PMC_WARN_CONSTANT_SLOPE 4u  /* det affine with constant nonzero slope
                                       in some singleton class */

/* flags gets the bitmask above. slope_classes (may be NULL) receives up to
 * capacity 1-based indices of the offending classes; *n_slope gets the full
 * count. A warning means no stationary completion can exist along the
 * flagged direction. */
PMC_API pmc_status pmc_precheck(const pmc_pattern* p, uint32_t* flags,
                                int64_t* slope_classes, size_t capacity,
                                size_t* n_slope);

/* ---- solvers ---- */

/* Seeded multistart search. Always returns a set on valid input; finding no
 * solutions is not an error. Deterministic for fixed (pattern, config). */
PMC_API pmc_status pmc_complete(const pmc_pattern* p, const pmc_config* cfg,
                                pmc_solution_set** out);

/* One damped-Newton run from x0 (length k). On failure returns the reason
 * as the status. */
PMC_API pmc_status pmc_refine(const pmc_pattern* p, const pmc_config* cfg,
                              const double* x0, size_t k, pmc_solution** out);

/* Evaluate the completion at a fixed x without solving: assembled matrix,
 * (pseudo)inverse, objective, gradient, residuals, classification. Fails
 * with PMC_ERR_SINGULAR / PMC_ERR_RANK at infeasible points. */
PMC_API pmc_status pmc_probe(const pmc_pattern* p, const double* x, size_t k,
                             pmc_solution** out);

/* Maximum-entropy positive definite completion (symmetric patterns only).
 * The solution carries its entropy. */
PMC_API pmc_status pmc_dempster(const pmc_pattern* p, const pmc_config* cfg,
                                pmc_solution** out);

/* Dual parametrization for square untied patterns: solves for the inverse on
 * the transposed-specified support. lambda_init (length = number of
 * specified entries, ordered like pmc_pattern_specify calls) may be NULL. */
PMC_API pmc_status pmc_dual(const pmc_pattern* p, const pmc_config* cfg,
                            const double* lambda_init, pmc_solution** out);

/* Compare the analytic gradient against central finite differences at
 * `samples` random feasible points (step 1e-6 scaled per coordinate; points
 * within 1e-3 relative of singularity are redrawn). Reports the worst
 * per-coordinate relative error and where it occurred. Fails with
 * PMC_ERR_DOMAIN when no feasible probe point can be drawn. */
PMC_API pmc_status pmc_gradcheck(const pmc_pattern* p, uint64_t samples,
                                 uint64_t seed, double range,
                                 double* worst_rel, int64_t* worst_class,
                                 uint64_t* samples_used);

/* Differential entropy (1/2) log det + (n/2)(1 + log 2 pi) of a symmetric
 * positive definite n x n matrix. */
PMC_API pmc_status pmc_entropy(const double* sigma, int64_t n, double* out);

/* Solve a linear system through the completion. side_right = 0: X solves
 * sigma X = B, B is n x q, X is n x q (square completions only).
 * side_right = 1: X = B pinv, B is m x cols(sigma), X is m x rows(sigma).
 * out must hold the result; zeros_exploited (may be NULL) gets the count of
 * (pseudo)inverse entries below the zero threshold. */
PMC_API pmc_status pmc_apply(const pmc_solution* s, const double* b,
                             int64_t b_rows, int64_t b_cols, int side_right,
                             double* out, uint64_t* zeros_exploited);

/* ---- solution sets ---- */

PMC_API size_t pmc_set_count(const pmc_solution_set* ss);
/* Borrowed pointer, valid while the set lives; NULL when idx out of range. */
PMC_API const pmc_solution* pmc_set_solution(const pmc_solution_set* ss,
                                             size_t idx);
PMC_API uint64_t pmc_set_attempts(const pmc_solution_set* ss);
/* Tally for a failure reason (see pmc_failure_name). */
PMC_API uint64_t pmc_set_failures(const pmc_solution_set* ss, int reason);
PMC_API void pmc_set_free(pmc_solution_set* ss);

/* ---- solutions ---- */

PMC_API size_t pmc_solution_k(const pmc_solution* s);
PMC_API int64_t pmc_solution_rows(const pmc_solution* s);
PMC_API int64_t pmc_solution_cols(const pmc_solution* s);
/* out: k doubles. */
PMC_API pmc_status pmc_solution_x(const pmc_solution* s, double* out);
/* out: rows*cols doubles, row-major. */
PMC_API pmc_status pmc_solution_sigma(const pmc_solution* s, double* out);
/* The inverse (square) or pseudoinverse (rectangular); cols x rows, so out
 * needs rows*cols doubles either way. */
PMC_API pmc_status pmc_solution_inv(const pmc_solution* s, double* out);
PMC_API double pmc_solution_objective(const pmc_solution* s);
/* out: k doubles. */
PMC_API pmc_status pmc_solution_gradient(const pmc_solution* s, double* out);
PMC_API double pmc_solution_grad_norm(const pmc_solution* s);

/* Residual map: one entry per unknown position (i,j), giving the
 * (pseudo)inverse value at the transposed position (j,i). */
PMC_API size_t pmc_solution_residual_count(const pmc_solution* s);
PMC_API pmc_status pmc_solution_residual(const pmc_solution* s, size_t idx,
                                         int64_t* i, int64_t* j, double* value);
/* Entries of the (pseudo)inverse strictly below this count as zeros. */
PMC_API double pmc_solution_zero_threshold(const pmc_solution* s);

PMC_API pmc_status pmc_solution_flags(const pmc_solution* s, int* symmetric,
                                      int* toeplitz, int* positive_definite,
                                      uint64_t* zero_count);

/* Multistart provenance; -1 when the solution did not come from multistart. */
PMC_API int64_t pmc_solution_start_index(const pmc_solution* s);
PMC_API int64_t pmc_solution_iterations(const pmc_solution* s);

/* PMC_ERR_UNSET unless the solution came from pmc_dempster. */
PMC_API pmc_status pmc_solution_entropy(const pmc_solution* s, double* out);

PMC_API void pmc_solution_free(pmc_solution* s);

#ifdef __cplusplus
}
#endif

#endif /* PARSIMONY_H */
