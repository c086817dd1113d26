/*
 * plastsym — C API for the planar ideal-plasticity symmetry toolkit.
 *
 * Conventions
 * -----------
 * Handles are opaque; create them with the matching *_new/_parse function
 * and release them with the matching *_free (NULL is a no-op there).
 *
 * Every fallible function returns a PLASTSYM_* status code. Out-values are
 * written only on PLASTSYM_OK. A textual description of the most recent
 * failure on the calling thread is available via
 * plastsym_last_error_message(); check-style drivers additionally leave the
 * first failing check's witness there even when they return PLASTSYM_OK.
 *
 * Text is NUL-terminated UTF-8. Producers follow the (buf, cap, needed)
 * protocol: *needed is always set to the required size including the NUL;
 * when cap is too small nothing is written and the call returns
 * PLASTSYM_ERR_BUFFER_TOO_SMALL. Query the size with buf = NULL, cap = 0.
 */

#ifndef PLASTSYM_H
#define PLASTSYM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
enum {
    PLASTSYM_OK = 0,
    PLASTSYM_ERR_NULL_ARGUMENT = 1,
    PLASTSYM_ERR_INVALID_UTF8 = 2,
    PLASTSYM_ERR_PARSE = 3,
    PLASTSYM_ERR_UNBOUND_SYMBOL = 4,
    PLASTSYM_ERR_DOMAIN = 5,
    PLASTSYM_ERR_UNKNOWN_NAME = 6,
    PLASTSYM_ERR_INVALID_ARGUMENT = 7,
    PLASTSYM_ERR_BUFFER_TOO_SMALL = 8,
    PLASTSYM_ERR_EVAL = 9,
    PLASTSYM_ERR_PANIC = 10
};

/* Body-force selectors for plastsym_check_symmetry. */
enum {
    PLASTSYM_FORCE_NONE = 0,
    PLASTSYM_FORCE_MONOGENIC = 1,
    PLASTSYM_FORCE_FRICTION = 2,
    PLASTSYM_FORCE_FRICTION_SPIRAL = 3
};

/* Opaque handles. */
typedef struct plastsym_expr plastsym_expr;
typedef struct plastsym_env plastsym_env;

/* Library version as a static string. */
const char *plastsym_version(void);

/*
 * Copy the calling thread's last error message into buf (truncating if
 * needed, always NUL-terminated when cap > 0). Returns the full length
 * including the NUL.
 */
size_t plastsym_last_error_message(char *buf, size_t cap);

/* ---- Expressions ------------------------------------------------------ */

/*
 * Parse expression text. Grammar: rationals, parameters (rho, kappa1, a1,
 * ...), variables (t, x, y, u, v, sigma, theta, reduction variables),
 * formal functions f(t), + - * / ^, sin cos tan atan acos exp ln sqrt, pi.
 */
int32_t plastsym_expr_parse(const char *text, plastsym_expr **out);
void plastsym_expr_free(plastsym_expr *e);

int32_t plastsym_expr_to_string(const plastsym_expr *e, char *buf, size_t cap,
                                size_t *needed);

/* Exact partial derivative with respect to a named variable. */
int32_t plastsym_expr_diff(const plastsym_expr *e, const char *var,
                           plastsym_expr **out);

/* Evaluate at the bindings held by env. */
int32_t plastsym_expr_eval(const plastsym_expr *e, const plastsym_env *env,
                           double *out);

/*
 * Probabilistic zero test over the default sampling box; *out_is_zero
 * receives 1 when no sampled point refutes the identity at relative
 * tolerance tol.
 */
int32_t plastsym_expr_is_zero(const plastsym_expr *e, uint64_t seed,
                              uint32_t trials, double tol,
                              int32_t *out_is_zero);

/* ---- Evaluation environments ------------------------------------------ */

int32_t plastsym_env_new(plastsym_env **out);
void plastsym_env_free(plastsym_env *env);
int32_t plastsym_env_set_var(plastsym_env *env, const char *name,
                             double value);
int32_t plastsym_env_set_param(plastsym_env *env, const char *name,
                               double value);

/* ---- Verification drivers --------------------------------------------- */

/*
 * Verify the commutation table on polynomial slots 1, t, ..., t^degree.
 * *out_checked receives the number of bracket pairs tested, *out_failed how
 * many were refuted (0 for the correct table).
 */
int32_t plastsym_check_table(uint32_t degree, uint32_t trials, uint64_t seed,
                             double tol, uint32_t *out_checked,
                             uint32_t *out_failed);

/*
 * Infinitesimal symmetry criterion for one generator against a body force.
 * generator: text form (P0, D, L, X[t^2], "D + 2*L", ...) plus "K" for the
 * twist kappa0*P0 + kappa1*D + kappa2*L. vpot is required for the monogenic
 * force and ignored otherwise (may be NULL). h1/h2 are the friction
 * profiles in the slip variable s (NULL means h1 = s, h2 = 1). kappa must
 * point to five doubles for the friction forces; NULL selects
 * {0, 1, 1, 0, 0}. *out_checked is always 4 (one per governing equation).
 */
int32_t plastsym_check_symmetry(const char *generator, int32_t force_kind,
                                const char *vpot, const char *h1,
                                const char *h2, const double *kappa,
                                uint32_t trials, uint64_t seed, double tol,
                                uint32_t *out_checked, uint32_t *out_failed);

/* ---- Exact solutions --------------------------------------------------- */

/* Comma-joined family names. */
int32_t plastsym_family_names(char *buf, size_t cap, size_t *needed);

/*
 * Certify residuals of one family at `points` in-box samples under its
 * default parameters. out_max_abs must point to four doubles and receives
 * the per-equation maxima (equilibrium-x, equilibrium-y, coherence,
 * incompressibility). *out_pass is 1 iff every point evaluated, none was
 * skipped, and the maxima sit inside (tol, tol, tol,
 * tol_incompressibility).
 */
int32_t plastsym_solution_residual(const char *family, uint32_t points,
                                   uint64_t seed, double tol,
                                   double tol_incompressibility,
                                   double *out_max_abs,
                                   uint32_t *out_evaluated,
                                   uint32_t *out_skipped, int32_t *out_pass);

/*
 * Velocity flow field at time t over the square grid "min:max:n", rendered
 * as CSV (comment line with family and parameters, x,y,u,v header, one row
 * per grid point; origin and out-of-domain points are skipped).
 */
int32_t plastsym_flowfield_csv(const char *family, double t, const char *grid,
                               char *buf, size_t cap, size_t *needed);

#ifdef __cplusplus
}
#endif

#endif /* PLASTSYM_H */
