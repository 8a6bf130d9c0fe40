#ifndef IMPULSE_GEO_H
#define IMPULSE_GEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum IgStatus {
  IG_STATUS_OK = 0,
  IG_STATUS_NULL_POINTER = 1,
  IG_STATUS_INVALID_INPUT = 2,
  IG_STATUS_DOMAIN = 3,
  IG_STATUS_INTEGRATION = 4,
  IG_STATUS_NUMERICAL = 5,
  IG_STATUS_PANIC = 6,
  IG_STATUS_OUT_OF_RANGE = 7,
} IgStatus;

// An integrated regularized geodesic.
typedef struct IgPath IgPath;

// A wave space-time: manifold, profile and delta net.
typedef struct IgWave IgWave;

// Plain-data copy of an existence certificate.
typedef struct IgCertificate {
  double eps;
  double alpha;
  double eps0;
  double b;
  double c;
  double i2_radius;
  double norm_f1;
  double norm_f2;
  double k;
  double lip_f1;
  double lip_f2;
} IgCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
size_t ig_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ig_version(void);

// Builds one of the built-in scenarios' space-times, e.g.
// `("hyperbolic-half-plane", "gaussian-bump", "mollifier")`.
enum IgStatus ig_wave_builtin(const char *manifold,
                              const char *profile,
                              const char *net,
                              struct IgWave **out);

// Builds the space-time described by a TOML scenario configuration.
enum IgStatus ig_wave_from_config(const char *toml, struct IgWave **out);

void ig_wave_free(struct IgWave *wave);

// Dimension of the spatial manifold, or 0 for a null handle.
size_t ig_wave_dim(const struct IgWave *wave);

// Integrates from `u = -1` to `u_end`; `x0` and `xdot0` have `ig_wave_dim`
// entries. `tol <= 0` selects the default tolerance.
enum IgStatus ig_integrate(const struct IgWave *wave,
                           double eps,
                           const double *x0,
                           const double *xdot0,
                           double v0,
                           double vdot0,
                           double u_end,
                           double tol,
                           struct IgPath **out);

void ig_path_free(struct IgPath *path);

// State at `u`; any output pointer may be null. `x` and `xdot` receive
// `ig_wave_dim` entries.
enum IgStatus ig_path_state_at(const struct IgPath *path,
                               double u,
                               double *x,
                               double *xdot,
                               double *v,
                               double *vdot);

// Largest relative drift of `g(γ', γ')` along the path.
enum IgStatus ig_path_energy_drift(const struct IgPath *path, double *out);

// Existence certificate for data at `u = -1`. With `eps > 0` the
// certificate is centred on the entry state at `u = -eps`; with `eps <= 0`
// a self-consistent `eps` is searched for.
enum IgStatus ig_certify(const struct IgWave *wave,
                         const double *x0,
                         const double *xdot0,
                         double eps,
                         double b,
                         double c,
                         struct IgCertificate *out);

// Jump and kink coefficients of the limit `v` at the shock.
enum IgStatus ig_limit_coefficients(const struct IgWave *wave,
                                    const double *x0,
                                    const double *xdot0,
                                    double *jump,
                                    double *kink);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMPULSE_GEO_H */
