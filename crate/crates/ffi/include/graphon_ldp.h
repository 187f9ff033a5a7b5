#ifndef GRAPHON_LDP_H
#define GRAPHON_LDP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GL_OK 0

#define GL_ERR_INTERNAL 1

#define GL_ERR_NULL_POINTER 2

#define GL_ERR_INVALID_INPUT 3

#define GL_ERR_PARSE 4

#define GL_ERR_IO 5

#define GL_ERR_DOMAIN 6

#define GL_ERR_NUMERICAL 7

#define GL_ERR_CAPACITY 8

#define GL_ERR_INFEASIBLE 9

#define GL_ERR_SAMPLING 10

#define GL_ERR_PANIC 11

// Opaque step graphon.
typedef struct GlGraphon GlGraphon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *gl_last_error(void);

// Library version as a static string.
const char *gl_version(void);

// Builds a graphon from `k` block weights and a row-major `k*k` value table.
//
// # Safety
// `weights` and `values` must point to `k` and `k*k` doubles.
int32_t gl_graphon_new(size_t k,
                       const double *weights,
                       const double *values,
                       struct GlGraphon **out);

// Parses `{"block_weights": [...], "values": [[...], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string.
int32_t gl_graphon_from_json(const char *json, struct GlGraphon **out);

// Serializes a graphon; free the string with `gl_string_free`.
//
// # Safety
// `g` must be a live handle.
int32_t gl_graphon_to_json(const struct GlGraphon *g, char **out);

// # Safety
// `g` must be NULL or a live handle; it is invalid afterwards.
void gl_graphon_free(struct GlGraphon *g);

// # Safety
// `s` must be NULL or a string returned by this library.
void gl_string_free(char *s);

// Number of blocks, 0 for NULL.
//
// # Safety
// `g` must be NULL or a live handle.
size_t gl_graphon_block_count(const struct GlGraphon *g);

// Exact cut norm of `a - b`.
//
// # Safety
// Handles must be live; `out` must be writable.
int32_t gl_cut_norm_distance(const struct GlGraphon *a, const struct GlGraphon *b, double *out);

// Upper bound on the cut metric over block relabelings; `exact` nonzero
// examines every permutation (at most 8 aligned blocks).
//
// # Safety
// Handles must be live; `out` must be writable.
int32_t gl_cut_metric_upper(const struct GlGraphon *a,
                            const struct GlGraphon *b,
                            int32_t exact,
                            double *out);

// L1 (`p == 1`) or L2 (`p == 2`) distance.
//
// # Safety
// Handles must be live; `out` must be writable.
int32_t gl_lp_distance(const struct GlGraphon *a,
                       const struct GlGraphon *b,
                       int32_t p,
                       double *out);

// `I_{W0}(W)`; infinite values are written as `INFINITY`.
//
// # Safety
// Handles must be live; `out` must be writable.
int32_t gl_relative_entropy(const struct GlGraphon *w, const struct GlGraphon *w0, double *out);

// # Safety
// `w` must be live; `out` must be writable.
int32_t gl_entropy_he(const struct GlGraphon *w, double *out);

// Homomorphism density of a pattern such as `triangle`, `cycle4` or
// `3:1-2,2-3`.
//
// # Safety
// `pattern` must be NUL-terminated, `w` live and `out` writable.
int32_t gl_subgraph_density(const char *pattern, const struct GlGraphon *w, double *out);

// Writes 1 to `out` when the `n` degrees are graphical, else 0.
//
// # Safety
// `degrees` must point to `n` values; `out` must be writable.
int32_t gl_erdos_gallai(const uint32_t *degrees_ptr, size_t n, int32_t *out);

// β-model fit; writes `n` values to `beta_out`.
//
// # Safety
// `degrees` must point to `n` values and `beta_out` to room for `n` doubles.
int32_t gl_solve_beta(const uint32_t *degrees_ptr,
                      size_t n,
                      double tol,
                      size_t max_iter,
                      double *beta_out);

// Exact number of labeled graphs with the given degrees (n at most 16);
// `GL_ERR_CAPACITY` when it does not fit in 64 bits.
//
// # Safety
// `degrees` must point to `n` values; `out` must be writable.
int32_t gl_count_graphs(const uint32_t *degrees_ptr, size_t n, uint64_t *out);

// Relative residual of the finite-n identity between the β-model and the
// uniform law on graphs with degrees `d`.
//
// # Safety
// `degrees` must point to `n` values; `out` must be writable.
int32_t gl_verify_identity(const uint32_t *degrees_ptr, size_t n, double *out);

// `W_D` on `k` equal blocks for the step degree function with `pieces`
// values on the intervals between `pieces + 1` breakpoints from 0 to 1.
//
// # Safety
// `breakpoints` and `values` must point to `pieces + 1` and `pieces` doubles.
int32_t gl_limit_graphon(const double *breakpoints,
                         const double *values,
                         size_t pieces,
                         size_t k,
                         struct GlGraphon **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHON_LDP_H */
