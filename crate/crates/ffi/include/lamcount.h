/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef LAMCOUNT_H
#define LAMCOUNT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_SPEC = 2,
  LC_STATUS_PARSE = 3,
  LC_STATUS_DECODE = 4,
  LC_STATUS_RESOURCE_LIMIT = 5,
  LC_STATUS_NUMERIC = 6,
  LC_STATUS_ATTEMPTS_EXHAUSTED = 7,
  LC_STATUS_INVALID_ARGUMENT = 8,
  LC_STATUS_PANIC = 9,
} LcStatus;

/**
 * Counting family selector for [`lc_count`].
 */
typedef enum {
  /**
   * Terms with openness at most `m`.
   */
  LC_FAMILY_M_OPEN = 0,
  /**
   * All terms; `m` is ignored.
   */
  LC_FAMILY_UNRESTRICTED = 1,
  /**
   * m-open terms with every index at most `param`.
   */
  LC_FAMILY_BOUNDED_SUCCESSORS = 2,
  /**
   * m-open terms with exactly `param` abstractions.
   */
  LC_FAMILY_Q_ABSTRACTIONS = 3,
  /**
   * m-open terms with at most `param` abstractions.
   */
  LC_FAMILY_AT_MOST_Q = 4,
  LC_FAMILY_NORMAL_FORM = 5,
  /**
   * The superclass with truncation level `param`.
   */
  LC_FAMILY_SUPERCLASS = 6,
  /**
   * Terms that are not m-open.
   */
  LC_FAMILY_NOT_M_OPEN = 7,
} LcFamily;

typedef enum {
  /**
   * Decimal indices: `λλ2 1`.
   */
  LC_STYLE_INTEGERS = 0,
  /**
   * Successor strings: `λλ((S0) 0)`.
   */
  LC_STYLE_SUCCESSORS = 1,
} LcStyle;

/**
 * Boltzmann sampler; each call to `lc_sampler_sample` uses the next
 * random stream of the seed.
 */
typedef struct LcSampler LcSampler;

/**
 * A validated size model.
 */
typedef struct LcSpec LcSpec;

/**
 * A lambda term.
 */
typedef struct LcTerm LcTerm;

typedef struct {
  double rho;
  double a_inf;
  double b_inf;
  double tolerance;
} LcSingularData;

typedef struct {
  double rho_tilde;
  double ratio;
} LcNormalFormSingularity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *lc_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void lc_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
LcStatus lc_spec_new(int64_t a, int64_t b, int64_t c, int64_t d, LcSpec **out);

/**
 * Looks up `natural`, `less-natural` or `binary`.
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be valid for writes.
 */
LcStatus lc_spec_preset(const char *name, LcSpec **out);

/**
 * # Safety
 * `spec` must be null or a handle from `lc_spec_new`/`lc_spec_preset`
 * that has not been freed.
 */
void lc_spec_free(LcSpec *spec);

/**
 * Exact count as a decimal string, written to `out`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
LcStatus lc_count(const LcSpec *spec,
                  LcFamily family,
                  uint64_t param,
                  uint64_t m,
                  uint64_t n,
                  char **out);

/**
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
LcStatus lc_dominant_singularity(const LcSpec *spec, LcSingularData *out);

/**
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
LcStatus lc_normal_form_singularity(const LcSpec *spec, LcNormalFormSingularity *out);

/**
 * Superclass estimate `C(m, N)` of the constant in
 * `L_{m,n} ~ C n^(-3/2) rho^(-n)`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
LcStatus lc_leading_constant(const LcSpec *spec, uint64_t m, uint64_t top, double *out);

/**
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
LcStatus lc_sampler_new(const LcSpec *spec, uint64_t top, uint64_t seed, LcSampler **out);

/**
 * Draws a term with openness at most `m` and size in `[min_size, max_size]`.
 *
 * # Safety
 * `s` must be a live sampler; `out` must be valid for writes.
 */
LcStatus lc_sampler_sample(LcSampler *s,
                           uint64_t m,
                           uint64_t min_size,
                           uint64_t max_size,
                           uint64_t max_attempts,
                           LcTerm **out);

/**
 * # Safety
 * `s` must be null or a live sampler.
 */
void lc_sampler_free(LcSampler *s);

/**
 * # Safety
 * `src` must be a nul-terminated string; `out` must be valid for writes.
 */
LcStatus lc_term_parse(const char *src, LcTerm **out);

/**
 * # Safety
 * `t` must be a live term; `out` must be valid for writes.
 */
LcStatus lc_term_render(const LcTerm *t, LcStyle style, char **out);

/**
 * Size of `t` under `spec`; fails with `ResourceLimit` above `2^64 - 1`.
 *
 * # Safety
 * `spec` and `t` must be live handles; `out` must be valid for writes.
 */
LcStatus lc_term_size(const LcSpec *spec, const LcTerm *t, uint64_t *out);

/**
 * # Safety
 * `t` must be a live term; `out` must be valid for writes.
 */
LcStatus lc_term_encode_blc(const LcTerm *t, char **out);

/**
 * # Safety
 * `bits` must be a nul-terminated string; `out` must be valid for writes.
 */
LcStatus lc_term_decode_blc(const char *bits, LcTerm **out);

/**
 * # Safety
 * `t` must be a live term; `out` must be valid for writes.
 */
LcStatus lc_term_openness(const LcTerm *t, uint64_t *out);

/**
 * # Safety
 * `t` must be a live term; `out` must be valid for writes.
 */
LcStatus lc_term_is_normal_form(const LcTerm *t, bool *out);

/**
 * # Safety
 * `t` must be null or a live term.
 */
void lc_term_free(LcTerm *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMCOUNT_H */
