#ifndef TORAL_H
#define TORAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ToralStatus {
  TORAL_STATUS_OK = 0,
  TORAL_STATUS_NULL_POINTER = 1,
  TORAL_STATUS_INVALID_ARGUMENT = 2,
  TORAL_STATUS_DIMENSION_MISMATCH = 3,
  TORAL_STATUS_OVERFLOW = 4,
  TORAL_STATUS_RESOURCE = 5,
  TORAL_STATUS_NON_CONVERGENCE = 6,
  TORAL_STATUS_CERTIFICATE = 7,
  TORAL_STATUS_UNSUPPORTED = 8,
  TORAL_STATUS_DEGENERATE = 9,
  TORAL_STATUS_EMPTY = 10,
  TORAL_STATUS_IO = 11,
  TORAL_STATUS_JSON = 12,
  TORAL_STATUS_UTF8 = 13,
  TORAL_STATUS_OUT_OF_RANGE = 14,
  TORAL_STATUS_PANIC = 15,
} ToralStatus;

/**
 * Gram matrix spectrum of a shell against a measure.
 */
typedef struct ToralGram ToralGram;

/**
 * Measure on the torus.
 */
typedef struct ToralMeasure ToralMeasure;

/**
 * Lattice shell `{k ∈ Z^d : |k|² = n}`.
 */
typedef struct ToralShell ToralShell;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *toral_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * excluding the terminator, or 0 if there is none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t toral_last_error(char *buf, size_t len);

/**
 * Number of representations of `n` as an ordered sum of `d` squares.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum ToralStatus toral_sum_of_squares_count(size_t d, int64_t n, uint64_t *out);

/**
 * Enumerates the shell `|k|² = n` in `Z^d`.
 *
 * # Safety
 * `out` must be valid for writing. The handle must be released with
 * [`toral_shell_free`].
 */
enum ToralStatus toral_shell_new(size_t d, int64_t n, struct ToralShell **out);

/**
 * # Safety
 * `shell` must be null or a handle from [`toral_shell_new`].
 */
size_t toral_shell_len(const struct ToralShell *shell);

/**
 * # Safety
 * `shell` must be null or a handle from [`toral_shell_new`].
 */
size_t toral_shell_dim(const struct ToralShell *shell);

/**
 * Writes point `index` (in lexicographic order) into `out[0..dim]`.
 *
 * # Safety
 * `shell` must be a live handle and `out` valid for `dim` writes.
 */
enum ToralStatus toral_shell_point(const struct ToralShell *shell, size_t index, int64_t *out);

/**
 * # Safety
 * `shell` must be null or a handle not yet freed.
 */
void toral_shell_free(struct ToralShell *shell);

/**
 * Parses a measure from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writing.
 */
enum ToralStatus toral_measure_from_json(const char *json, struct ToralMeasure **out);

/**
 * # Safety
 * `m` must be null or a handle from [`toral_measure_from_json`].
 */
size_t toral_measure_dim(const struct ToralMeasure *m);

/**
 * Fourier coefficient `μ̂(k)` for `k = k[0..dim]`.
 *
 * # Safety
 * `m` must be a live handle, `k` valid for `dim` reads, `re` and `im` valid
 * for writing.
 */
enum ToralStatus toral_measure_fourier_coeff(const struct ToralMeasure *m,
                                             const int64_t *k,
                                             size_t dim,
                                             double *re,
                                             double *im);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void toral_measure_free(struct ToralMeasure *m);

/**
 * Assembles and diagonalizes the Gram matrix of `shell` against `m`.
 * `cap = 0` selects the default size cap.
 *
 * # Safety
 * `shell` and `m` must be live handles and `out` valid for writing.
 */
enum ToralStatus toral_gram_new(const struct ToralShell *shell,
                                const struct ToralMeasure *m,
                                size_t cap,
                                struct ToralGram **out);

/**
 * Smallest and largest eigenvalue.
 *
 * # Safety
 * `g` must be a live handle; `lambda_min` and `lambda_max` valid for writing.
 */
enum ToralStatus toral_gram_extremes(const struct ToralGram *g,
                                     double *lambda_min,
                                     double *lambda_max);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t toral_gram_dim(const struct ToralGram *g);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void toral_gram_free(struct ToralGram *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORAL_H */
