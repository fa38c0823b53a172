#ifndef XEB_H
#define XEB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum XebStatus {
  XEB_STATUS_OK = 0,
  XEB_STATUS_INVALID_PARAMETER = 1,
  XEB_STATUS_OUT_OF_RANGE = 2,
  XEB_STATUS_RESOURCE_LIMIT = 3,
  XEB_STATUS_IO = 4,
  XEB_STATUS_FORMAT = 5,
  XEB_STATUS_NULL_POINTER = 6,
  XEB_STATUS_PANIC = 7,
} XebStatus;

// Estimator selector, passed as `uint32_t`.
typedef enum XebMode {
  XEB_MODE_EMPIRICAL_NAIVE = 0,
  XEB_MODE_EMPIRICAL_LOGSPACE = 1,
  XEB_MODE_TRUE_BRUTEFORCE = 2,
  XEB_MODE_TRUE_CLOSEDFORM = 3,
} XebMode;

// Opaque batch of samples with their log-probabilities.
typedef struct XebBatch XebBatch;

// Opaque weight table.
typedef struct XebTable XebTable;

// One XEB value. `samples` is 0 for true values; `stderr` is NaN when
// `has_stderr` is false.
typedef struct XebEstimate {
  size_t n;
  size_t d;
  uint64_t samples;
  uint32_t mode;
  double value;
  double log1p_value;
  double stderr;
  bool has_stderr;
} XebEstimate;

typedef struct XebAdvantage {
  double log10_enum_seconds;
  double log10_enum_years;
  double log10_per_sample_seconds;
  double log10_advantage;
} XebAdvantage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *xeb_last_error(void);

// Library version as a static NUL-terminated string.
const char *xeb_version(void);

// Random table with `n` rows of `d` weights, reproducible from `seed`.
//
// # Safety
// `out_table` must be valid for writes.
enum XebStatus xeb_table_generate(size_t n, size_t d, uint64_t seed, struct XebTable **out_table);

// Table with uniform rows.
//
// # Safety
// `out_table` must be valid for writes.
enum XebStatus xeb_table_uniform(size_t n, size_t d, struct XebTable **out_table);

// Table from `n * d` row-major weights; each row must sum to 1.
//
// # Safety
// `weights` must point to `n * d` readable doubles; `out_table` must be
// valid for writes.
enum XebStatus xeb_table_from_weights(size_t n,
                                      size_t d,
                                      const double *weights,
                                      uint64_t seed,
                                      struct XebTable **out_table);

// Reads a table from a JSON file.
//
// # Safety
// `path` must be a NUL-terminated string; `out_table` must be valid for
// writes.
enum XebStatus xeb_table_load(const char *path, struct XebTable **out_table);

// Writes a table as JSON, atomically.
//
// # Safety
// `table` must be a live handle; `path` a NUL-terminated string.
enum XebStatus xeb_table_save(const struct XebTable *table, const char *path);

// Releases a table. Null is ignored.
//
// # Safety
// `table` must be null or a handle not yet freed.
void xeb_table_free(struct XebTable *table);

// Number of digits, or 0 for a null handle.
//
// # Safety
// `table` must be null or a live handle.
size_t xeb_table_n(const struct XebTable *table);

// Alphabet size, or 0 for a null handle.
//
// # Safety
// `table` must be null or a live handle.
size_t xeb_table_d(const struct XebTable *table);

// Seed the table was generated from, or 0 for a null handle.
//
// # Safety
// `table` must be null or a live handle.
uint64_t xeb_table_seed(const struct XebTable *table);

// Draws `count` samples. Sample `m` depends only on the table, `seed` and
// `m`.
//
// # Safety
// `table` must be a live handle; `out_batch` valid for writes.
enum XebStatus xeb_batch_draw(const struct XebTable *table,
                              size_t count,
                              uint64_t seed,
                              struct XebBatch **out_batch);

// Releases a batch. Null is ignored.
//
// # Safety
// `batch` must be null or a handle not yet freed.
void xeb_batch_free(struct XebBatch *batch);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `batch` must be null or a live handle.
size_t xeb_batch_len(const struct XebBatch *batch);

// Copies all natural-log probabilities into `buf`, which must hold
// `xeb_batch_len` doubles.
//
// # Safety
// `batch` must be a live handle; `buf` valid for `len` writes.
enum XebStatus xeb_batch_log_probs(const struct XebBatch *batch, double *buf, size_t len);

// Copies the `n` digits of sample `index` into `buf`, least significant
// first.
//
// # Safety
// `batch` must be a live handle; `buf` valid for `len` writes.
enum XebStatus xeb_batch_digits(const struct XebBatch *batch,
                                size_t index,
                                uint32_t *buf,
                                size_t len);

// Natural log of the probability of a digit string (least significant
// first). `-inf` for impossible strings.
//
// # Safety
// `table` must be a live handle; `digits` readable for `len` values;
// `out_log_prob` valid for writes.
enum XebStatus xeb_log_prob(const struct XebTable *table,
                            const uint32_t *digits,
                            size_t len,
                            double *out_log_prob);

// Empirical XEB of a batch drawn from `table`. `mode` is
// `XEB_MODE_EMPIRICAL_NAIVE` or `XEB_MODE_EMPIRICAL_LOGSPACE`.
//
// # Safety
// Handles must be live; `out_estimate` valid for writes.
enum XebStatus xeb_empirical_xeb(const struct XebTable *table,
                                 const struct XebBatch *batch,
                                 uint32_t mode,
                                 struct XebEstimate *out_estimate);

// True XEB of `table`. `mode` is `XEB_MODE_TRUE_BRUTEFORCE` (bounded by
// `cap` pmf entries; 0 selects the default cap) or
// `XEB_MODE_TRUE_CLOSEDFORM`.
//
// # Safety
// `table` must be a live handle; `out_estimate` valid for writes.
enum XebStatus xeb_true_xeb(const struct XebTable *table,
                            uint32_t mode,
                            uint64_t cap,
                            struct XebEstimate *out_estimate);

// `log10` seconds to enumerate `d^n_target` outcomes given `ref_seconds`
// at `n_ref`.
//
// # Safety
// `out_log10_seconds` must be valid for writes.
enum XebStatus xeb_extrapolate_enum_time(double ref_seconds,
                                         size_t n_ref,
                                         size_t n_target,
                                         size_t d,
                                         double *out_log10_seconds);

// Enumeration-over-sampling ratio, all in `log10`.
//
// # Safety
// `out_advantage` must be valid for writes.
enum XebStatus xeb_advantage(double log10_enum_seconds,
                             double per_sample_seconds,
                             struct XebAdvantage *out_advantage);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XEB_H */
