#ifndef COLOMBEAU_H
#define COLOMBEAU_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ColombeauStatus {
  COLOMBEAU_STATUS_OK = 0,
  COLOMBEAU_STATUS_NULL_POINTER = 1,
  COLOMBEAU_STATUS_INVALID_UTF8 = 2,
  COLOMBEAU_STATUS_CONFIG = 3,
  COLOMBEAU_STATUS_UNKNOWN_FORMULA = 4,
  COLOMBEAU_STATUS_INVALID_PARAMS = 5,
  COLOMBEAU_STATUS_NUMERICAL = 6,
  COLOMBEAU_STATUS_BUFFER_TOO_SMALL = 7,
  COLOMBEAU_STATUS_OUT_OF_RANGE = 8,
  COLOMBEAU_STATUS_PANIC = 9,
} ColombeauStatus;

// Opaque suite report handle.
typedef struct ColombeauReport ColombeauReport;

// Opaque test function handle.
typedef struct ColombeauTestFunction ColombeauTestFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the message of the most recent failure on this thread into `buf`.
// The message itself is left in place, so a size query can precede the copy.
//
// # Safety
// `buf` must be null or valid for `len` bytes; `needed` must be null or valid.
enum ColombeauStatus colombeau_last_error(char *buf, size_t len, size_t *needed);

// Number of registered formulas.
size_t colombeau_formula_count(void);

// Identifier of the registered formula at `index`.
//
// # Safety
// `buf` must be null or valid for `len` bytes; `needed` must be null or valid.
enum ColombeauStatus colombeau_formula_id(size_t index, char *buf, size_t len, size_t *needed);

// `ψ(x) = P(x) b((x - center)/radius)` with `P` given by `n` coefficients, lowest first.
//
// # Safety
// `id` must be a NUL-terminated string, `poly` valid for `n` reads, `out` valid for a write.
// The handle must be released with [`colombeau_test_function_free`].
enum ColombeauStatus colombeau_test_function_new(const char *id,
                                                 const double *poly,
                                                 size_t n,
                                                 double center,
                                                 double radius,
                                                 struct ColombeauTestFunction **out);

// One of the built-in test functions: 0 even, 1 odd-shifted, 2 generic.
//
// # Safety
// `out` must be valid for a write.
enum ColombeauStatus colombeau_test_function_default(uint32_t kind,
                                                     struct ColombeauTestFunction **out);

// `ψ⁽ⁿ⁾(x)`.
//
// # Safety
// `tf` must be a live handle and `out` valid for a write.
enum ColombeauStatus colombeau_test_function_eval(const struct ColombeauTestFunction *tf,
                                                  size_t n,
                                                  double x,
                                                  double *out);

// # Safety
// `tf` must be null or a handle not yet freed.
void colombeau_test_function_free(struct ColombeauTestFunction *tf);

// Exact pairing of the predicted side of a registered formula with ψ.
// `p` and `q` may be null when the formula does not take them.
//
// # Safety
// `formula` must be a NUL-terminated string; `p`, `q` null or valid; `tf` a live
// handle; `re`, `im` valid for writes.
enum ColombeauStatus colombeau_oracle(const char *formula,
                                      const int32_t *p,
                                      const uint32_t *q,
                                      const struct ColombeauTestFunction *tf,
                                      double *re,
                                      double *im);

// Run a suite from a TOML configuration; null or empty text runs the default suite.
//
// # Safety
// `config_toml` must be null or a NUL-terminated string; `out` valid for a write.
// The report must be released with [`colombeau_report_free`].
enum ColombeauStatus colombeau_run_suite(const char *config_toml, struct ColombeauReport **out);

// Verdict and pass counts; the suite passes when they are equal.
//
// # Safety
// `report` must be a live handle; `verdicts`, `passed` valid for writes.
enum ColombeauStatus colombeau_report_summary(const struct ColombeauReport *report,
                                              size_t *verdicts,
                                              size_t *passed);

// The full report as JSON.
//
// # Safety
// `report` must be a live handle; `buf` null or valid for `len` bytes; `needed` null or valid.
enum ColombeauStatus colombeau_report_json(const struct ColombeauReport *report,
                                           char *buf,
                                           size_t len,
                                           size_t *needed);

// # Safety
// `report` must be null or a handle not yet freed.
void colombeau_report_free(struct ColombeauReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLOMBEAU_H */
