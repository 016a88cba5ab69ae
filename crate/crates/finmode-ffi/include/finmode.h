/* C interface for the finmode spectral field library. */

#ifndef FINMODE_H
#define FINMODE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible entry point.
 */
typedef enum FmStatus {
  /**
   * Success.
   */
  FM_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  FM_STATUS_NULL_ARGUMENT = 1,
  /**
   * A text argument was not valid UTF-8.
   */
  FM_STATUS_INVALID_UTF8 = 2,
  /**
   * The document did not parse as a field.
   */
  FM_STATUS_PARSE_ERROR = 3,
  /**
   * The field violates a structural invariant.
   */
  FM_STATUS_INVALID_FIELD = 4,
  /**
   * Classification could not produce a certificate.
   */
  FM_STATUS_CLASSIFY_ERROR = 5,
  /**
   * Construction parameters were rejected.
   */
  FM_STATUS_GENERATE_ERROR = 6,
  /**
   * Unexpected internal failure (caught panic).
   */
  FM_STATUS_INTERNAL = 7,
} FmStatus;

/**
 * Opaque spectral field handle.
 */
typedef struct FmField FmField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *fm_last_error(void);

/**
 * Parses a field document (JSON) into a new handle.
 *
 * # Safety
 * `text` must point to a NUL-terminated buffer; `out` must be a valid
 * location for one pointer.
 */
enum FmStatus fm_field_parse_json(const char *text, struct FmField **out);

/**
 * Builds the three-amplitude curl eigenfield.
 *
 * # Safety
 * `out` must be a valid location for one pointer.
 */
enum FmStatus fm_field_make_abc(double a, double b, double c, struct FmField **out);

/**
 * Serializes a field into its canonical JSON document.
 *
 * # Safety
 * `field` must be a live handle; `out` must be a valid location for one
 * pointer. The returned string is released with `fm_string_free`.
 */
enum FmStatus fm_field_to_json(const struct FmField *field, char **out);

/**
 * Checks the structural invariants; `tol <= 0` selects the default
 * tolerance. Violations are reported through `fm_last_error`.
 *
 * # Safety
 * `field` must be a live handle.
 */
enum FmStatus fm_field_validate(const struct FmField *field, double tol);

/**
 * Number of frequencies carrying a coefficient.
 *
 * # Safety
 * `field` must be a live handle; `out` must be a valid location.
 */
enum FmStatus fm_field_mode_count(const struct FmField *field, size_t *out);

/**
 * Kinetic energy, half the sum of squared coefficient norms.
 *
 * # Safety
 * `field` must be a live handle; `out` must be a valid location.
 */
enum FmStatus fm_field_energy(const struct FmField *field, double *out);

/**
 * Relative stationarity residual of the ideal evolution.
 *
 * # Safety
 * `field` must be a live handle; `out` must be a valid location.
 */
enum FmStatus fm_field_residual(const struct FmField *field, double *out);

/**
 * Classifies against the ideal equations; the certificate arrives as JSON.
 * `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `field` must be a live handle; `out` must be a valid location for one
 * pointer. The returned string is released with `fm_string_free`.
 */
enum FmStatus fm_field_classify_json(const struct FmField *field, double tol, char **out);

/**
 * Classifies against the viscous / rotating equations; the certificate
 * arrives as JSON. `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `field` must be a live handle; `out` must be a valid location for one
 * pointer. The returned string is released with `fm_string_free`.
 */
enum FmStatus fm_field_classify_nsc_json(const struct FmField *field,
                                         double nu,
                                         double omega,
                                         double tol,
                                         char **out);

/**
 * Releases a field handle. NULL is a no-op.
 *
 * # Safety
 * `field` must have come from this library and not been freed before.
 */
void fm_field_free(struct FmField *field);

/**
 * Releases a string produced by this library. NULL is a no-op.
 *
 * # Safety
 * `text` must have come from this library and not been freed before.
 */
void fm_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINMODE_H */
