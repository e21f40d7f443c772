#ifndef BFP_H
#define BFP_H

/* Generated by cbindgen. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every API call.
 */
typedef enum BfpStatus {
  BfpStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  BfpStatus_NullPointer = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  BfpStatus_InvalidUtf8 = 2,
  /**
   * JSON or expression parsing failed.
   */
  BfpStatus_ParseError = 3,
  /**
   * Inputs were structurally valid but semantically rejected.
   */
  BfpStatus_InputError = 4,
  /**
   * Evaluation hit a domain error.
   */
  BfpStatus_DomainError = 5,
  /**
   * The fractional solver detected divergence.
   */
  BfpStatus_Diverged = 6,
} BfpStatus;

/**
 * Opaque coefficient-family-plus-spec handle.
 */
typedef struct BfpCoeffs BfpCoeffs;

/**
 * Opaque mapping handle, bound to the space it was parsed against.
 */
typedef struct BfpMap BfpMap;

/**
 * Opaque finite bipolar space handle.
 */
typedef struct BfpSpace BfpSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for the current thread, or null when the previous
 * call succeeded. The pointer is invalidated by the next API call.
 */
const char *bfp_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned through an `out` parameter of
 * this library, or null.
 */
void bfp_string_free(char *s);

/**
 * Parses a space from its JSON schema
 * (`{"left": [...], "right": [...], "overlap": [[i,j],...], "dist": [[...]]}`).
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BfpStatus bfp_space_parse(const char *json, struct BfpSpace **out);

/**
 * # Safety
 * `space` must come from [`bfp_space_parse`] (or be null).
 */
void bfp_space_free(struct BfpSpace *space);

/**
 * Runs the axiom checks and returns the report as JSON.
 *
 * # Safety
 * `space` must be a live handle; `out_json` a valid pointer.
 */
enum BfpStatus bfp_space_check_axioms(const struct BfpSpace *space, char **out_json);

/**
 * Distance lookup by labels.
 *
 * # Safety
 * All pointers must be valid; `space` must be a live handle.
 */
enum BfpStatus bfp_space_distance(const struct BfpSpace *space,
                                  const char *left,
                                  const char *right,
                                  double *out);

/**
 * Parses a mapping from its JSON schema against an existing space.
 *
 * # Safety
 * `space` must be a live handle; `json` and `out` valid pointers.
 */
enum BfpStatus bfp_map_parse(const struct BfpSpace *space, const char *json, struct BfpMap **out);

/**
 * # Safety
 * `map` must come from [`bfp_map_parse`] (or be null).
 */
void bfp_map_free(struct BfpMap *map);

/**
 * Parses a coefficient file (degree, pi, rho_index, Q, optional W/H, q).
 *
 * # Safety
 * `json` and `out` must be valid pointers.
 */
enum BfpStatus bfp_coeffs_parse(const char *json, struct BfpCoeffs **out);

/**
 * # Safety
 * `coeffs` must come from [`bfp_coeffs_parse`] (or be null).
 */
void bfp_coeffs_free(struct BfpCoeffs *coeffs);

/**
 * Certifies the contraction inequality; the full certificate is returned
 * as JSON. `almost` selects the almost variant (covariant maps only).
 *
 * # Safety
 * All handles must be live; `out_json` a valid pointer.
 */
enum BfpStatus bfp_verify_pc(const struct BfpSpace *space,
                             const struct BfpMap *map,
                             const struct BfpCoeffs *coeffs,
                             bool almost,
                             char **out_json);

/**
 * Runs the Picard bisequence from a start pair; the outcome (trace, status,
 * fixed point or cycle, observed distances) is returned as JSON.
 *
 * # Safety
 * All handles and pointers must be valid.
 */
enum BfpStatus bfp_iterate(const struct BfpSpace *space,
                           const struct BfpMap *map,
                           const char *start_left,
                           const char *start_right,
                           size_t max_iter,
                           char **out_json);

/**
 * Solves the fractional BVP from a JSON config
 * (`{"order":..,"omega":"..","sigma":..,"grid_n":..,"tol":..,"max_iter":..}`)
 * and returns the solve report as JSON.
 *
 * # Safety
 * `config_json` and `out_json` must be valid pointers.
 */
enum BfpStatus bfp_solve_frac(const char *config_json, char **out_json);

/**
 * Parses and evaluates an expression in the variables `rho` and `g`.
 *
 * # Safety
 * `src` and `out` must be valid pointers.
 */
enum BfpStatus bfp_expr_eval(const char *src, double rho, double g, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BFP_H */
