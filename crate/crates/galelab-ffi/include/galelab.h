#ifndef GALELAB_H
#define GALELAB_H

/* Generated by cbindgen during the galelab-ffi build; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Disjoint (block-aligned) counting for [`galelab_entropy_estimate`].
 */
#define GALELAB_MODE_DISJOINT 0

/**
 * Sliding-window counting for [`galelab_entropy_estimate`].
 */
#define GALELAB_MODE_SLIDING 1

/**
 * Result of every fallible call.
 */
typedef enum GalelabStatus {
  /**
   * The call succeeded and the out-parameter was written.
   */
  GALELAB_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  GALELAB_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  GALELAB_STATUS_INVALID_UTF8 = 2,
  /**
   * A JSON document, rational literal, or input word failed to parse.
   */
  GALELAB_STATUS_PARSE_ERROR = 3,
  /**
   * An argument was outside its documented range.
   */
  GALELAB_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The computation itself failed; the inputs were well-formed.
   */
  GALELAB_STATUS_COMPUTE_ERROR = 5,
} GalelabStatus;

/**
 * Opaque finite-state gambler handle.
 */
typedef struct GalelabGambler GalelabGambler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *galelab_version(void);

/**
 * Static name for a status value previously returned by this library.
 */
const char *galelab_status_name(enum GalelabStatus status);

/**
 * Parses a gambler from its JSON document and returns an owned handle.
 *
 * The document is fully validated: rows must average to one exactly,
 * transitions must be total, and the starting capital must be nonnegative.
 */
enum GalelabStatus galelab_gambler_parse(const char *json, struct GalelabGambler **out);

/**
 * Releases a handle returned by [`galelab_gambler_parse`]. NULL is a no-op.
 */
void galelab_gambler_free(struct GalelabGambler *gambler);

/**
 * Alphabet size of the gambler.
 */
enum GalelabStatus galelab_gambler_sigma(const struct GalelabGambler *gambler, uint32_t *out);

/**
 * Number of parallel bet rows.
 */
enum GalelabStatus galelab_gambler_k(const struct GalelabGambler *gambler, uint32_t *out);

/**
 * Number of states.
 */
enum GalelabStatus galelab_gambler_num_states(const struct GalelabGambler *gambler, uint32_t *out);

/**
 * Serializes the gambler back to JSON as an owned string.
 *
 * Release the string with [`galelab_string_free`].
 */
enum GalelabStatus galelab_gambler_to_json(const struct GalelabGambler *gambler, char **out);

/**
 * Releases a string returned by this library. NULL is a no-op.
 */
void galelab_string_free(char *s);

/**
 * Runs the gambler over `input` and writes the final base-2 log capital of
 * the induced s-gale.
 *
 * `s` is a rational literal (`"p/q"`, an integer, or an exact decimal) and
 * must be nonnegative. `input` is spelled in the gambler's own alphabet.
 * Capital accounting is exact; only the final logarithm is floating point,
 * and a ruined gambler yields negative infinity.
 */
enum GalelabStatus galelab_gambler_log2_capital(const struct GalelabGambler *gambler,
                                                const char *s,
                                                const char *input,
                                                double *out);

/**
 * Writes the block-entropy rate estimate of `input`: the minimum over block
 * lengths `1..=l_max` of the normalised block entropy, in `[0, 1]`.
 *
 * `alphabet` lists the glyphs in symbol order (for example `"01"`). `mode`
 * is [`GALELAB_MODE_DISJOINT`] or [`GALELAB_MODE_SLIDING`]. `l_max` must be
 * between 1 and 12, and `input` must contain at least `l_max` symbols.
 */
enum GalelabStatus galelab_entropy_estimate(const char *input,
                                            const char *alphabet,
                                            uint32_t l_max,
                                            uint32_t mode,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GALELAB_H */
