#ifndef SNELL_H
#define SNELL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SnellPayoff {
  SNELL_PAYOFF_PUT = 0,
  SNELL_PAYOFF_CALL = 1,
} SnellPayoff;

// Result of every fallible call.
typedef enum SnellStatus {
  SNELL_STATUS_OK = 0,
  SNELL_STATUS_NULL_POINTER = 1,
  SNELL_STATUS_INVALID_UTF8 = 2,
  // The model or a parameter failed validation.
  SNELL_STATUS_VALIDATION = 3,
  // An enumeration would exceed the configured budget.
  SNELL_STATUS_BUDGET = 4,
  SNELL_STATUS_IO = 5,
  // A node label or member index does not exist.
  SNELL_STATUS_NOT_FOUND = 6,
  // The caller's buffer is too short; the required length was written.
  SNELL_STATUS_BUFFER_TOO_SMALL = 7,
  // The library panicked; the handle involved should be freed.
  SNELL_STATUS_INTERNAL = 8,
} SnellStatus;

// A model together with its lower Snell envelope.
typedef struct SnellModel SnellModel;

// Parameters of the binomial model with an up-probability interval.
typedef struct SnellBinomialParams {
  uint32_t steps;
  double s0;
  double up;
  double down;
  double p_lo;
  double p_hi;
  double strike;
  enum SnellPayoff payoff;
} SnellBinomialParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a model from a NUL-terminated JSON document.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer to write to.
enum SnellStatus snell_model_from_json(const char *json, struct SnellModel **out);

// Loads a model from a JSON file.
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer to write to.
enum SnellStatus snell_model_load(const char *path, struct SnellModel **out);

// Builds the binomial model with up-probability in `[p_lo, p_hi]`.
//
// # Safety
// `params` must point to an initialized struct and `out` be writable.
enum SnellStatus snell_model_binomial(const struct SnellBinomialParams *params,
                                      struct SnellModel **out);

// Releases a handle. Null is accepted and ignored.
//
// # Safety
// `model` must come from one of the constructors and not be used afterwards.
void snell_model_free(struct SnellModel *model);

// Number of nodes in the tree.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_model_node_count(const struct SnellModel *model, size_t *out);

// Label of the node at breadth-first position `index` (the root is 0).
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_model_node_label(const struct SnellModel *model,
                                        size_t index,
                                        uint64_t *out);

// Number of measures in the family, saturating at `UINT64_MAX`.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_model_member_count(const struct SnellModel *model, uint64_t *out);

// Lower Snell envelope at the root: the robust value of the stopping problem.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_lower_value(const struct SnellModel *model, double *out);

// Lower Snell envelope at the node with the given label.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_lower_envelope(const struct SnellModel *model, uint64_t label, double *out);

// Region of the robust optimal stopping time as node labels.
//
// `*len` receives the region size. When `capacity` is too small nothing is
// copied and [`SnellStatus::BufferTooSmall`] is returned, so a first call
// with `capacity = 0` and a null buffer sizes the second.
//
// # Safety
// `buffer` must hold `capacity` elements (or be null with `capacity = 0`),
// `model` must be a live handle and `len` writable.
enum SnellStatus snell_tau_down_region(const struct SnellModel *model,
                                       uint64_t *buffer,
                                       size_t capacity,
                                       size_t *len);

// Root value of the classical envelope under the member with canonical
// index `member`.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_member_value(const struct SnellModel *model, uint64_t member, double *out);

// Canonical JSON rendering of the model; free it with [`snell_string_free`].
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SnellStatus snell_model_to_json(const struct SnellModel *model, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void snell_string_free(char *s);

// Message of the last failure on this thread, or null if none.
const char *snell_last_error_message(void);

// Library version as a static C string.
const char *snell_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SNELL_H */
