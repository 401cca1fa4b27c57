#ifndef IPCOPULA_H
#define IPCOPULA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum IpcStatus {
  IPC_STATUS_OK = 0,
  IPC_STATUS_NULL_POINTER = 1,
  IPC_STATUS_INVALID_UTF8 = 2,
  IPC_STATUS_INVALID_INPUT = 3,
  IPC_STATUS_INVALID_ARGUMENT = 4,
  IPC_STATUS_PANIC = 5,
} IpcStatus;

// Bivariate p-box.
typedef struct IpcBiPBox IpcBiPBox;

// Finite set of copulas with its validation resolution.
typedef struct IpcCopulaSet IpcCopulaSet;

// Univariate p-box.
typedef struct IpcPBox IpcPBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library from the same thread.
const char *ipc_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void ipc_string_free(char *s);

// Parses `{"grid", "lower", "upper"}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum IpcStatus ipc_pbox_from_json(const char *json, struct IpcPBox **out);

// # Safety
// `p` must be null or a live handle from [`ipc_pbox_from_json`].
void ipc_pbox_free(struct IpcPBox *p);

// Parses `{"xgrid", "ygrid", "lower", "upper"}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum IpcStatus ipc_bipbox_from_json(const char *json, struct IpcBiPBox **out);

// Serializes a bivariate p-box in the same schema it is parsed from.
//
// # Safety
// `b` must be a live handle; `out` must be writable.
enum IpcStatus ipc_bipbox_to_json(const struct IpcBiPBox *b, char **out);

// # Safety
// `b` must be null or a live bivariate p-box handle.
void ipc_bipbox_free(struct IpcBiPBox *b);

// Parses `{"members": [...]}` and validates every member at `resolution`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum IpcStatus ipc_copula_set_from_json(const char *json,
                                        uint32_t resolution,
                                        struct IpcCopulaSet **out);

// # Safety
// `s` must be null or a live copula set handle.
void ipc_copula_set_free(struct IpcCopulaSet *s);

// Frechet-Hoeffding bounds of two marginal p-boxes.
//
// # Safety
// `x` and `y` must be live handles; `out` must be writable.
enum IpcStatus ipc_natural_extension(const struct IpcPBox *x,
                                     const struct IpcPBox *y,
                                     struct IpcBiPBox **out);

// Joins marginal p-boxes through every copula of a set.
//
// # Safety
// All handles must be live; `out` must be writable.
enum IpcStatus ipc_sklar_combine(const struct IpcPBox *x,
                                 const struct IpcPBox *y,
                                 const struct IpcCopulaSet *set,
                                 struct IpcBiPBox **out);

// Writes 1 to `coherent` when every bound is attained by a joint pmf, else 0.
// For an incoherent box the last error message names the failing point.
//
// # Safety
// `b` must be a live handle; `coherent` must be writable.
enum IpcStatus ipc_coherence_check(const struct IpcBiPBox *b, int32_t *coherent);

// Runs every embedded worked example and returns the JSON report, byte
// identical to `ipcopula reproduce-paper --seed <seed> --resolution <r>`.
//
// # Safety
// `out_json` and `out_exit` must be writable.
enum IpcStatus ipc_reproduce(uint64_t seed,
                             uint32_t resolution,
                             char **out_json,
                             int32_t *out_exit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPCOPULA_H */
