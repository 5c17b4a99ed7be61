#ifndef MIXSEC_H
#define MIXSEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function.
typedef enum MixsecStatus {
  MIXSEC_STATUS_OK = 0,
  MIXSEC_STATUS_NULL_POINTER = 1,
  MIXSEC_STATUS_INVALID_UTF8 = 2,
  MIXSEC_STATUS_INVALID_POLICY = 3,
  MIXSEC_STATUS_PARSE_ERROR = 4,
  // The compiler rejected the program.
  MIXSEC_STATUS_REJECTED = 5,
  MIXSEC_STATUS_IO = 6,
  // A check found a violation or a verdict differs from the manifest.
  MIXSEC_STATUS_VIOLATED = 7,
  MIXSEC_STATUS_INVALID_ARGUMENT = 8,
  MIXSEC_STATUS_INTERNAL = 9,
} MixsecStatus;

// A compiled thread: the RISC program plus its annotations.
typedef struct MixsecCompiled MixsecCompiled;

// A validated classification policy.
typedef struct MixsecPolicy MixsecPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into the library from the same thread.
const char *mixsec_last_error(void);

// Library version as a static string.
const char *mixsec_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and must not be used afterwards.
void mixsec_string_free(char *s);

// Parses and validates a policy document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum MixsecStatus mixsec_policy_from_json(const char *json, struct MixsecPolicy **out);

// Releases a policy. Null is ignored.
//
// # Safety
// `policy` must come from [`mixsec_policy_from_json`] and not be used afterwards.
void mixsec_policy_free(struct MixsecPolicy *policy);

// Compiles one thread. `registers` of 0 selects the default register count.
// Returns `MIXSEC_STATUS_REJECTED` when the stability checks fail.
//
// # Safety
// `policy` must be a live policy, `source` a NUL-terminated string and
// `out` a writable pointer.
enum MixsecStatus mixsec_compile(const struct MixsecPolicy *policy,
                                 const char *source,
                                 size_t registers,
                                 struct MixsecCompiled **out);

// Number of instructions in the compiled program, or 0 for null.
//
// # Safety
// `compiled` must be null or a live handle.
size_t mixsec_compiled_len(const struct MixsecCompiled *compiled);

// Writes the assembly listing to `out`; free it with [`mixsec_string_free`].
//
// # Safety
// `compiled` must be a live handle and `out` a writable pointer.
enum MixsecStatus mixsec_compiled_listing(const struct MixsecCompiled *compiled, char **out);

// Writes the annotated JSON form (instructions with their records) to `out`.
//
// # Safety
// `compiled` must be a live handle and `out` a writable pointer.
enum MixsecStatus mixsec_compiled_json(const struct MixsecCompiled *compiled, char **out);

// Releases a compiled program. Null is ignored.
//
// # Safety
// `compiled` must come from [`mixsec_compile`] and not be used afterwards.
void mixsec_compiled_free(struct MixsecCompiled *compiled);

// Runs checks on a corpus entry directory and writes the reports as a JSON
// array to `out`. `checks` is a comma-separated list of check names, or null
// for all of them. Returns `MIXSEC_STATUS_VIOLATED` when any report is
// violated; the reports are written either way.
//
// # Safety
// `entry_dir` must be a NUL-terminated path, `checks` null or a
// NUL-terminated string, and `out` a writable pointer.
enum MixsecStatus mixsec_verify_entry(const char *entry_dir, const char *checks, char **out);

// Runs every check on a corpus entry and compares the verdicts with its
// manifest. Returns `MIXSEC_STATUS_VIOLATED` on any mismatch.
//
// # Safety
// `entry_dir` must be a NUL-terminated path.
enum MixsecStatus mixsec_check_entry(const char *entry_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXSEC_H */
