#ifndef QUIZLAB_H
#define QUIZLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The nonzero values match the command-line exit codes where
 * both exist.
 */
typedef enum QuizlabStatus {
  QUIZLAB_STATUS_OK = 0,
  QUIZLAB_STATUS_NULL_POINTER = 1,
  QUIZLAB_STATUS_INVALID_ARGUMENT = 2,
  QUIZLAB_STATUS_CAP_EXCEEDED = 3,
  QUIZLAB_STATUS_INTERNAL = 4,
  QUIZLAB_STATUS_INVALID_UTF8 = 5,
} QuizlabStatus;

/**
 * Opaque family descriptor.
 */
typedef struct QuizlabFamily QuizlabFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version string, statically allocated.
 */
const char *quizlab_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *quizlab_last_error(void);

/**
 * # Safety
 * `s` is NULL or a string returned by this library that has not been freed.
 */
void quizlab_string_free(char *s);

/**
 * Build a family from its JSON descriptor, e.g.
 * `{"variant":"univariate-d","d":2,"task":"identity"}`.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum QuizlabStatus quizlab_family_new(const char *json, struct QuizlabFamily **out);

/**
 * # Safety
 * `family` is NULL or a handle from [`quizlab_family_new`] not yet freed.
 */
void quizlab_family_free(struct QuizlabFamily *family);

/**
 * Number of parameters, or 0 for a NULL handle.
 *
 * # Safety
 * `family` is NULL or a live handle.
 */
size_t quizlab_family_param_arity(const struct QuizlabFamily *family);

/**
 * Number of variables of the task image, or 0 for a NULL handle.
 *
 * # Safety
 * `family` is NULL or a live handle.
 */
size_t quizlab_family_output_arity(const struct QuizlabFamily *family);

/**
 * Expand the task image at a parameter point; writes the polynomial as JSON.
 *
 * # Safety
 * `family` is a live handle, `num`/`den` hold `len` values, `out` is writable.
 */
enum QuizlabStatus quizlab_family_expand(const struct QuizlabFamily *family,
                                         const int64_t *num,
                                         const int64_t *den,
                                         size_t len,
                                         size_t cap,
                                         char **out);

/**
 * Evaluate the task image at parameters `u` and point `x`; writes the value
 * as `"n/d"`.
 *
 * # Safety
 * Array pointers hold the stated number of values; `out` is writable.
 */
enum QuizlabStatus quizlab_family_eval(const struct QuizlabFamily *family,
                                       const int64_t *u_num,
                                       const int64_t *u_den,
                                       size_t u_len,
                                       const int64_t *x_num,
                                       const int64_t *x_den,
                                       size_t x_len,
                                       char **out);

/**
 * Run seeded rank trials for the family; writes the report as JSON.
 *
 * # Safety
 * `family` is a live handle; `out` is writable.
 */
enum QuizlabStatus quizlab_witness_report(const struct QuizlabFamily *family,
                                          size_t trials,
                                          uint64_t seed,
                                          char **out);

/**
 * Play the exact game against hidden parameters with the built-in strategy;
 * writes the transcript as JSON, redacted when `quizmaster_export` is nonzero.
 *
 * # Safety
 * `num`/`den` hold `len` values; `family` is a live handle; `out` is writable.
 */
enum QuizlabStatus quizlab_game_exact(const struct QuizlabFamily *family,
                                      const int64_t *num,
                                      const int64_t *den,
                                      size_t len,
                                      uint64_t seed,
                                      int quizmaster_export,
                                      char **out);

/**
 * Check the three Kronecker identities at `(s, u)`; bit `i` of `mask` is set
 * when identity `i + 1` holds.
 *
 * # Safety
 * `u_num`/`u_den` hold `k` values; `mask` is writable.
 */
enum QuizlabStatus quizlab_kron_verify(size_t k,
                                       int64_t s_num,
                                       int64_t s_den,
                                       const int64_t *u_num,
                                       const int64_t *u_den,
                                       uint32_t *mask);

/**
 * Required sampling-set size as a decimal string.
 *
 * # Safety
 * `out` is writable.
 */
enum QuizlabStatus quizlab_required_set_size(uint64_t delta, uint32_t l, uint64_t k, char **out);

/**
 * Run a command line as the `quizlab` binary would (without the program
 * name) and return its exit code. Either output pointer may be NULL.
 *
 * # Safety
 * `argv` holds `argc` NUL-terminated strings; non-NULL outputs are writable.
 */
int quizlab_run(size_t argc, const char *const *argv, char **out_stdout, char **out_stderr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUIZLAB_H */
