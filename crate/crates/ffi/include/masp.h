#ifndef MASP_H
#define MASP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
enum MaspStatus
#ifdef __cplusplus
  : uint32_t
#endif // __cplusplus
 {
  MASP_STATUS_OK = 0,
  MASP_STATUS_NULL_ARGUMENT = 1,
  MASP_STATUS_INVALID_UTF8 = 2,
  MASP_STATUS_PARSE = 3,
  MASP_STATUS_PRECONDITION = 4,
  MASP_STATUS_DOMAIN = 5,
  MASP_STATUS_RESOURCE = 6,
  MASP_STATUS_INDEX = 7,
  MASP_STATUS_INTERNAL = 8,
};
#ifndef __cplusplus
typedef uint32_t MaspStatus;
#endif // __cplusplus

// The answer sets of one solve call.
typedef struct MaspAnswerSets MaspAnswerSets;

// A parsed modular program.
typedef struct MaspProgram MaspProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *masp_version(void);

// The message of the last failed call on this thread, or null. The caller
// frees the copy with `masp_string_free`.
char *masp_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` is null or a string from this library not yet freed.
void masp_string_free(char *s);

// Parses program text into a new handle.
//
// # Safety
// `source` is a NUL-terminated string; `out` is valid for one write.
MaspStatus masp_program_parse(const char *source, struct MaspProgram **out);

// Releases a program handle. Null is ignored.
//
// # Safety
// `p` is null or a handle from `masp_program_parse` not yet freed.
void masp_program_free(struct MaspProgram *p);

// Adds the facts in `instance` as a top-level def-module, keeping the
// program's public symbols.
//
// # Safety
// `p` is a live handle; `instance` is a NUL-terminated string.
MaspStatus masp_program_join_instance(struct MaspProgram *p, const char *instance);

// Canonical program text.
//
// # Safety
// `p` is a live handle; `out` is valid for one write.
MaspStatus masp_program_print(const struct MaspProgram *p, char **out);

// The second-order formula of the program.
//
// # Safety
// `p` is a live handle; `out` is valid for one write.
MaspStatus masp_program_formula(const struct MaspProgram *p, char **out);

// Computes the answer sets over the program's Herbrand universe.
//
// # Safety
// `p` is a live handle; `out` is valid for one write.
MaspStatus masp_solve(const struct MaspProgram *p, struct MaspAnswerSets **out);

// Number of answer sets; 0 for null.
//
// # Safety
// `r` is null or a live result handle.
size_t masp_answer_sets_count(const struct MaspAnswerSets *r);

// The atoms of answer set `index`, space separated.
//
// # Safety
// `r` is a live result handle; `out` is valid for one write.
MaspStatus masp_answer_sets_get(const struct MaspAnswerSets *r, size_t index, char **out);

// All answer sets as a JSON array of arrays of atom strings.
//
// # Safety
// `r` is a live result handle; `out` is valid for one write.
MaspStatus masp_answer_sets_json(const struct MaspAnswerSets *r, char **out);

// Releases a result handle. Null is ignored.
//
// # Safety
// `r` is null or a handle from `masp_solve` not yet freed.
void masp_answer_sets_free(struct MaspAnswerSets *r);

// Bounded strong equivalence of two programs. `domain` is a comma-separated
// constant list, or null for the programs' constants. Writes whether they
// agree on every interpretation, and the verdict text.
//
// # Safety
// `a`, `b` are live handles; `domain` is null or NUL-terminated;
// `equivalent` and `verdict` are valid for one write each.
MaspStatus masp_equiv(const struct MaspProgram *a,
                      const struct MaspProgram *b,
                      const char *domain,
                      bool *equivalent,
                      char **verdict);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MASP_H */
