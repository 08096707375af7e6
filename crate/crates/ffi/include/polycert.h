#ifndef POLYCERT_H
#define POLYCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_UTF8 = 2,
  PC_STATUS_PARSE = 3,
  PC_STATUS_INVALID_ARGUMENT = 4,
  PC_STATUS_FIELD = 5,
  PC_STATUS_CAP_EXCEEDED = 6,
  PC_STATUS_INVALID_CERTIFICATE = 7,
  PC_STATUS_SOLVER = 8,
  PC_STATUS_DEGENERATE = 9,
  PC_STATUS_ROOT_OUTSIDE_EXTENSION = 10,
  PC_STATUS_INTERNAL = 11,
} PcStatus;

/*
 Simple undirected graph.
 */
typedef struct PcGraph PcGraph;

/*
 Equations and inequalities over the reals.
 */
typedef struct PcRealSystem PcRealSystem;

/*
 Polynomial system over a finite field or the rationals.
 */
typedef struct PcSystem PcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *pc_last_error(void);

/*
 Library version as a static string.
 */
const char *pc_version(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void pc_string_free(char *s);

/*
 Parses a DIMACS edge list.

 # Safety
 `dimacs` must be a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_graph_from_dimacs(const char *dimacs, struct PcGraph **out);

/*
 # Safety
 `g` must be NULL or a live handle.
 */
void pc_graph_free(struct PcGraph *g);

/*
 Parses a system from its JSON form.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_system_from_json(const char *json, struct PcSystem **out);

/*
 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_system_to_json(const struct PcSystem *s, char **out);

/*
 # Safety
 `s` must be NULL or a live handle.
 */
void pc_system_free(struct PcSystem *s);

/*
 k-colouring system of `g` over the field named by `field`
 (`f2`, `fp:<p>`, `gf:<p>:<k>` or `q`). A negative `anchor` leaves every
 vertex free.

 # Safety
 `g` must be a live handle, `field` NUL-terminated, `out` writable.
 */
enum PcStatus pc_encode_coloring(const struct PcGraph *g,
                                 uint32_t k,
                                 const char *field,
                                 int64_t anchor,
                                 struct PcSystem **out);

/*
 Degree-by-degree certificate search. Writes a JSON report and sets
 `infeasible` to 1 when a certificate was found.

 # Safety
 `s` must be a live handle; `out` writable; `infeasible` NULL or writable.
 */
enum PcStatus pc_nulla(const struct PcSystem *s, uint32_t max_degree, char **out, int *infeasible);

/*
 Fixed-point run: infeasibility certificate or solution count.

 # Safety
 As for `pc_nulla`.
 */
enum PcStatus pc_fpnulla(const struct PcSystem *s, uint32_t max_degree, char **out, int *decided);

/*
 All solutions over the smallest extension containing them.

 # Safety
 As for `pc_nulla`.
 */
enum PcStatus pc_solve(const struct PcSystem *s,
                       uint32_t max_degree,
                       uint64_t seed,
                       char **out,
                       int *decided);

/*
 Checks a Nullstellensatz certificate exactly; `valid` receives 1 or 0.

 # Safety
 `s` must be a live handle; `cert_json` NUL-terminated; `valid` writable.
 */
enum PcStatus pc_check_null_cert(const struct PcSystem *s, const char *cert_json, int *valid);

/*
 Searches for an oriented-cycle certificate; `found` receives 1 or 0.

 # Safety
 `g` must be a live handle; `out` writable; `found` NULL or writable.
 */
enum PcStatus pc_cycle_cert(const struct PcGraph *g, char **out, int *found);

/*
 Parses `{"variables": [...], "equations": [...], "inequalities": [...]}`.

 # Safety
 `json` NUL-terminated; `out` writable.
 */
enum PcStatus pc_real_system_from_json(const char *json, struct PcRealSystem **out);

/*
 # Safety
 `s` must be NULL or a live handle.
 */
void pc_real_system_free(struct PcRealSystem *s);

/*
 Positivstellensatz search up to `max_degree`; `found` receives 1 or 0.

 # Safety
 `s` must be a live handle; `out` writable; `found` NULL or writable.
 */
enum PcStatus pc_psatz(const struct PcRealSystem *s, uint32_t max_degree, char **out, int *found);

/*
 Checks a Positivstellensatz certificate; `valid` receives 1 or 0.

 # Safety
 `s` must be a live handle; `cert_json` NUL-terminated; `valid` writable.
 */
enum PcStatus pc_check_psatz_cert(const struct PcRealSystem *s, const char *cert_json, int *valid);

/*
 Theta-body bound for the stable-set number. `weights` may be NULL for
 unit weights, otherwise it must hold one entry per vertex.

 # Safety
 `g` must be a live handle; `weights` NULL or readable for `n` doubles;
 `value` writable.
 */
enum PcStatus pc_theta1(const struct PcGraph *g, const double *weights, double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYCERT_H */
