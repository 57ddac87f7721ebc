#ifndef SHUBIN_H
#define SHUBIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every exported call.
 */
typedef enum ShubinStatus {
  SHUBIN_STATUS_OK = 0,
  /*
   A required pointer argument was null or a string was not UTF-8.
   */
  SHUBIN_STATUS_INVALID_ARGUMENT = 1,
  /*
   The input was rejected (bad JSON, dimension mismatch, unsupported symbol).
   */
  SHUBIN_STATUS_VALIDATION = 2,
  /*
   The computation failed (pole, non-ellipticity, divergent tail, ...).
   */
  SHUBIN_STATUS_NUMERICAL = 3,
  /*
   Internal panic; the handle arguments remain valid.
   */
  SHUBIN_STATUS_PANIC = 4,
} ShubinStatus;

/*
 Opaque classical symbol.
 */
typedef struct ShubinSymbol ShubinSymbol;

typedef struct ShubinComplex {
  double re;
  double im;
} ShubinComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parse a symbol from a NUL-terminated JSON document.

 # Safety
 `json` must be a valid C string and `out` a writable pointer. The handle
 written to `out` must be released with [`shubin_symbol_free`].
 */
enum ShubinStatus shubin_symbol_from_json(const char *json, struct ShubinSymbol **out);

/*
 Release a symbol handle. Null is ignored.

 # Safety
 `symbol` must come from [`shubin_symbol_from_json`] and not be used again.
 */
void shubin_symbol_free(struct ShubinSymbol *symbol);

/*
 Order m, dimension n and matrix size q of a symbol. Any output may be null.

 # Safety
 `symbol` must be a live handle; non-null outputs must be writable.
 */
enum ShubinStatus shubin_symbol_info(const struct ShubinSymbol *symbol,
                                     struct ShubinComplex *out_order,
                                     uintptr_t *out_n,
                                     uintptr_t *out_q);

/*
 Wodzicki residue.

 # Safety
 `symbol` must be a live handle and `out` writable.
 */
enum ShubinStatus shubin_residue(const struct ShubinSymbol *symbol, struct ShubinComplex *out);

/*
 Finite-part integral TR with `p` correction terms, or the minimal `p` when
 `p` is negative. `out_uncertainty` may be null.

 # Safety
 `symbol` must be a live handle; non-null outputs must be writable.
 */
enum ShubinStatus shubin_kv_tr(const struct ShubinSymbol *symbol,
                               int32_t p,
                               struct ShubinComplex *out_value,
                               double *out_uncertainty);

/*
 ζ_θ(a, z) with default numerics, continued meromorphically where the
 direct evaluation hits an integer-order pole of TR.

 # Safety
 `symbol` must be a live handle; non-null outputs must be writable.
 */
enum ShubinStatus shubin_zeta(const struct ShubinSymbol *symbol,
                              struct ShubinComplex z,
                              double theta,
                              struct ShubinComplex *out_value,
                              double *out_uncertainty);

/*
 η(a, z) for a self-adjoint symbol; `theta` is the ray used for the power
 of a♯a and must lie in (0, π).

 # Safety
 `symbol` must be a live handle; non-null outputs must be writable.
 */
enum ShubinStatus shubin_eta(const struct ShubinSymbol *symbol,
                             struct ShubinComplex z,
                             double theta,
                             struct ShubinComplex *out_value,
                             double *out_uncertainty);

/*
 The `count` smallest-modulus eigenvalues of the Hermite discretization
 with `basis` functions (n = 1 only), written to `out[0..count]`.

 # Safety
 `symbol` must be a live handle and `out` must hold `count` elements.
 */
enum ShubinStatus shubin_oracle_eigenvalues(const struct ShubinSymbol *symbol,
                                            uintptr_t basis,
                                            uintptr_t count,
                                            struct ShubinComplex *out);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into this library from the same thread.
 */
const char *shubin_last_error_message(void);

/*
 Stable error code (e.g. "pole_point", "not_elliptic") of the last failed
 call on this thread, or null.
 */
const char *shubin_last_error_code(void);

/*
 Library version as a static C string.
 */
const char *shubin_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHUBIN_H */
