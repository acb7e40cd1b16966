#ifndef THZLINK_H
#define THZLINK_H

/* Generated by cbindgen from the thzlink-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum ThzStatus {
  // Success.
  THZ_OK = 0,
  // I/O failure.
  THZ_ERR_IO = 1,
  // Invalid configuration or argument.
  THZ_ERR_CONFIG = 2,
  // Numerical breakdown, estimation failure, or infeasible search.
  THZ_ERR_NUMERICAL = 3,
  // A required pointer argument was NULL.
  THZ_ERR_NULL = 4,
  // A string argument was not valid UTF-8.
  THZ_ERR_UTF8 = 5,
  // An index was out of range.
  THZ_ERR_RANGE = 6,
  // Internal error (caught panic).
  THZ_ERR_INTERNAL = 7,
} ThzStatus;

// Opaque link configuration handle.
typedef struct ThzConfig ThzConfig;

// Opaque sweep result handle.
typedef struct ThzSweepResult ThzSweepResult;

// One measured point of a BLER sweep.
typedef struct ThzSnrPoint {
  double snr_db;
  uint64_t blocks;
  uint64_t errors;
  uint64_t numerical_failures;
  double bler;
} ThzSnrPoint;

// Result of a PA back-off search.
typedef struct ThzBackoffResult {
  double backoff_db;
  double evm_pct;
  double aclr_db;
} ThzBackoffResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent error on this thread. The pointer stays
// valid until the next failing call on the same thread; never free it.
const char *thz_last_error_message(void);

// Library version ("major.minor.patch"); a static string, never freed.
const char *thz_version(void);

// Parse a TOML link configuration. On success `*out` owns the handle.
//
// # Safety
// `toml_text` must be NUL-terminated; `out` must be a valid pointer.
enum ThzStatus thz_config_parse(const char *toml_text, struct ThzConfig **out);

// Apply one dotted-path override, e.g. key `waveform.modulation`,
// value `64qam`. The value is parsed as a TOML literal, falling back to
// a string, so `960`, `true` and `sc-fdma` all work unquoted.
//
// # Safety
// `cfg` must be a live handle; `key`/`value` NUL-terminated strings.
enum ThzStatus thz_config_set(struct ThzConfig *cfg, const char *key, const char *value);

// Render the resolved configuration as TOML into a newly allocated
// string; release it with `thz_string_free`.
//
// # Safety
// `cfg` must be a live handle; `out` must be a valid pointer.
enum ThzStatus thz_config_to_toml(const struct ThzConfig *cfg, char **out);

// Release a configuration handle. NULL is a no-op.
//
// # Safety
// `cfg` must be a handle from this library, freed at most once.
void thz_config_free(struct ThzConfig *cfg);

// Release a string returned by this library. NULL is a no-op.
//
// # Safety
// `s` must come from this library, freed at most once.
void thz_string_free(char *s);

// Run the configured BLER-vs-SNR sweep. Blocking; on success `*out`
// owns the result handle.
//
// # Safety
// `cfg` must be a live handle; `out` must be a valid pointer.
enum ThzStatus thz_sweep_run(const struct ThzConfig *cfg, struct ThzSweepResult **out);

// Number of measured SNR points in a sweep result.
//
// # Safety
// `res` must be a live handle.
size_t thz_sweep_num_points(const struct ThzSweepResult *res);

// Copy point `index` into `*out`.
//
// # Safety
// `res` must be a live handle; `out` must be a valid pointer.
enum ThzStatus thz_sweep_point(const struct ThzSweepResult *res,
                               size_t index,
                               struct ThzSnrPoint *out);

// Required SNR (dB) to reach the 10% BLER target. Writes NaN and sets
// `*achieved = false` when the sweep never crossed the target (error
// floor).
//
// # Safety
// `res` must be a live handle; `out`/`achieved` must be valid pointers.
enum ThzStatus thz_sweep_required_snr(const struct ThzSweepResult *res,
                                      double *out,
                                      bool *achieved);

// Release a sweep result handle. NULL is a no-op.
//
// # Safety
// `res` must be a handle from this library, freed at most once.
void thz_sweep_free(struct ThzSweepResult *res);

// Smallest PA back-off (dB) meeting the ACLR limit and the
// modulation's EVM limit, for `waveform` ("ofdm" or "sc-fdma") and
// `modulation` ("qpsk", "16qam", "64qam", "256qam") on a Rapp PA with
// smoothness `smoothness_p`, probing `slots` slots of random data.
//
// # Safety
// `waveform`/`modulation` must be NUL-terminated; `out` must be valid.
enum ThzStatus thz_required_backoff(const char *waveform,
                                    const char *modulation,
                                    uint32_t scs_khz,
                                    size_t prb_count,
                                    double smoothness_p,
                                    size_t slots,
                                    uint64_t seed,
                                    struct ThzBackoffResult *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* THZLINK_H */
