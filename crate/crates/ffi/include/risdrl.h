#ifndef RISDRL_H
#define RISDRL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RisdrlStatus {
  RISDRL_STATUS_OK = 0,
  RISDRL_STATUS_NULL_POINTER = 1,
  /**
   * Bad configuration, key, grid or argument value.
   */
  RISDRL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Lengths that do not agree, including undersized output buffers.
   */
  RISDRL_STATUS_SHAPE = 3,
  RISDRL_STATUS_DEGENERATE_CHANNEL = 4,
  RISDRL_STATUS_NUMERIC = 5,
  RISDRL_STATUS_PARSE = 6,
  RISDRL_STATUS_IO = 7,
  RISDRL_STATUS_PANIC = 8,
} RisdrlStatus;

typedef enum RisdrlMode {
  RISDRL_MODE_HD = 0,
  RISDRL_MODE_FD = 1,
} RisdrlMode;

/**
 * Cost measure used by [`risdrl_reduction`].
 */
typedef enum RisdrlChi {
  RISDRL_CHI_PARAMETERS = 0,
  RISDRL_CHI_MULTIPLICATIONS = 1,
  RISDRL_CHI_ADDITIONS = 2,
} RisdrlChi;

/**
 * One channel realization.
 */
typedef struct RisdrlChannel RisdrlChannel;

/**
 * Experiment configuration handle.
 */
typedef struct RisdrlConfig RisdrlConfig;

/**
 * Outcome of a training run.
 */
typedef struct RisdrlTraining RisdrlTraining;

/**
 * Actor plus critic cost of one design.
 */
typedef struct RisdrlComplexity {
  uint64_t parameters;
  uint64_t multiplications;
  uint64_t additions;
} RisdrlComplexity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *risdrl_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length plus
 * one, or 0 when the last call succeeded. `buf` may be null to query the size.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t risdrl_last_error_message(char *buf, size_t len);

/**
 * Creates a configuration holding the defaults.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum RisdrlStatus risdrl_config_new(struct RisdrlConfig **out);

/**
 * Parses `key = value` configuration text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum RisdrlStatus risdrl_config_parse(const char *text, struct RisdrlConfig **out);

/**
 * Sets one configuration key using the text grammar. The configuration is
 * left unchanged if the result would be invalid.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum RisdrlStatus risdrl_config_set(struct RisdrlConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void risdrl_config_free(struct RisdrlConfig *cfg);

/**
 * Draws the channels of episode `episode` of the run seeded by `seed`, with
 * `n` RIS elements and the configuration's geometry and antennas.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid handle slot.
 */
enum RisdrlStatus risdrl_channel_generate(const struct RisdrlConfig *cfg,
                                          size_t n,
                                          uint64_t seed,
                                          size_t episode,
                                          struct RisdrlChannel **out);

/**
 * Number of RIS elements, 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
size_t risdrl_channel_n_elements(const struct RisdrlChannel *ch);

/**
 * # Safety
 * `ch` must be null or a handle not yet freed.
 */
void risdrl_channel_free(struct RisdrlChannel *ch);

/**
 * Achievable rate (HD) or sum rate (FD) in bps/Hz for phases `phi[0..len]`
 * with optimized beamformers.
 *
 * # Safety
 * Handles must be live, `phi` must point to `len` values, `out` is writable.
 */
enum RisdrlStatus risdrl_rate(const struct RisdrlConfig *cfg,
                              const struct RisdrlChannel *ch,
                              const double *phi,
                              size_t len,
                              enum RisdrlMode mode,
                              double *out);

/**
 * Mean rate over `trials` uniformly random phase vectors.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum RisdrlStatus risdrl_random_phase_baseline(const struct RisdrlConfig *cfg,
                                               const struct RisdrlChannel *ch,
                                               enum RisdrlMode mode,
                                               size_t trials,
                                               uint64_t seed,
                                               double *out);

/**
 * Rate with the RIS links removed.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum RisdrlStatus risdrl_without_ris_rate(const struct RisdrlConfig *cfg,
                                          const struct RisdrlChannel *ch,
                                          enum RisdrlMode mode,
                                          double *out);

/**
 * Actor plus critic costs of the proposed and conventional designs at `n`.
 *
 * # Safety
 * `cfg` must be a live handle; both outputs writable.
 */
enum RisdrlStatus risdrl_complexity(const struct RisdrlConfig *cfg,
                                    size_t n,
                                    struct RisdrlComplexity *proposed,
                                    struct RisdrlComplexity *conventional);

/**
 * Fractional cost reduction of the proposed design at `n`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum RisdrlStatus risdrl_reduction(const struct RisdrlConfig *cfg,
                                   size_t n,
                                   enum RisdrlChi chi,
                                   double *out);

/**
 * Trains one agent with the configuration's settings. `n = 0` uses the
 * configured element count. A run that aborts mid-way still yields a handle;
 * see [`risdrl_training_failed`].
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid handle slot.
 */
enum RisdrlStatus risdrl_train(const struct RisdrlConfig *cfg,
                               enum RisdrlMode mode,
                               size_t n,
                               uint64_t seed,
                               bool conventional,
                               struct RisdrlTraining **out);

/**
 * Best rate observed during training, NaN for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
double risdrl_training_best_rate(const struct RisdrlTraining *t);

/**
 * Whether the run stopped early; the curve then ends at the failure point.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
bool risdrl_training_failed(const struct RisdrlTraining *t);

/**
 * Number of phases in the best phase vector.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t risdrl_training_n_elements(const struct RisdrlTraining *t);

/**
 * Copies the best phase vector into `buf[0..len]`.
 *
 * # Safety
 * `t` must be a live handle; `buf` must point to `len` writable values.
 */
enum RisdrlStatus risdrl_training_best_phi(const struct RisdrlTraining *t, double *buf, size_t len);

/**
 * Number of recorded steps.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t risdrl_training_curve_len(const struct RisdrlTraining *t);

/**
 * Copies the per-step rewards into `buf[0..len]`.
 *
 * # Safety
 * `t` must be a live handle; `buf` must point to `len` writable values.
 */
enum RisdrlStatus risdrl_training_rewards(const struct RisdrlTraining *t, double *buf, size_t len);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void risdrl_training_free(struct RisdrlTraining *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISDRL_H */
