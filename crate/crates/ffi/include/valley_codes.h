#ifndef VALLEY_CODES_H
#define VALLEY_CODES_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VcStatus {
  VC_STATUS_OK = 0,
  VC_STATUS_NULL_POINTER = 1,
  VC_STATUS_INVALID_ARGUMENT = 2,
  VC_STATUS_IO = 3,
  VC_STATUS_DECODE_FAILURE = 4,
  VC_STATUS_BUFFER_TOO_SMALL = 5,
  VC_STATUS_PANIC = 6,
} VcStatus;

typedef enum VcChannelKind {
  VC_CHANNEL_KIND_BDC = 0,
  VC_CHANNEL_KIND_PRC = 1,
} VcChannelKind;

/**
 * Opaque code handle.
 */
typedef struct VcCode VcCode;

/**
 * A deletion channel with deletion probability `param`, or a repeat
 * channel with rate `param`.
 */
typedef struct VcChannel {
  enum VcChannelKind kind;
  double param;
} VcChannel;

typedef struct VcDfpEstimate {
  double estimate;
  double lower;
  double upper;
  uint64_t failures;
  uint64_t trials;
} VcDfpEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message on this thread into `buf` (NUL
 * terminated, truncated to `cap - 1` bytes) and returns its full length.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be null with `cap == 0`.
 */
size_t vc_last_error(char *buf, size_t cap);

/**
 * Loads a recursive code config or a table code fixture.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum VcStatus vc_code_load(const char *path, struct VcCode **out);

/**
 * # Safety
 * `code` must come from [`vc_code_load`] and not be used afterwards.
 */
void vc_code_free(struct VcCode *code);

/**
 * Message length in bits; 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t vc_code_message_len(const struct VcCode *code);

/**
 * Block length in bits; 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t vc_code_block_len(const struct VcCode *code);

/**
 * # Safety
 * `code` must be a live handle; buffers as in [`vc_transmit`].
 */
enum VcStatus vc_code_encode(const struct VcCode *code,
                             const uint8_t *message,
                             size_t message_len,
                             uint8_t *out,
                             size_t out_cap,
                             size_t *out_len);

/**
 * Returns [`VcStatus::DecodeFailure`] when no message is found.
 *
 * # Safety
 * `code` must be a live handle; buffers as in [`vc_transmit`].
 */
enum VcStatus vc_code_decode(const struct VcCode *code,
                             const uint8_t *received,
                             size_t received_len,
                             uint8_t *out,
                             size_t out_cap,
                             size_t *out_len);

/**
 * Sends `input` through `channel` using stream `stream` of `seed`.
 *
 * When the output does not fit, returns [`VcStatus::BufferTooSmall`] with
 * the needed length in `*out_len`; repeating the call with the same seed
 * and stream gives the same output.
 *
 * # Safety
 * `input` must point to `input_len` bytes, `out` to `out_cap` writable
 * bytes, and `out_len` must be writable.
 */
enum VcStatus vc_transmit(struct VcChannel channel,
                          uint64_t seed,
                          uint64_t stream,
                          const uint8_t *input,
                          size_t input_len,
                          uint8_t *out,
                          size_t out_cap,
                          size_t *out_len);

/**
 * Monte-Carlo decoding failure probability with a Clopper-Pearson interval.
 *
 * # Safety
 * `code` must be a live handle and `out` writable.
 */
enum VcStatus vc_code_dfp(const struct VcCode *code,
                          struct VcChannel channel,
                          uint64_t trials,
                          uint64_t seed,
                          struct VcDfpEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VALLEY_CODES_H */
