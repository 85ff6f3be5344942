#ifndef LATENT_TRANSLATE_H
#define LATENT_TRANSLATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum LtStatus {
  LT_STATUS_OK = 0,
  /**
   * Null pointer, bad buffer size or inconsistent configuration.
   */
  LT_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed or inconsistent input data, including unreadable files.
   */
  LT_STATUS_DATA = 2,
  /**
   * Degenerate anchors or a failed decomposition.
   */
  LT_STATUS_NUMERICAL = 3,
  /**
   * The library panicked; the call had no effect.
   */
  LT_STATUS_INTERNAL = 4,
} LtStatus;

typedef enum LtDtype {
  LT_DTYPE_F32 = 1,
  LT_DTYPE_F64 = 2,
} LtDtype;

typedef enum LtMethod {
  LT_METHOD_AFFINE = 0,
  LT_METHOD_LINEAR = 1,
  LT_METHOD_L_ORTHO = 2,
  LT_METHOD_ORTHO = 3,
} LtMethod;

typedef enum LtScaling {
  LT_SCALING_STANDARD = 0,
  LT_SCALING_UNIT_NORM = 1,
  LT_SCALING_NONE = 2,
} LtScaling;

/**
 * A validated `count x dim` matrix of encodings.
 */
typedef struct LtSpace LtSpace;

/**
 * A fitted translation, including its pre- and post-processing.
 */
typedef struct LtTranslator LtTranslator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *lt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lt_version(void);

/**
 * Copies `rows * cols` row-major values into a new space.
 */
enum LtStatus lt_space_new(const double *data, size_t rows, size_t cols, struct LtSpace **out);

void lt_space_free(struct LtSpace *space);

/**
 * Row count, or 0 for a null handle.
 */
size_t lt_space_rows(const struct LtSpace *space);

/**
 * Column count, or 0 for a null handle.
 */
size_t lt_space_cols(const struct LtSpace *space);

/**
 * Copies the values row-major into `out`, which must hold exactly `len = rows * cols` doubles.
 */
enum LtStatus lt_space_copy_data(const struct LtSpace *space, double *out, size_t len);

enum LtStatus lt_space_read(const char *path, struct LtSpace **out);

enum LtStatus lt_space_write(const struct LtSpace *space, const char *path, enum LtDtype dtype);

/**
 * Fits a translator on `n_anchors` pairs `(source_indices[i], target_indices[i])`.
 */
enum LtStatus lt_translator_fit(const struct LtSpace *source,
                                const struct LtSpace *target,
                                const size_t *source_indices,
                                const size_t *target_indices,
                                size_t n_anchors,
                                enum LtMethod method,
                                enum LtScaling scaling,
                                struct LtTranslator **out);

enum LtStatus lt_translator_apply(const struct LtTranslator *translator,
                                  const struct LtSpace *space,
                                  struct LtSpace **out);

/**
 * Input width of the translator, or 0 for a null handle.
 */
size_t lt_translator_source_dim(const struct LtTranslator *translator);

/**
 * Output width of the translator, or 0 for a null handle.
 */
size_t lt_translator_target_dim(const struct LtTranslator *translator);

enum LtStatus lt_translator_read(const char *path, struct LtTranslator **out);

enum LtStatus lt_translator_write(const struct LtTranslator *translator, const char *path);

void lt_translator_free(struct LtTranslator *translator);

/**
 * Mean row-wise cosine similarity between two equally shaped spaces.
 */
enum LtStatus lt_latent_cosine(const struct LtSpace *translated,
                               const struct LtSpace *target,
                               double *out);

/**
 * Mean squared entry difference between two equally shaped spaces.
 */
enum LtStatus lt_latent_mse(const struct LtSpace *translated,
                            const struct LtSpace *target,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATENT_TRANSLATE_H */
