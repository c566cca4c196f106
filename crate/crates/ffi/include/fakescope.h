#ifndef FAKESCOPE_H
#define FAKESCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FS_OK 0

// A required pointer argument was null.
#define FS_ERR_NULL -1

// A string argument was not valid UTF-8.
#define FS_ERR_UTF8 -2

// An argument or input record was rejected.
#define FS_ERR_INVALID -3

// A file could not be read or written, or an upstream artifact is missing.
#define FS_ERR_IO -4

// The text-generation service failed.
#define FS_ERR_SERVICE -5

// A Rust panic was caught at the boundary.
#define FS_ERR_PANIC -99

#define FS_DETECTOR_DEFAULT 0

#define FS_DETECTOR_NAIVE_BAYES 1

#define FS_DETECTOR_LOGISTIC_REGRESSION 2

// Opaque trained detector.
typedef struct FsDetector FsDetector;

// Opaque n-gram language model.
typedef struct FsLanguageModel FsLanguageModel;

// Opaque pipeline bound to one configuration.
typedef struct FsPipeline FsPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *fs_last_error(void);

// Library version as a static NUL-terminated string.
const char *fs_version(void);

// Automated readability index of `text`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
int32_t fs_ari(const char *text, double *out);

// Estimated reading time of `text` in seconds.
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
int32_t fs_reading_time(const char *text, double *out);

// One-way ANOVA over `n_groups` groups stored back to back in `values`;
// `sizes[i]` is the length of group `i`.
//
// # Safety
// `values` must hold the sum of `sizes`, `sizes` must hold `n_groups`
// entries, and `f_out` and `p_out` must be writable.
int32_t fs_anova_oneway(const double *values,
                        const size_t *sizes,
                        size_t n_groups,
                        double *f_out,
                        double *p_out);

// Load a language model written by the `metrics` stage.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
int32_t fs_lm_open(const char *path, struct FsLanguageModel **out);

// Perplexity of `text` under the model.
//
// # Safety
// `lm` must come from [`fs_lm_open`]; `text` must be a NUL-terminated
// string and `out` writable.
int32_t fs_lm_perplexity(const struct FsLanguageModel *lm, const char *text, double *out);

// Shuffle-test coherence of `text`; `seed` picks the sampled sentences.
//
// # Safety
// As for [`fs_lm_perplexity`].
int32_t fs_lm_coherence(const struct FsLanguageModel *lm,
                        const char *text,
                        uint64_t seed,
                        double *out);

// # Safety
// `lm` must be null or come from [`fs_lm_open`], and not be used afterwards.
void fs_lm_free(struct FsLanguageModel *lm);

// Load the detector trained into `out_dir`. `kind` is one of the
// `FS_DETECTOR_*` codes; the default is the configured detector.
//
// # Safety
// `out_dir` must be a NUL-terminated string and `out` writable.
int32_t fs_detector_open(const char *out_dir, int32_t kind, struct FsDetector **out);

// Probability in [0, 1] that `text` is machine-generated.
//
// # Safety
// `detector` must come from [`fs_detector_open`]; `text` must be a
// NUL-terminated string and `out` writable.
int32_t fs_detector_score(const struct FsDetector *detector, const char *text, double *out);

// # Safety
// `detector` must be null or come from [`fs_detector_open`], and not be
// used afterwards.
void fs_detector_free(struct FsDetector *detector);

// Create a pipeline from a JSON configuration (null for defaults) and an
// optional output directory override (null to keep the configured one).
//
// # Safety
// Non-null strings must be NUL-terminated; `out` must be writable.
int32_t fs_pipeline_new(const char *config_json, const char *out_dir, struct FsPipeline **out);

// Run one stage by its command name: `ingest`, `generate`, `train`,
// `calibrate`, `infer`, `metrics`, `analyze` or `run`. `input` is the corpus
// path for `ingest` and `run` (null for the configured one).
//
// # Safety
// `pipeline` must come from [`fs_pipeline_new`]; `stage` must be a
// NUL-terminated string and `input` null or one.
int32_t fs_pipeline_run_stage(const struct FsPipeline *pipeline,
                              const char *stage,
                              const char *input);

// # Safety
// `pipeline` must be null or come from [`fs_pipeline_new`], and not be used
// afterwards.
void fs_pipeline_free(struct FsPipeline *pipeline);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAKESCOPE_H */
