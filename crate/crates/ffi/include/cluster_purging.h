#ifndef CLUSTER_PURGING_H
#define CLUSTER_PURGING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CpStatus {
  CP_STATUS_OK = 0,
  // A required pointer argument was null.
  CP_STATUS_NULL_POINTER = 1,
  // Malformed data or parameters, including size and index mismatches.
  CP_STATUS_INVALID_ARGUMENT = 2,
  // Well-formed input on which the hull computation cannot proceed.
  CP_STATUS_DEGENERATE = 3,
  // A caller-provided buffer is too small.
  CP_STATUS_BUFFER_TOO_SMALL = 4,
  // Serialization failure.
  CP_STATUS_SERIALIZATION = 5,
  // A Rust panic was caught at the boundary.
  CP_STATUS_PANIC = 6,
} CpStatus;

// Distortion measure selector.
typedef enum CpMeasure {
  CP_MEASURE_EUCLIDEAN = 0,
  CP_MEASURE_SQUARED_EUCLIDEAN = 1,
  CP_MEASURE_MANHATTAN = 2,
} CpMeasure;

// Perturbation strategy: cluster picked by size, then member by distortion.
typedef enum CpStrategy {
  CP_STRATEGY_MIN_MIN = 0,
  CP_STRATEGY_MIN_MAX = 1,
  CP_STRATEGY_MAX_MIN = 2,
  CP_STRATEGY_MAX_MAX = 3,
} CpStrategy;

// Hard partition of a dataset with its representation.
typedef struct CpClustering CpClustering;

// Row-major numeric dataset.
typedef struct CpDataset CpDataset;

// Outlier flags produced by a detector.
typedef struct CpReport CpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or null if the
// last call succeeded. The pointer stays valid until the next call into
// this library on the same thread.
const char *cp_last_error_message(void);

// Creates a dataset from `n * dim` row-major values.
//
// # Safety
// `values` must point to `n * dim` readable doubles; `out` must be writable.
enum CpStatus cp_dataset_new(const double *values, size_t n, size_t dim, struct CpDataset **out);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle.
size_t cp_dataset_len(const struct CpDataset *dataset);

// Number of features, or 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle.
size_t cp_dataset_dim(const struct CpDataset *dataset);

// # Safety
// `dataset` must be null or a handle not yet freed.
void cp_dataset_free(struct CpDataset *dataset);

// Clustering from 0-based assignments, represented by cluster means.
//
// # Safety
// `assignments` must hold `n` values; `dataset` must be a live handle.
enum CpStatus cp_clustering_with_means(const struct CpDataset *dataset,
                                       const size_t *assignments,
                                       size_t n,
                                       struct CpClustering **out);

// Clustering from 0-based assignments, each observation represented by its
// nearest neighbor within its cluster.
//
// # Safety
// `assignments` must hold `n` values; `dataset` must be a live handle.
enum CpStatus cp_clustering_with_nearest_neighbors(const struct CpDataset *dataset,
                                                   const size_t *assignments,
                                                   size_t n,
                                                   enum CpMeasure measure,
                                                   struct CpClustering **out);

// Seeded k-means with `n_start` restarts.
//
// # Safety
// `dataset` must be a live handle; `out` must be writable.
enum CpStatus cp_kmeans(const struct CpDataset *dataset,
                        size_t k,
                        size_t n_start,
                        uint64_t seed,
                        struct CpClustering **out);

// Complete-linkage agglomerative clustering cut at `k` clusters.
//
// # Safety
// `dataset` must be a live handle; `out` must be writable.
enum CpStatus cp_hac_complete(const struct CpDataset *dataset, size_t k, struct CpClustering **out);

// DBSCAN; noise points become singleton clusters.
//
// # Safety
// `dataset` must be a live handle; `out` must be writable.
enum CpStatus cp_dbscan(const struct CpDataset *dataset,
                        double eps,
                        size_t min_pts,
                        struct CpClustering **out);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `clustering` must be null or a live handle.
size_t cp_clustering_len(const struct CpClustering *clustering);

// Number of clusters, or 0 for a null handle.
//
// # Safety
// `clustering` must be null or a live handle.
size_t cp_clustering_num_clusters(const struct CpClustering *clustering);

// Copies the assignments into `out`, which holds `capacity` elements.
//
// # Safety
// `clustering` must be a live handle; `out` must hold `capacity` elements.
enum CpStatus cp_clustering_assignments(const struct CpClustering *clustering,
                                        size_t *out,
                                        size_t capacity);

// Purges one observation from `clustering` according to `strategy`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum CpStatus cp_perturb(const struct CpDataset *dataset,
                         const struct CpClustering *clustering,
                         enum CpStrategy strategy,
                         enum CpMeasure measure,
                         struct CpClustering **out);

// # Safety
// `clustering` must be null or a handle not yet freed.
void cp_clustering_free(struct CpClustering *clustering);

// Parameter-free detection over `count` clusterings of `dataset`.
//
// # Safety
// `clusterings` must hold `count` live handles.
enum CpStatus cp_detect_parameter_free(const struct CpDataset *dataset,
                                       const struct CpClustering *const *clusterings,
                                       size_t count,
                                       enum CpMeasure measure,
                                       struct CpReport **out);

// Parametric detection with hull slope magnitude `kappa > 0`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum CpStatus cp_detect_parametric(const struct CpDataset *dataset,
                                   const struct CpClustering *clustering,
                                   double kappa,
                                   enum CpMeasure measure,
                                   struct CpReport **out);

// Flags the members of singleton clusters.
//
// # Safety
// `clustering` must be a live handle; `out` must be writable.
enum CpStatus cp_detect_vanilla(const struct CpClustering *clustering, struct CpReport **out);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t cp_report_len(const struct CpReport *report);

// Number of flagged observations, or 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t cp_report_num_outliers(const struct CpReport *report);

// Writes one byte per observation (1 = outlier) into `out`.
//
// # Safety
// `report` must be a live handle; `out` must hold `capacity` bytes.
enum CpStatus cp_report_mask(const struct CpReport *report, uint8_t *out, size_t capacity);

// Writes the ascending 0-based outlier indices into `out`. Size the buffer
// with [`cp_report_num_outliers`].
//
// # Safety
// `report` must be a live handle; `out` must hold `capacity` elements.
enum CpStatus cp_report_outliers(const struct CpReport *report, size_t *out, size_t capacity);

// Serializes the report as JSON. Release the string with [`cp_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum CpStatus cp_report_to_json(const struct CpReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void cp_report_free(struct CpReport *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void cp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLUSTER_PURGING_H */
