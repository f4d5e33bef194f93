//! C interface to `cluster_purging`.
//!
//! Every object crosses the boundary as an opaque handle that the caller
//! frees with the matching `cp_*_free` function. Fallible calls return a
//! [`CpStatus`] and write their result through an out pointer; on failure
//! [`cp_last_error_message`] describes what went wrong on the calling thread.
//! Panics never unwind into C: they are caught and reported as
//! [`CpStatus::Panic`]. Enum arguments must hold one of the declared values.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cluster_purging::backends::{dbscan, hac_complete, kmeans, vanilla_detect};
use cluster_purging::io::report_to_json;
use cluster_purging::perturb::nn_representation;
use cluster_purging::{
    parameter_free, parametric, perturb, Clustering, Dataset, DistortionMeasure, Error,
    OutlierReport, PerturbationStrategy,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed data or parameters, including size and index mismatches.
    InvalidArgument = 2,
    /// Well-formed input on which the hull computation cannot proceed.
    Degenerate = 3,
    /// A caller-provided buffer is too small.
    BufferTooSmall = 4,
    /// Serialization failure.
    Serialization = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Distortion measure selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpMeasure {
    Euclidean = 0,
    SquaredEuclidean = 1,
    Manhattan = 2,
}

impl From<CpMeasure> for DistortionMeasure {
    fn from(m: CpMeasure) -> Self {
        match m {
            CpMeasure::Euclidean => DistortionMeasure::Euclidean,
            CpMeasure::SquaredEuclidean => DistortionMeasure::SquaredEuclidean,
            CpMeasure::Manhattan => DistortionMeasure::Manhattan,
        }
    }
}

/// Perturbation strategy: cluster picked by size, then member by distortion.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpStrategy {
    MinMin = 0,
    MinMax = 1,
    MaxMin = 2,
    MaxMax = 3,
}

impl From<CpStrategy> for PerturbationStrategy {
    fn from(s: CpStrategy) -> Self {
        match s {
            CpStrategy::MinMin => PerturbationStrategy::MIN_MIN,
            CpStrategy::MinMax => PerturbationStrategy::MIN_MAX,
            CpStrategy::MaxMin => PerturbationStrategy::MAX_MIN,
            CpStrategy::MaxMax => PerturbationStrategy::MAX_MAX,
        }
    }
}

/// Row-major numeric dataset.
pub struct CpDataset(Dataset);

/// Hard partition of a dataset with its representation.
pub struct CpClustering(Clustering);

/// Outlier flags produced by a detector.
pub struct CpReport(OutlierReport);

enum Failure {
    Null(&'static str),
    Core(Error),
    Buffer { needed: usize, capacity: usize },
    Serialization(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> CpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return CpStatus::Ok,
        Ok(Err(Failure::Null(arg))) => (CpStatus::NullPointer, format!("`{arg}` is null")),
        Ok(Err(Failure::Core(e))) if e.is_degenerate() => (CpStatus::Degenerate, e.to_string()),
        Ok(Err(Failure::Core(e))) => (CpStatus::InvalidArgument, e.to_string()),
        Ok(Err(Failure::Buffer { needed, capacity })) => (
            CpStatus::BufferTooSmall,
            format!("buffer holds {capacity} elements, {needed} needed"),
        ),
        Ok(Err(Failure::Serialization(m))) => (CpStatus::Serialization, m),
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (CpStatus::Panic, format!("panic: {what}"))
        }
    };
    set_last_error(msg);
    status
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, capacity: usize) -> Result<(), Failure> {
    if capacity < src.len() {
        return Err(Failure::Buffer {
            needed: src.len(),
            capacity,
        });
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message describing the last failed call on this thread, or null if the
/// last call succeeded. The pointer stays valid until the next call into
/// this library on the same thread.
#[no_mangle]
pub extern "C" fn cp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a dataset from `n * dim` row-major values.
///
/// # Safety
/// `values` must point to `n * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_dataset_new(
    values: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut CpDataset,
) -> CpStatus {
    guard(|| {
        let len = n.checked_mul(dim).ok_or_else(|| {
            Failure::Core(Error::InvalidDataset(format!("{n} x {dim} values overflow")))
        })?;
        let values = slice(values, len, "values")?.to_vec();
        emit(out, CpDataset(Dataset::from_flat(values, dim)?))
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_dataset_len(dataset: *const CpDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Number of features, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_dataset_dim(dataset: *const CpDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.dim())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cp_dataset_free(dataset: *mut CpDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Clustering from 0-based assignments, represented by cluster means.
///
/// # Safety
/// `assignments` must hold `n` values; `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_clustering_with_means(
    dataset: *const CpDataset,
    assignments: *const usize,
    n: usize,
    out: *mut *mut CpClustering,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        let a = slice(assignments, n, "assignments")?.to_vec();
        emit(out, CpClustering(Clustering::with_mean_centroids(&ds.0, a)?))
    })
}

/// Clustering from 0-based assignments, each observation represented by its
/// nearest neighbor within its cluster.
///
/// # Safety
/// `assignments` must hold `n` values; `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_clustering_with_nearest_neighbors(
    dataset: *const CpDataset,
    assignments: *const usize,
    n: usize,
    measure: CpMeasure,
    out: *mut *mut CpClustering,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        let a = slice(assignments, n, "assignments")?.to_vec();
        emit(out, CpClustering(nn_representation(&ds.0, a, measure.into())?))
    })
}

/// Seeded k-means with `n_start` restarts.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_kmeans(
    dataset: *const CpDataset,
    k: usize,
    n_start: usize,
    seed: u64,
    out: *mut *mut CpClustering,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        emit(out, CpClustering(kmeans(&ds.0, k, n_start, seed)?))
    })
}

/// Complete-linkage agglomerative clustering cut at `k` clusters.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_hac_complete(
    dataset: *const CpDataset,
    k: usize,
    out: *mut *mut CpClustering,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        emit(out, CpClustering(hac_complete(&ds.0, k)?))
    })
}

/// DBSCAN; noise points become singleton clusters.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_dbscan(
    dataset: *const CpDataset,
    eps: f64,
    min_pts: usize,
    out: *mut *mut CpClustering,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        emit(out, CpClustering(dbscan(&ds.0, eps, min_pts)?))
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `clustering` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_clustering_len(clustering: *const CpClustering) -> usize {
    clustering.as_ref().map_or(0, |c| c.0.len())
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `clustering` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_clustering_num_clusters(clustering: *const CpClustering) -> usize {
    clustering.as_ref().map_or(0, |c| c.0.num_clusters())
}

/// Copies the assignments into `out`, which holds `capacity` elements.
///
/// # Safety
/// `clustering` must be a live handle; `out` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn cp_clustering_assignments(
    clustering: *const CpClustering,
    out: *mut usize,
    capacity: usize,
) -> CpStatus {
    guard(|| copy_out(deref(clustering, "clustering")?.0.assignments(), out, capacity))
}

/// Purges one observation from `clustering` according to `strategy`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_perturb(
    dataset: *const CpDataset,
    clustering: *const CpClustering,
    strategy: CpStrategy,
    measure: CpMeasure,
    out: *mut *mut CpClustering,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        let c = deref(clustering, "clustering")?;
        let q = perturb(&ds.0, &c.0, strategy.into(), DistortionMeasure::from(measure))?;
        emit(out, CpClustering(q))
    })
}

/// # Safety
/// `clustering` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cp_clustering_free(clustering: *mut CpClustering) {
    if !clustering.is_null() {
        drop(Box::from_raw(clustering));
    }
}

/// Parameter-free detection over `count` clusterings of `dataset`.
///
/// # Safety
/// `clusterings` must hold `count` live handles.
#[no_mangle]
pub unsafe extern "C" fn cp_detect_parameter_free(
    dataset: *const CpDataset,
    clusterings: *const *const CpClustering,
    count: usize,
    measure: CpMeasure,
    out: *mut *mut CpReport,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        let handles = slice(clusterings, count, "clusterings")?;
        let cs = handles
            .iter()
            .map(|&h| deref(h, "clusterings[i]").map(|c| c.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        emit(out, CpReport(parameter_free(&ds.0, &cs, DistortionMeasure::from(measure))?))
    })
}

/// Parametric detection with hull slope magnitude `kappa > 0`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_detect_parametric(
    dataset: *const CpDataset,
    clustering: *const CpClustering,
    kappa: f64,
    measure: CpMeasure,
    out: *mut *mut CpReport,
) -> CpStatus {
    guard(|| {
        let ds = deref(dataset, "dataset")?;
        let c = deref(clustering, "clustering")?;
        emit(out, CpReport(parametric(&ds.0, &c.0, kappa, DistortionMeasure::from(measure))?))
    })
}

/// Flags the members of singleton clusters.
///
/// # Safety
/// `clustering` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_detect_vanilla(
    clustering: *const CpClustering,
    out: *mut *mut CpReport,
) -> CpStatus {
    guard(|| emit(out, CpReport(vanilla_detect(&deref(clustering, "clustering")?.0))))
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_report_len(report: *const CpReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.len())
}

/// Number of flagged observations, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_report_num_outliers(report: *const CpReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.num_outliers())
}

/// Writes one byte per observation (1 = outlier) into `out`.
///
/// # Safety
/// `report` must be a live handle; `out` must hold `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn cp_report_mask(
    report: *const CpReport,
    out: *mut u8,
    capacity: usize,
) -> CpStatus {
    guard(|| {
        let mask: Vec<u8> = deref(report, "report")?.0.is_outlier.iter().map(|&b| b as u8).collect();
        copy_out(&mask, out, capacity)
    })
}

/// Writes the ascending 0-based outlier indices into `out`. Size the buffer
/// with [`cp_report_num_outliers`].
///
/// # Safety
/// `report` must be a live handle; `out` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn cp_report_outliers(
    report: *const CpReport,
    out: *mut usize,
    capacity: usize,
) -> CpStatus {
    guard(|| copy_out(&deref(report, "report")?.0.outliers(), out, capacity))
}

/// Serializes the report as JSON. Release the string with [`cp_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cp_report_to_json(report: *const CpReport, out: *mut *mut c_char) -> CpStatus {
    guard(|| {
        let r = deref(report, "report")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let json = report_to_json(&r.0)?;
        let c = CString::new(json).map_err(|e| Failure::Serialization(e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cp_report_free(report: *mut CpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
