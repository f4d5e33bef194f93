use std::ffi::CStr;
use std::ptr;

use cluster_purging_ffi::*;

fn toy() -> *mut CpDataset {
    let xs = [0.0, 0.1, 0.2, 0.3, 0.4, 100.0];
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { cp_dataset_new(xs.as_ptr(), 6, 1, &mut ds) }, CpStatus::Ok);
    ds
}

fn means(ds: *const CpDataset, a: &[usize]) -> *mut CpClustering {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { cp_clustering_with_means(ds, a.as_ptr(), a.len(), &mut c) }, CpStatus::Ok);
    c
}

fn last_error() -> String {
    let p = cp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn outliers(r: *const CpReport) -> Vec<usize> {
    let n = unsafe { cp_report_num_outliers(r) };
    let mut buf = vec![0usize; n];
    assert_eq!(unsafe { cp_report_outliers(r, buf.as_mut_ptr(), n) }, CpStatus::Ok);
    buf
}

#[test]
fn toy_parameter_free_flags_the_far_point() {
    let ds = toy();
    let p = means(ds, &[0, 0, 0, 0, 0, 1]);
    let q = means(ds, &[0, 0, 1, 1, 1, 2]);
    let cs = [p as *const CpClustering, q as *const CpClustering];
    let mut r = ptr::null_mut();
    let st = unsafe { cp_detect_parameter_free(ds, cs.as_ptr(), 2, CpMeasure::Euclidean, &mut r) };
    assert_eq!(st, CpStatus::Ok);
    assert!(cp_last_error_message().is_null());
    assert_eq!(unsafe { cp_report_len(r) }, 6);
    assert_eq!(outliers(r), vec![5]);

    let mut mask = [9u8; 6];
    assert_eq!(unsafe { cp_report_mask(r, mask.as_mut_ptr(), 6) }, CpStatus::Ok);
    assert_eq!(mask, [0, 0, 0, 0, 0, 1]);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { cp_report_to_json(r, &mut json) }, CpStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["outliers"], serde_json::json!([5]));
    unsafe {
        cp_string_free(json);
        cp_report_free(r);
        cp_clustering_free(p);
        cp_clustering_free(q);
        cp_dataset_free(ds);
    }
}

#[test]
fn parametric_and_vanilla() {
    let ds = toy();
    let p = means(ds, &[0, 0, 0, 0, 0, 1]);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { cp_detect_parametric(ds, p, 1.8693, CpMeasure::Euclidean, &mut r) }, CpStatus::Ok);
    assert_eq!(outliers(r), vec![5]);
    unsafe { cp_report_free(r) };

    let mut v = ptr::null_mut();
    assert_eq!(unsafe { cp_detect_vanilla(p, &mut v) }, CpStatus::Ok);
    assert_eq!(outliers(v), vec![5]);
    unsafe {
        cp_report_free(v);
        cp_clustering_free(p);
        cp_dataset_free(ds);
    }
}

#[test]
fn backends_and_perturb_produce_clusterings() {
    let ds = toy();
    let mut km = ptr::null_mut();
    assert_eq!(unsafe { cp_kmeans(ds, 2, 5, 3, &mut km) }, CpStatus::Ok);
    let mut a = [0usize; 6];
    assert_eq!(unsafe { cp_clustering_assignments(km, a.as_mut_ptr(), 6) }, CpStatus::Ok);
    assert!(a[..5].iter().all(|&g| g == a[0]) && a[5] != a[0]);
    assert_eq!(unsafe { cp_clustering_num_clusters(km) }, 2);

    let mut hac = ptr::null_mut();
    assert_eq!(unsafe { cp_hac_complete(ds, 2, &mut hac) }, CpStatus::Ok);
    assert_eq!(unsafe { cp_clustering_len(hac) }, 6);

    let mut db = ptr::null_mut();
    assert_eq!(unsafe { cp_dbscan(ds, 0.15, 2, &mut db) }, CpStatus::Ok);
    assert_eq!(unsafe { cp_clustering_num_clusters(db) }, 2);

    let mut q = ptr::null_mut();
    assert_eq!(
        unsafe { cp_perturb(ds, km, CpStrategy::MaxMax, CpMeasure::Euclidean, &mut q) },
        CpStatus::Ok
    );
    assert_eq!(unsafe { cp_clustering_num_clusters(q) }, 3);

    let mut nn = ptr::null_mut();
    assert_eq!(
        unsafe { cp_clustering_with_nearest_neighbors(ds, a.as_ptr(), 6, CpMeasure::Manhattan, &mut nn) },
        CpStatus::Ok
    );
    unsafe {
        for c in [km, hac, db, q, nn] {
            cp_clustering_free(c);
        }
        cp_dataset_free(ds);
    }
}

#[test]
fn errors_are_reported_with_status_and_message() {
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { cp_dataset_new(ptr::null(), 3, 2, &mut ds) }, CpStatus::NullPointer);
    assert!(last_error().contains("values"));
    assert!(ds.is_null());

    let nan = [f64::NAN];
    assert_eq!(unsafe { cp_dataset_new(nan.as_ptr(), 1, 1, &mut ds) }, CpStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    let ds = toy();
    let mut c = ptr::null_mut();
    let short = [0usize; 3];
    assert_eq!(
        unsafe { cp_clustering_with_means(ds, short.as_ptr(), 3, &mut c) },
        CpStatus::InvalidArgument
    );

    let p = means(ds, &[0, 0, 0, 0, 0, 1]);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { cp_detect_parametric(ds, p, -1.0, CpMeasure::Euclidean, &mut r) }, CpStatus::InvalidArgument);

    let one = [p as *const CpClustering];
    assert_eq!(
        unsafe { cp_detect_parameter_free(ds, one.as_ptr(), 1, CpMeasure::Euclidean, &mut r) },
        CpStatus::InvalidArgument
    );
    // the same clustering twice leaves a one-vertex hull
    let twice = [p as *const CpClustering, p as *const CpClustering];
    assert_eq!(
        unsafe { cp_detect_parameter_free(ds, twice.as_ptr(), 2, CpMeasure::Euclidean, &mut r) },
        CpStatus::Degenerate
    );
    assert!(r.is_null());

    let mut small = [0usize; 2];
    assert_eq!(unsafe { cp_clustering_assignments(p, small.as_mut_ptr(), 2) }, CpStatus::BufferTooSmall);
    assert!(last_error().contains("6 needed"));

    assert_eq!(unsafe { cp_kmeans(ds, 2, 1, 0, ptr::null_mut()) }, CpStatus::NullPointer);
    assert_eq!(unsafe { cp_dataset_len(ptr::null()) }, 0);
    unsafe {
        cp_clustering_free(p);
        cp_dataset_free(ds);
        cp_dataset_free(ptr::null_mut());
        cp_report_free(ptr::null_mut());
        cp_string_free(ptr::null_mut());
    }
}
