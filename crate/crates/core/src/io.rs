//! File formats: dataset and label CSV, clustering and report JSON, hull and
//! score-table CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ScoreRow;
use crate::model::{Clustering, ClusteringParams, Dataset, Representation};
use crate::purging::{ClusteringThresholds, Detector, OutlierReport};
use crate::rd::{RateDistortionHull, RdPoint};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse(format!("row {}: {e}", p.line())),
        None => Error::Parse(e.to_string()),
    }
}

/// A header has at least one field that is neither empty nor numeric.
fn is_header(record: &csv::StringRecord) -> bool {
    record.iter().any(|f| !f.is_empty() && f.parse::<f64>().is_err())
}

fn parse_label(field: &str, row: u64, col: usize) -> Result<bool> {
    match field {
        "1" | "1.0" | "true" | "True" | "TRUE" => Ok(true),
        "0" | "0.0" | "false" | "False" | "FALSE" => Ok(false),
        other => Err(Error::Parse(format!(
            "row {row}, column {col}: label `{other}` is not 0 or 1"
        ))),
    }
}

/// Reads a numeric CSV dataset. A header row is detected when its fields are
/// not all numeric; a final header column named `label` holds 0/1 outlier
/// labels.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(open(path)?)
}

pub fn parse_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv_reader(reader);
    let mut has_label = false;
    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut first = true;

    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if is_header(&record) {
                has_label = record
                    .iter()
                    .next_back()
                    .is_some_and(|h| h.eq_ignore_ascii_case("label"));
                width = Some(record.len());
                continue;
            }
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse(format!(
                "row {row}: expected {w} columns, found {}",
                record.len()
            )));
        }
        let dim = if has_label { w - 1 } else { w };
        for (col, field) in record.iter().enumerate().take(dim) {
            if field.is_empty() {
                return Err(Error::Parse(format!("row {row}, column {}: missing value", col + 1)));
            }
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!("row {row}, column {}: `{field}` is not a number", col + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {row}, column {}: non-finite value", col + 1)));
            }
            values.push(v);
        }
        if has_label {
            labels.push(parse_label(&record[dim], row, dim + 1)?);
        }
    }
    let dim = match width {
        Some(w) if has_label => w - 1,
        Some(w) => w,
        None => return Err(Error::Parse("dataset has no rows".into())),
    };
    if dim == 0 {
        return Err(Error::Parse("dataset has no feature columns".into()));
    }
    let ds = Dataset::from_flat(values, dim)?;
    if has_label {
        ds.with_labels(labels)
    } else {
        Ok(ds)
    }
}

/// Reads 0/1 outlier labels from a `label` column, or from the only column.
pub fn read_labels(path: &Path) -> Result<Vec<bool>> {
    parse_labels(open(path)?)
}

pub fn parse_labels<R: Read>(reader: R) -> Result<Vec<bool>> {
    let mut rdr = csv_reader(reader);
    let mut column = None;
    let mut labels = Vec::new();
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if is_header(&record) {
                column = record.iter().position(|h| h.eq_ignore_ascii_case("label"));
                if column.is_none() && record.len() != 1 {
                    return Err(Error::Parse("labels file has no `label` column".into()));
                }
                column = column.or(Some(0));
                continue;
            }
        }
        let col = match column {
            Some(c) => c,
            None if record.len() == 1 => 0,
            None => {
                return Err(Error::Parse(format!(
                    "row {row}: expected a single label column, found {}",
                    record.len()
                )))
            }
        };
        let field = record.get(col).ok_or_else(|| {
            Error::Parse(format!("row {row}: missing column {}", col + 1))
        })?;
        labels.push(parse_label(field, row, col + 1)?);
    }
    if labels.is_empty() {
        return Err(Error::Parse("labels file has no rows".into()));
    }
    Ok(labels)
}

/// Clustering interchange document. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringFile {
    pub n: usize,
    pub assignments: Vec<usize>,
    pub representation: Representation,
    #[serde(default)]
    pub backend: Option<String>,
    #[serde(default)]
    pub params: Option<ClusteringParams>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ClusteringFile {
    pub fn new(clustering: &Clustering, params: Option<&ClusteringParams>) -> Self {
        ClusteringFile {
            n: clustering.len(),
            assignments: clustering.assignments().to_vec(),
            representation: clustering.representation().clone(),
            backend: params.map(|p| p.backend().to_string()),
            params: params.cloned(),
            seed: params.and_then(ClusteringParams::seed),
        }
    }

    pub fn to_clustering(&self) -> Result<Clustering> {
        if self.n != self.assignments.len() {
            return Err(Error::InvalidClustering(format!(
                "n = {} but {} assignments",
                self.n,
                self.assignments.len()
            )));
        }
        Clustering::new(self.assignments.clone(), self.representation.clone())
    }
}

pub fn clustering_to_json(clustering: &Clustering, params: Option<&ClusteringParams>) -> Result<String> {
    serde_json::to_string_pretty(&ClusteringFile::new(clustering, params))
        .map_err(|e| Error::Parse(e.to_string()))
}

pub fn clustering_from_json(text: &str) -> Result<Clustering> {
    let file: ClusteringFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("clustering file: {e}")))?;
    file.to_clustering()
}

pub fn write_clustering(path: &Path, clustering: &Clustering, params: Option<&ClusteringParams>) -> Result<()> {
    write_text(path, &clustering_to_json(clustering, params)?)
}

pub fn read_clustering(path: &Path) -> Result<Clustering> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    clustering_from_json(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One hull segment, joining two hull clusterings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentExport {
    pub segment: usize,
    pub from_clustering: usize,
    pub to_clustering: usize,
    pub kappa: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullExport {
    pub vertices: Vec<RdPoint>,
    pub segments: Vec<SegmentExport>,
}

impl HullExport {
    pub fn new(hull: &RateDistortionHull) -> Self {
        let v = hull.vertices();
        HullExport {
            vertices: v.to_vec(),
            segments: hull
                .segments()
                .map(|i| SegmentExport {
                    segment: i,
                    from_clustering: v[i - 1].clustering_id,
                    to_clustering: v[i].clustering_id,
                    kappa: hull.slopes()[i - 1],
                    delta: hull.intercepts()[i - 1],
                })
                .collect(),
        }
    }
}

/// Outlier report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub detector: Detector,
    pub n: usize,
    pub num_outliers: usize,
    /// 0-based indices of flagged observations.
    pub outliers: Vec<usize>,
    pub tested_clusterings: Vec<usize>,
    pub thresholds: Vec<ClusteringThresholds>,
    #[serde(default)]
    pub rd_points: Vec<RdPoint>,
    #[serde(default)]
    pub hull: Option<HullExport>,
    #[serde(default)]
    pub dropped_clusterings: Vec<usize>,
    #[serde(default)]
    pub skipped_segments: Vec<usize>,
}

impl ReportFile {
    pub fn new(report: &OutlierReport) -> Self {
        ReportFile {
            detector: report.detector,
            n: report.len(),
            num_outliers: report.num_outliers(),
            outliers: report.outliers(),
            tested_clusterings: report.tested_clusterings.clone(),
            thresholds: report.thresholds.clone(),
            rd_points: report.diagnostics.rd_points.clone(),
            hull: report.diagnostics.hull.as_ref().map(HullExport::new),
            dropped_clusterings: report.diagnostics.dropped_clusterings.clone(),
            skipped_segments: report.diagnostics.skipped_segments.clone(),
        }
    }
}

pub fn report_to_json(report: &OutlierReport) -> Result<String> {
    serde_json::to_string_pretty(&ReportFile::new(report)).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_report(path: &Path, report: &OutlierReport) -> Result<()> {
    write_text(path, &report_to_json(report)?)
}

#[derive(Deserialize)]
struct ReportMask {
    n: usize,
    outliers: Vec<usize>,
}

/// Outlier mask of a report file.
pub fn read_report_mask(path: &Path) -> Result<Vec<bool>> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    report_mask_from_json(&text)
}

pub fn report_mask_from_json(text: &str) -> Result<Vec<bool>> {
    let r: ReportMask =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report file: {e}")))?;
    let mut mask = vec![false; r.n];
    for j in r.outliers {
        *mask
            .get_mut(j)
            .ok_or(Error::IndexOutOfRange { index: j, len: r.n })? = true;
    }
    Ok(mask)
}

#[derive(Serialize)]
struct HullRow {
    kind: &'static str,
    clustering_id: usize,
    from_clustering: Option<usize>,
    distortion: Option<f64>,
    entropy: Option<f64>,
    on_hull: Option<bool>,
    segment: Option<usize>,
    kappa: Option<f64>,
    delta: Option<f64>,
}

/// Hull export as CSV: one `point` row per clustering, then one `segment`
/// row per hull segment.
pub fn write_hull_csv<W: Write>(writer: W, points: &[RdPoint], hull: &RateDistortionHull) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(HullRow {
            kind: "point",
            clustering_id: p.clustering_id,
            from_clustering: None,
            distortion: Some(p.distortion),
            entropy: Some(p.entropy),
            on_hull: Some(hull.contains(p.clustering_id)),
            segment: None,
            kappa: None,
            delta: None,
        })
        .map_err(csv_error)?;
    }
    for s in HullExport::new(hull).segments {
        w.serialize(HullRow {
            kind: "segment",
            clustering_id: s.to_clustering,
            from_clustering: Some(s.from_clustering),
            distortion: None,
            entropy: None,
            on_hull: None,
            segment: Some(s.segment),
            kappa: Some(s.kappa),
            delta: Some(s.delta),
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores_csv<W: Write>(writer: W, rows: &[ScoreRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DistortionMeasure;
    use crate::purging::parameter_free;
    use crate::rd::{build_hull, Measures};

    #[test]
    fn dataset_with_header_and_labels() {
        let text = "x,y,label\n0,1,0\n2.5,-3,1\n";
        let ds = parse_dataset(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.point(1), &[2.5, -3.0]);
        assert_eq!(ds.labels(), Some(&[false, true][..]));
    }

    #[test]
    fn dataset_without_header() {
        let ds = parse_dataset("1,2\n3,4\n\n5,6\n".as_bytes()).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.labels().is_none());
        let ds = parse_dataset("a,b\n1,2\n".as_bytes()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn dataset_errors_name_location() {
        let err = parse_dataset("x,y\n1,2\n3,oops\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 3") && err.contains("column 2"), "{err}");
        let err = parse_dataset("1,2\n3\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
        let err = parse_dataset("x,label\n1,2\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("label"), "{err}");
        let err = parse_dataset("1,\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("missing"), "{err}");
        assert!(parse_dataset("1,nan\n".as_bytes()).is_err());
        assert!(parse_dataset("".as_bytes()).is_err());
    }

    #[test]
    fn labels_files() {
        assert_eq!(parse_labels("1\n0\n1\n".as_bytes()).unwrap(), vec![true, false, true]);
        assert_eq!(parse_labels("label\n0\n1\n".as_bytes()).unwrap(), vec![false, true]);
        assert_eq!(parse_labels("x,label\n3,0\n4,1\n".as_bytes()).unwrap(), vec![false, true]);
        assert!(parse_labels("x,y\n3,0\n".as_bytes()).is_err());
        assert!(parse_labels("1\n2\n".as_bytes()).is_err());
        assert!(parse_labels("3,0\n4,1\n".as_bytes()).is_err());
    }

    #[test]
    fn clustering_round_trip() {
        let c = Clustering::new(
            vec![0, 1, 0],
            Representation::Centroids(vec![vec![0.1 + 0.2, 1.0 / 3.0], vec![1e-300, -7.5]]),
        )
        .unwrap();
        let params = ClusteringParams::Kmeans { k: 2, n_start: 3, seed: 9 };
        let text = clustering_to_json(&c, Some(&params)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["representation"]["kind"], "centroids");
        assert_eq!(v["backend"], "kmeans");
        assert_eq!(v["seed"], 9);
        assert_eq!(clustering_from_json(&text).unwrap(), c);

        let nn = Clustering::new(vec![0, 0, 1], Representation::NearestNeighbor(vec![1, 0, 2])).unwrap();
        let text = clustering_to_json(&nn, None).unwrap();
        assert!(text.contains("nearest_neighbor"));
        assert_eq!(clustering_from_json(&text).unwrap(), nn);
    }

    #[test]
    fn clustering_file_validation() {
        let bad = r#"{"n":3,"assignments":[0,0],"representation":{"kind":"centroids","values":[[0.0]]}}"#;
        assert!(clustering_from_json(bad).is_err());
        let bad = r#"{"n":2,"assignments":[0,2],"representation":{"kind":"centroids","values":[[0.0]]}}"#;
        assert!(clustering_from_json(bad).is_err());
        assert!(clustering_from_json("{").is_err());
    }

    fn toy() -> (Dataset, Vec<Clustering>) {
        let ds = Dataset::new([0.0, 0.1, 0.2, 0.3, 0.4, 100.0].iter().map(|&x| vec![x]).collect()).unwrap();
        let p = Clustering::with_mean_centroids(&ds, vec![0, 0, 0, 0, 0, 1]).unwrap();
        let q = Clustering::with_mean_centroids(&ds, vec![0, 0, 1, 1, 1, 2]).unwrap();
        (ds, vec![p, q])
    }

    #[test]
    fn report_json() {
        let (ds, cs) = toy();
        let report = parameter_free(&ds, &cs, DistortionMeasure::Euclidean).unwrap();
        let text = report_to_json(&report).unwrap();
        let file: ReportFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.outliers, vec![5]);
        assert_eq!(file.n, 6);
        assert_eq!(file.hull.as_ref().unwrap().segments.len(), 1);
        assert_eq!(serde_json::to_string_pretty(&file).unwrap(), text);
        let mask = report_mask_from_json(&text).unwrap();
        assert_eq!(mask, report.is_outlier);
    }

    #[test]
    fn hull_csv() {
        let (ds, cs) = toy();
        let m = Measures::default();
        let pts: Vec<RdPoint> = cs
            .iter()
            .enumerate()
            .map(|(i, c)| RdPoint::of(&ds, c, i, m).unwrap())
            .collect();
        let hull = build_hull(&pts).unwrap();
        let mut out = Vec::new();
        write_hull_csv(&mut out, &pts, &hull).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("kind,clustering_id"));
        assert!(lines[3].starts_with("segment,"));
        let kappa: f64 = lines[3].split(',').nth(7).unwrap().parse().unwrap();
        assert!((kappa + 1.8693).abs() < 1e-3);
    }
}
