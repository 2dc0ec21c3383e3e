//! On-disk formats.
//!
//! * Cloud CSV: header `leaf_linear,a_1,…,a_N,x_1,…,x_n`, one row per leaf,
//!   with a JSON sidecar holding topology, seed and dimension.
//! * Matrix CSV: `N` rows of `N` comma-separated values, no header. Full
//!   precision files use 17 significant digits and round-trip exactly;
//!   display files use 6 fixed decimals.
//! * Matrix sidecar JSON: size, optional leaf labels and free-form provenance.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::generator::{CloudMeta, PointCloud};
use crate::metric::DistanceMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// 17 significant digits, exact round trip.
    Full,
    /// 6 fixed decimals, for reading by eye.
    Display,
}

/// Formats a value with 17 significant digits.
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_value(v: f64, precision: Precision) -> String {
    match precision {
        Precision::Full => format_full(v),
        Precision::Display => format!("{v:.6}"),
    }
}

/// Path of the JSON sidecar belonging to a CSV file.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::file(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::file(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::file(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::file(path, e))
}

/// Writes the cloud CSV and its sidecar (`<csv>.json`).
pub fn write_cloud(cloud: &PointCloud, csv_path: &Path) -> Result<()> {
    let levels = cloud.topology().levels();
    let mut w = csv::Writer::from_writer(create(csv_path)?);
    let header = std::iter::once("leaf_linear".to_string())
        .chain((1..=levels).map(|k| format!("a_{k}")))
        .chain((1..=cloud.dimension()).map(|i| format!("x_{i}")));
    let err = |e: csv::Error| Error::file(csv_path, e);
    w.write_record(header).map_err(err)?;
    for (leaf, row) in cloud.topology().leaves().zip(cloud.rows()) {
        let record = std::iter::once(leaf.linear.to_string())
            .chain(leaf.path.iter().map(|a| a.to_string()))
            .chain(row.iter().map(|&v| format_full(v)));
        w.write_record(record).map_err(err)?;
    }
    w.flush().map_err(|e| Error::file(csv_path, e))?;
    write_json(&cloud.meta(), &sidecar_path(csv_path))
}

/// Reads a cloud CSV together with its sidecar.
pub fn read_cloud(csv_path: &Path) -> Result<PointCloud> {
    let meta: CloudMeta = read_json(&sidecar_path(csv_path))?;
    let levels = meta.topology.levels();
    let bad = |msg: String| Error::file(csv_path, msg);
    let mut r = csv::Reader::from_path(csv_path).map_err(|e| Error::file(csv_path, e))?;
    let header = r.headers().map_err(|e| Error::file(csv_path, e))?.clone();
    if header.len() != 1 + levels + meta.dimension || header.get(0) != Some("leaf_linear") {
        return Err(bad(format!(
            "header has {} columns, expected leaf_linear + {} path + {} coordinate columns",
            header.len(),
            levels,
            meta.dimension
        )));
    }
    let mut points = Vec::with_capacity(meta.topology.leaf_count() * meta.dimension);
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::file(csv_path, e))?;
        let linear: usize = record[0]
            .parse()
            .map_err(|_| bad(format!("row {}: bad leaf index `{}`", row + 1, &record[0])))?;
        if linear != row {
            return Err(bad(format!("row {} has leaf index {}", row + 1, linear)));
        }
        for field in record.iter().skip(1 + levels) {
            points.push(
                field
                    .parse::<f64>()
                    .map_err(|_| bad(format!("row {}: bad value `{}`", row + 1, field)))?,
            );
        }
    }
    PointCloud::from_parts(meta.topology, meta.dimension, meta.seed, points).map_err(|e| bad(e.to_string()))
}

pub fn write_matrix(m: &DistanceMatrix, path: &Path, precision: Precision) -> Result<()> {
    let mut w = create(path)?;
    for row in m.rows() {
        let line = row
            .iter()
            .map(|&v| format_value(v, precision))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(|e| Error::file(path, e))?;
    }
    w.flush().map_err(|e| Error::file(path, e))
}

/// Reads a headerless square matrix CSV (either precision).
pub fn read_matrix(path: &Path) -> Result<DistanceMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::file(path, e))?;
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::file(path, format!("row {}: bad value `{}`", i + 1, f)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    DistanceMatrix::from_rows(rows).map_err(|e| Error::file(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl MatrixMeta {
    pub fn for_matrix(m: &DistanceMatrix, provenance: serde_json::Value) -> Self {
        MatrixMeta {
            size: m.size(),
            labels: m.labels().map(<[_]>::to_vec),
            provenance,
        }
    }
}

/// File names produced by [`write_matrix_set`].
#[derive(Debug, Clone)]
pub struct MatrixFiles {
    pub full: PathBuf,
    pub display: PathBuf,
    pub meta: PathBuf,
}

/// Writes `<stem>.csv` (full precision), `<stem>_display.csv` and
/// `<stem>.json` into `dir`.
pub fn write_matrix_set(
    m: &DistanceMatrix,
    dir: &Path,
    stem: &str,
    provenance: serde_json::Value,
) -> Result<MatrixFiles> {
    let files = MatrixFiles {
        full: dir.join(format!("{stem}.csv")),
        display: dir.join(format!("{stem}_display.csv")),
        meta: dir.join(format!("{stem}.json")),
    };
    write_matrix(m, &files.full, Precision::Full)?;
    write_matrix(m, &files.display, Precision::Display)?;
    write_json(&MatrixMeta::for_matrix(m, provenance), &files.meta)?;
    Ok(files)
}

/// Reads a matrix CSV and, when present, attaches labels from its sidecar.
pub fn read_matrix_with_meta(path: &Path) -> Result<(DistanceMatrix, Option<MatrixMeta>)> {
    let m = read_matrix(path)?;
    let side = sidecar_path(path);
    if !side.exists() {
        return Ok((m, None));
    }
    let meta: MatrixMeta = read_json(&side)?;
    let m = match &meta.labels {
        Some(labels) if labels.len() == m.size() => m.with_labels(labels.clone())?,
        _ => m,
    };
    Ok((m, Some(meta)))
}
