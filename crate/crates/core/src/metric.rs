//! Dimension-normalized Euclidean distances and metric-axiom validation.

use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::generator::PointCloud;
use crate::sum::squared_distance;
use crate::{Error, Result};

/// Default cap on stored matrix entries (`8192²`).
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 26;

/// Dense, full-square distance matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
    labels: Option<Vec<Vec<usize>>>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major entries. Only the shape is checked here;
    /// use [`check_metric_axioms`] for content.
    pub fn from_entries(size: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::InvalidArgument(format!(
                "matrix is not square: {} entries for size {}",
                entries.len(),
                size
            )));
        }
        Ok(DistanceMatrix {
            size,
            entries,
            labels: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != size) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not square: row {} has {} entries, expected {}",
                r,
                row.len(),
                size
            )));
        }
        Self::from_entries(size, rows.into_iter().flatten().collect())
    }

    /// Builds a symmetric zero-diagonal matrix from `f(a, b)` for `a < b`.
    pub fn from_fn(size: usize, exec: Execution, f: impl Fn(usize, usize) -> f64 + Send + Sync) -> Self {
        let mut entries = vec![0.0; size * size];
        exec::for_each_row(exec, &mut entries, size, |a, row| {
            for (b, v) in row.iter_mut().enumerate() {
                *v = match a.cmp(&b) {
                    std::cmp::Ordering::Less => f(a, b),
                    std::cmp::Ordering::Greater => f(b, a),
                    std::cmp::Ordering::Equal => 0.0,
                };
            }
        });
        DistanceMatrix {
            size,
            entries,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<Vec<usize>>) -> Result<Self> {
        if labels.len() != self.size {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} rows",
                labels.len(),
                self.size
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn labels(&self) -> Option<&[Vec<usize>]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.size + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.entries[a * self.size..(a + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.size.max(1)).take(self.size)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Entrywise `f`, keeping labels.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DistanceMatrix {
            size: self.size,
            entries: self.entries.iter().map(|&v| f(v)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Simultaneous row/column relabeling: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.size {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut seen = vec![false; self.size];
        for &p in perm {
            if p >= self.size || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let entries = perm
            .iter()
            .flat_map(|&i| perm.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Ok(DistanceMatrix {
            size: self.size,
            entries,
            labels: self
                .labels
                .as_ref()
                .map(|l| perm.iter().map(|&i| l[i].clone()).collect()),
        })
    }

    /// Largest |self − other| over all entries.
    pub fn max_abs_deviation(&self, other: &DistanceMatrix) -> Result<f64> {
        if self.size != other.size {
            return Err(Error::InvalidArgument(format!(
                "size mismatch: {} vs {}",
                self.size, other.size
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Scale-aware default tolerance for axiom checks on floating-point data.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * self.max_entry()
    }
}

/// `(1/√n)·‖x − y‖₂`, accumulated with compensated summation.
pub fn normalized_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument(
            "points must have at least one coordinate".into(),
        ));
    }
    Ok(unchecked_distance(x, y))
}

#[inline]
fn unchecked_distance(x: &[f64], y: &[f64]) -> f64 {
    (squared_distance(x, y) / x.len() as f64).sqrt()
}

pub fn distance_matrix(cloud: &PointCloud) -> Result<DistanceMatrix> {
    distance_matrix_with(cloud, Execution::default(), DEFAULT_MAX_ENTRIES)
}

pub fn distance_matrix_with(cloud: &PointCloud, exec: Execution, max_entries: usize) -> Result<DistanceMatrix> {
    let m = pairwise_distances(cloud.points(), cloud.dimension(), exec, max_entries)?;
    m.with_labels(cloud.topology().leaves().map(|l| l.path).collect())
}

/// Distance matrix of raw row-major points with `dimension` columns.
pub fn pairwise_distances(
    points: &[f64],
    dimension: usize,
    exec: Execution,
    max_entries: usize,
) -> Result<DistanceMatrix> {
    if dimension == 0 || points.len() % dimension != 0 {
        return Err(Error::InvalidArgument(format!(
            "{} values do not form rows of width {}",
            points.len(),
            dimension
        )));
    }
    let n = points.len() / dimension;
    let requested = n as u128 * n as u128;
    if requested > max_entries as u128 {
        return Err(Error::Capacity {
            requested,
            budget: max_entries as u128,
        });
    }
    let row = |i: usize| &points[i * dimension..(i + 1) * dimension];
    Ok(DistanceMatrix::from_fn(n, exec, |a, b| {
        unchecked_distance(row(a), row(b))
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxiomViolation {
    Negative {
        a: usize,
        b: usize,
        value: f64,
    },
    NonFinite {
        a: usize,
        b: usize,
    },
    NonzeroDiagonal {
        a: usize,
        value: f64,
    },
    Asymmetric {
        a: usize,
        b: usize,
        ab: f64,
        ba: f64,
    },
    /// `d(a,b) > d(a,c) + d(c,b) + tol`.
    Triangle {
        a: usize,
        b: usize,
        c: usize,
        excess: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub tolerance: f64,
    pub violations: Vec<AxiomViolation>,
    /// Distinct rows at distance zero. Informational: independent random
    /// points may coincide in principle.
    pub coincident_pairs: Vec<(usize, usize)>,
}

impl AxiomReport {
    pub fn is_metric(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_metric_axioms(m: &DistanceMatrix, tol: f64) -> Result<AxiomReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tol}")));
    }
    if m.entries.len() != m.size * m.size {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let n = m.size;
    let mut report = AxiomReport {
        tolerance: tol,
        ..Default::default()
    };
    for a in 0..n {
        let d = m.get(a, a);
        if d != 0.0 {
            report.violations.push(AxiomViolation::NonzeroDiagonal { a, value: d });
        }
        for b in 0..n {
            let v = m.get(a, b);
            if !v.is_finite() {
                report.violations.push(AxiomViolation::NonFinite { a, b });
            } else if v < 0.0 {
                report.violations.push(AxiomViolation::Negative { a, b, value: v });
            }
            if a < b {
                let w = m.get(b, a);
                if (v - w).abs() > tol {
                    report
                        .violations
                        .push(AxiomViolation::Asymmetric { a, b, ab: v, ba: w });
                }
                if v == 0.0 && w == 0.0 {
                    report.coincident_pairs.push((a, b));
                }
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let ab = m.get(a, b);
            for c in (0..n).filter(|&c| c != a && c != b) {
                let excess = ab - (m.get(a, c) + m.get(c, b));
                if excess > tol {
                    report.violations.push(AxiomViolation::Triangle { a, b, c, excess });
                }
            }
        }
    }
    Ok(report)
}
