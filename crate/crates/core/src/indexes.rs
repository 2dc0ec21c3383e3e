//! Triangle ultrametricity and isometricity indexes.
//!
//! For a triangle with sides sorted as `min ≤ mid ≤ max`:
//!
//! * `I = 1 − mid/max` vanishes exactly when the two longest sides are equal,
//!   i.e. when the triangle is ultrametric;
//! * `J = 1 − min/max` vanishes exactly on equilateral triangles.
//!
//! `U(M)` and `E(M)` average `I` and `J` over all `C(N, 3)` unordered
//! triangles of a finite metric space.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::metric::DistanceMatrix;
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Largest point count enumerated exactly without opt-in.
pub const EXACT_POINT_LIMIT: usize = 2000;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleIndexes {
    #[serde(rename = "I")]
    pub ultrametricity: f64,
    #[serde(rename = "J")]
    pub isometricity: f64,
}

/// Indexes of the triangle with sides `d_ab`, `d_bc`, `d_ca`.
///
/// The middle side is found by sorting, which equals `sum − max − min`
/// without its rounding error. Inputs should satisfy the ordinary triangle
/// inequality; only non-positive sides are rejected.
pub fn triangle_indexes(d_ab: f64, d_bc: f64, d_ca: f64) -> Result<TriangleIndexes> {
    if !(d_ab > 0.0 && d_bc > 0.0 && d_ca > 0.0) {
        let (a, b) = if !(d_ab > 0.0) {
            (0, 1)
        } else if !(d_bc > 0.0) {
            (1, 2)
        } else {
            (2, 0)
        };
        return Err(Error::DegenerateTriangle(a, b));
    }
    Ok(sorted_indexes(d_ab, d_bc, d_ca))
}

#[inline]
fn sorted_indexes(x: f64, y: f64, z: f64) -> TriangleIndexes {
    let mut s = [x, y, z];
    s.sort_by(f64::total_cmp);
    TriangleIndexes {
        ultrametricity: 1.0 - s[1] / s[2],
        isometricity: 1.0 - s[0] / s[2],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// Triangles averaged over (sampled count in sampled mode).
    pub triangle_count: u64,
    pub mode: IndexMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<StandardErrors>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Set when a sampled request covered every triangle and was answered exactly.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exhaustive_fallback: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub skipped_degenerate: u64,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

#[derive(Debug, Clone)]
pub struct IndexOptions {
    /// Skip triangles with a zero side instead of failing.
    pub skip_degenerate: bool,
    /// Lift the [`EXACT_POINT_LIMIT`] refusal.
    pub allow_large: bool,
    pub execution: Execution,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            skip_degenerate: false,
            allow_large: false,
            execution: Execution::default(),
        }
    }
}

/// `C(n, 3)`.
pub fn triangle_total(n: usize) -> u64 {
    if n < 3 {
        return 0;
    }
    let n = n as u128;
    (n * (n - 1) * (n - 2) / 6) as u64
}

fn precheck(m: &DistanceMatrix, options: &IndexOptions) -> Result<()> {
    if m.entries().len() != m.size() * m.size() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    if m.size() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 points for triangle indexes, got {}",
            m.size()
        )));
    }
    if !options.skip_degenerate {
        for a in 0..m.size() {
            for b in (a + 1)..m.size() {
                if !(m.get(a, b) > 0.0) {
                    return Err(Error::DegenerateTriangle(a, b));
                }
            }
        }
    }
    Ok(())
}

#[derive(Default)]
struct Accumulator {
    i: NeumaierSum,
    j: NeumaierSum,
    i_sq: NeumaierSum,
    j_sq: NeumaierSum,
    count: u64,
    skipped: u64,
}

impl Accumulator {
    #[inline]
    fn push(&mut self, m: &DistanceMatrix, a: usize, b: usize, c: usize) {
        let (ab, bc, ca) = (m.get(a, b), m.get(b, c), m.get(c, a));
        if !(ab > 0.0 && bc > 0.0 && ca > 0.0) {
            self.skipped += 1;
            return;
        }
        let t = sorted_indexes(ab, bc, ca);
        self.i.add(t.ultrametricity);
        self.j.add(t.isometricity);
        self.i_sq.add(t.ultrametricity * t.ultrametricity);
        self.j_sq.add(t.isometricity * t.isometricity);
        self.count += 1;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.i.merge(&other.i);
        self.j.merge(&other.j);
        self.i_sq.merge(&other.i_sq);
        self.j_sq.merge(&other.j_sq);
        self.count += other.count;
        self.skipped += other.skipped;
    }

    fn means(&self) -> Result<(f64, f64)> {
        if self.count == 0 {
            return Err(Error::InvalidArgument(format!(
                "all {} triangles are degenerate, nothing to average",
                self.skipped
            )));
        }
        let k = self.count as f64;
        Ok((self.i.value() / k, self.j.value() / k))
    }
}

/// Exact `U(M)` and `E(M)` over every unordered triangle.
pub fn exact_indexes(m: &DistanceMatrix, options: &IndexOptions) -> Result<IndexSummary> {
    precheck(m, options)?;
    let n = m.size();
    if n > EXACT_POINT_LIMIT && !options.allow_large {
        return Err(Error::InvalidArgument(format!(
            "exact enumeration of {n} points exceeds the {EXACT_POINT_LIMIT}-point limit; \
             use sampling or allow_large"
        )));
    }
    // One partial per outer index, merged in index order: the result does not
    // depend on the worker count.
    let partials = exec::map_range(options.execution, 0..n, |a| {
        let mut acc = Accumulator::default();
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                acc.push(m, a, b, c);
            }
        }
        acc
    });
    let mut total = Accumulator::default();
    for p in &partials {
        total.merge(p);
    }
    let (u, e) = total.means()?;
    Ok(IndexSummary {
        u,
        e,
        triangle_count: total.count,
        mode: IndexMode::Exact,
        standard_error: None,
        seed: None,
        exhaustive_fallback: false,
        skipped_degenerate: total.skipped,
    })
}

pub fn ultrametricity_index(m: &DistanceMatrix) -> Result<f64> {
    Ok(exact_indexes(m, &IndexOptions::default())?.u)
}

pub fn isometricity_index(m: &DistanceMatrix) -> Result<f64> {
    Ok(exact_indexes(m, &IndexOptions::default())?.e)
}

/// Unranks a colexicographic triangle index into `a < b < c`.
fn unrank_triangle(mut r: u64, n: usize) -> (usize, usize, usize) {
    fn choose(x: u64, k: u64) -> u64 {
        match k {
            1 => x,
            2 => x * x.saturating_sub(1) / 2,
            3 => x * x.saturating_sub(1) * x.saturating_sub(2) / 6,
            _ => unreachable!(),
        }
    }
    // largest v in [lo, hi) with choose(v, k) <= r
    let largest = |r: u64, k: u64, lo: u64, hi: u64| {
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if choose(mid, k) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let c = largest(r, 3, 2, n as u64);
    r -= choose(c, 3);
    let b = largest(r, 2, 1, c);
    r -= choose(b, 2);
    (r as usize, b as usize, c as usize)
}

/// Unbiased estimates of `U` and `E` from `sample_count` distinct triangles
/// drawn uniformly without replacement. Requests covering every triangle are
/// answered by exact enumeration.
pub fn sampled_indexes(
    m: &DistanceMatrix,
    sample_count: usize,
    seed: u64,
    options: &IndexOptions,
) -> Result<IndexSummary> {
    if sample_count < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "sample count must be >= {MIN_SAMPLES}, got {sample_count}"
        )));
    }
    precheck(m, options)?;
    let total = triangle_total(m.size());
    if sample_count as u64 >= total {
        let opts = IndexOptions {
            allow_large: true,
            ..options.clone()
        };
        let mut s = exact_indexes(m, &opts)?;
        s.exhaustive_fallback = true;
        return Ok(s);
    }
    let population =
        usize::try_from(total).map_err(|_| Error::InvalidArgument("triangle population exceeds usize".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks = index::sample(&mut rng, population, sample_count).into_vec();
    ranks.sort_unstable();

    let mut acc = Accumulator::default();
    for r in ranks {
        let (a, b, c) = unrank_triangle(r as u64, m.size());
        acc.push(m, a, b, c);
    }
    let (u, e) = acc.means()?;
    let standard_error = (acc.count > 1).then(|| {
        let k = acc.count as f64;
        let pop = (total - acc.skipped.min(total)) as f64;
        let fpc = if pop > 1.0 {
            ((pop - k) / (pop - 1.0)).max(0.0)
        } else {
            0.0
        };
        let se = |sq: f64, mean: f64| {
            let var = ((sq - k * mean * mean) / (k - 1.0)).max(0.0);
            (var / k * fpc).sqrt()
        };
        StandardErrors {
            u: se(acc.i_sq.value(), u),
            e: se(acc.j_sq.value(), e),
        }
    });
    Ok(IndexSummary {
        u,
        e,
        triangle_count: acc.count,
        mode: IndexMode::Sampled,
        standard_error,
        seed: Some(seed),
        exhaustive_fallback: false,
        skipped_degenerate: acc.skipped,
    })
}
