use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::metric::DistanceMatrix;
use crate::{Error, Result};

/// Largest matrix scanned triplet-by-triplet without an explicit opt-in.
pub const EXHAUSTIVE_POINT_LIMIT: usize = 1000;

/// A triangle whose longest side exceeds the second longest by more than the
/// tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongViolation {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub longest: f64,
    pub middle: f64,
    pub excess: f64,
}

impl fmt::Display for StrongViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "triangle ({}, {}, {}): longest side {} exceeds {} by {:.3e}",
            self.a, self.b, self.c, self.longest, self.middle, self.excess
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct StrongCheckOptions {
    pub mode: ScanMode,
    /// Lift the [`EXHAUSTIVE_POINT_LIMIT`] refusal.
    pub allow_large: bool,
    /// Keep at most this many violations in the report (the count is exact).
    pub max_listed: usize,
    pub execution: Execution,
}

impl Default for StrongCheckOptions {
    fn default() -> Self {
        StrongCheckOptions {
            mode: ScanMode::Exhaustive,
            allow_large: false,
            max_listed: 10_000,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongReport {
    pub tolerance: f64,
    pub mode: ScanMode,
    pub triangles_checked: u64,
    pub violation_count: u64,
    pub worst: Option<StrongViolation>,
    /// Violations in canonical `a < b < c` order, truncated at `max_listed`.
    pub violations: Vec<StrongViolation>,
}

impl StrongReport {
    pub fn is_ultrametric(&self) -> bool {
        self.violation_count == 0
    }

    pub fn truncated(&self) -> bool {
        (self.violations.len() as u64) < self.violation_count
    }
}

#[inline]
fn examine(m: &DistanceMatrix, a: usize, b: usize, c: usize, tol: f64) -> Option<StrongViolation> {
    let mut s = [m.get(a, b), m.get(b, c), m.get(c, a)];
    s.sort_by(f64::total_cmp);
    let excess = s[2] - s[1];
    (excess > tol).then_some(StrongViolation {
        a,
        b,
        c,
        longest: s[2],
        middle: s[1],
        excess,
    })
}

pub fn check_strong_triangle(m: &DistanceMatrix, tol: f64) -> Result<StrongReport> {
    check_strong_triangle_with(m, tol, &StrongCheckOptions::default())
}

pub fn check_strong_triangle_with(m: &DistanceMatrix, tol: f64, options: &StrongCheckOptions) -> Result<StrongReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tol}")));
    }
    if m.entries().len() != m.size() * m.size() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let n = m.size();

    #[derive(Default)]
    struct Partial {
        checked: u64,
        count: u64,
        worst: Option<StrongViolation>,
        listed: Vec<StrongViolation>,
    }
    let cap = options.max_listed;
    let record = |p: &mut Partial, v: StrongViolation| {
        p.count += 1;
        if p.worst.is_none_or(|w| v.excess > w.excess) {
            p.worst = Some(v);
        }
        if p.listed.len() < cap {
            p.listed.push(v);
        }
    };

    let partials: Vec<Partial> = match options.mode {
        ScanMode::Exhaustive => {
            if n > EXHAUSTIVE_POINT_LIMIT && !options.allow_large {
                return Err(Error::InvalidArgument(format!(
                    "exhaustive strong-triangle scan of {n} points exceeds the {EXHAUSTIVE_POINT_LIMIT}-point limit; \
                     use sampling or allow_large"
                )));
            }
            exec::map_range(options.execution, 0..n, |a| {
                let mut p = Partial::default();
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        p.checked += 1;
                        if let Some(v) = examine(m, a, b, c, tol) {
                            record(&mut p, v);
                        }
                    }
                }
                p
            })
        }
        ScanMode::Sampled { samples, seed } => {
            if n < 3 {
                vec![Partial::default()]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut p = Partial::default();
                for _ in 0..samples {
                    let mut t = loop {
                        let t = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
                        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                            break t;
                        }
                    };
                    t.sort_unstable();
                    p.checked += 1;
                    if let Some(v) = examine(m, t[0], t[1], t[2], tol) {
                        record(&mut p, v);
                    }
                }
                vec![p]
            }
        }
    };

    let mut report = StrongReport {
        tolerance: tol,
        mode: options.mode,
        triangles_checked: 0,
        violation_count: 0,
        worst: None,
        violations: Vec::new(),
    };
    for p in partials {
        report.triangles_checked += p.checked;
        report.violation_count += p.count;
        if let Some(w) = p.worst {
            if report.worst.is_none_or(|cur| w.excess > cur.excess) {
                report.worst = Some(w);
            }
        }
        let room = cap - report.violations.len();
        report.violations.extend(p.listed.into_iter().take(room));
    }
    Ok(report)
}
