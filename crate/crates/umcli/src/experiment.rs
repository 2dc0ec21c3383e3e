//! Experiment runners: a single empirical-vs-limit matrix comparison, and a
//! sweep of the triangle indexes over the embedding dimension.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use ultragen::indexes::{exact_indexes, sampled_indexes, IndexOptions};
use ultragen::persist::{format_full, write_json, write_matrix_set};
use ultragen::{distance_matrix, generate_hierarchical_points, theoretical_ultrametric, DistanceMatrix, TreeTopology};

use crate::config::{ExperimentConfig, IndexModeConfig};

/// Number of delta-method standard deviations allowed per entry.
pub const ENTRY_Z: f64 = 5.0;

/// `z·u/√(2n)`: the delta method gives `sd(d_n) ≈ u/√(2n)` for an entry whose
/// limit is `u`.
pub fn delta_tolerance(limit: f64, dimension: usize, z: f64) -> f64 {
    z * limit / (2.0 * dimension as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueClass {
    pub theoretical: f64,
    pub pair_count: usize,
    pub mean_empirical: f64,
    pub min_empirical: f64,
    pub max_empirical: f64,
    pub max_abs_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRun {
    pub seed: u64,
    pub max_abs_deviation: f64,
    /// Off-diagonal pairs outside `ENTRY_Z·u/√(2n)` of their limit `u`.
    pub exceedances: usize,
    pub classes: Vec<ValueClass>,
    pub empirical_csv: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub topology: TreeTopology,
    pub dimension: usize,
    pub theoretical_csv: PathBuf,
    pub runs: Vec<MatrixRun>,
}

/// Groups the off-diagonal pairs by their limiting value.
pub fn class_statistics(empirical: &DistanceMatrix, theory: &DistanceMatrix) -> Vec<ValueClass> {
    let mut classes: Vec<ValueClass> = Vec::new();
    let n = theory.size();
    for a in 0..n {
        for b in (a + 1)..n {
            let u = theory.get(a, b);
            let d = empirical.get(a, b);
            let class = match classes.iter_mut().position(|c| c.theoretical == u) {
                Some(i) => &mut classes[i],
                None => {
                    classes.push(ValueClass {
                        theoretical: u,
                        pair_count: 0,
                        mean_empirical: 0.0,
                        min_empirical: f64::INFINITY,
                        max_empirical: f64::NEG_INFINITY,
                        max_abs_deviation: 0.0,
                    });
                    classes.last_mut().unwrap()
                }
            };
            class.pair_count += 1;
            class.mean_empirical += d;
            class.min_empirical = class.min_empirical.min(d);
            class.max_empirical = class.max_empirical.max(d);
            class.max_abs_deviation = class.max_abs_deviation.max((d - u).abs());
        }
    }
    for c in &mut classes {
        c.mean_empirical /= c.pair_count as f64;
    }
    classes.sort_by(|x, y| x.theoretical.total_cmp(&y.theoretical));
    classes
}

pub fn count_exceedances(empirical: &DistanceMatrix, theory: &DistanceMatrix, dimension: usize, z: f64) -> usize {
    let n = theory.size();
    (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            let u = theory.get(a, b);
            (empirical.get(a, b) - u).abs() > delta_tolerance(u, dimension, z)
        })
        .count()
}

/// Generates one cloud per seed at the single configured dimension and
/// compares its distance matrix with the limiting ultrametric.
pub fn run_matrix_experiment(config: &ExperimentConfig) -> Result<MatrixReport> {
    let [dimension] = config.dimensions[..] else {
        bail!(
            "matrix experiment needs exactly one dimension, config has {}",
            config.dimensions.len()
        );
    };
    let out = &config.outputs;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let theory = theoretical_ultrametric(&config.topology)?;
    let theory_files = write_matrix_set(
        &theory,
        out,
        "theoretical",
        json!({ "kind": "theoretical", "topology": config.topology }),
    )?;

    let mut runs = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let cloud = generate_hierarchical_points(&config.topology, dimension, seed)?;
        let empirical = distance_matrix(&cloud)?;
        let files = write_matrix_set(
            &empirical,
            &out.join(format!("seed_{seed}")),
            "empirical",
            json!({ "kind": "empirical", "topology": config.topology, "seed": seed, "dimension": dimension }),
        )?;
        runs.push(MatrixRun {
            seed,
            max_abs_deviation: empirical.max_abs_deviation(&theory)?,
            exceedances: count_exceedances(&empirical, &theory, dimension, ENTRY_Z),
            classes: class_statistics(&empirical, &theory),
            empirical_csv: files.full,
        });
    }
    let report = MatrixReport {
        topology: config.topology.clone(),
        dimension,
        theoretical_csv: theory_files.full,
        runs,
    };
    write_json(&report, &out.join("matrix_report.json"))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: usize,
    pub seed: u64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub max_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianRow {
    pub n: usize,
    pub median_u: f64,
    pub median_e: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub rows: Vec<SeriesRow>,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

impl ConvergenceSeries {
    /// Per-dimension medians over seeds, in ascending `n`.
    pub fn medians(&self) -> Vec<MedianRow> {
        let mut dims: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        dims.sort_unstable();
        dims.dedup();
        dims.into_iter()
            .map(|n| {
                let mut u: Vec<f64> = self.rows.iter().filter(|r| r.n == n).map(|r| r.u).collect();
                let mut e: Vec<f64> = self.rows.iter().filter(|r| r.n == n).map(|r| r.e).collect();
                MedianRow {
                    n,
                    median_u: median(&mut u),
                    median_e: median(&mut e),
                }
            })
            .collect()
    }

    pub fn median_at(&self, n: usize) -> Option<MedianRow> {
        self.medians().into_iter().find(|m| m.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,seed,U,E,max_abs_dev\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                r.seed,
                format_full(r.u),
                format_full(r.e),
                format_full(r.max_abs_dev)
            ));
        }
        s
    }

    pub fn medians_csv(&self) -> String {
        let mut s = String::from("n,median_U,median_E\n");
        for m in self.medians() {
            s.push_str(&format!(
                "{},{},{}\n",
                m.n,
                format_full(m.median_u),
                format_full(m.median_e)
            ));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let series = dir.join("series.csv");
        let medians = dir.join("series_medians.csv");
        fs::write(&series, self.to_csv()).with_context(|| format!("writing {}", series.display()))?;
        fs::write(&medians, self.medians_csv()).with_context(|| format!("writing {}", medians.display()))?;
        Ok((series, medians))
    }
}

fn summarize(m: &DistanceMatrix, mode: IndexModeConfig, seed: u64) -> Result<(f64, f64)> {
    let opts = IndexOptions::default();
    let s = match mode {
        IndexModeConfig::Exact {} => exact_indexes(m, &opts)?,
        IndexModeConfig::Sampled { sample_count } => sampled_indexes(m, sample_count, seed, &opts)?,
    };
    Ok((s.u, s.e))
}

/// Computes `U`, `E` and the largest deviation from the limit for every
/// `(dimension, seed)` pair. With `theoretical_only`, generation is bypassed
/// and the limiting matrix itself is summarized.
pub fn run_convergence_sweep(config: &ExperimentConfig, theoretical_only: bool) -> Result<ConvergenceSeries> {
    let theory = theoretical_ultrametric(&config.topology)?;
    let mut series = ConvergenceSeries::default();
    for &n in &config.dimensions {
        for &seed in &config.seeds {
            let row = if theoretical_only {
                let (u, e) = summarize(&theory, config.index_mode, seed)?;
                SeriesRow {
                    n,
                    seed,
                    u,
                    e,
                    max_abs_dev: 0.0,
                }
            } else {
                let cloud = generate_hierarchical_points(&config.topology, n, seed)?;
                let m = distance_matrix(&cloud)?;
                let (u, e) = summarize(&m, config.index_mode, seed)?;
                SeriesRow {
                    n,
                    seed,
                    u,
                    e,
                    max_abs_dev: m.max_abs_deviation(&theory)?,
                }
            };
            series.rows.push(row);
        }
    }
    series.write(&config.outputs)?;
    Ok(series)
}
