use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use ultragen::indexes::{exact_indexes, sampled_indexes, IndexOptions, IndexSummary};
use ultragen::persist::{read_cloud, read_matrix_with_meta, write_cloud, write_json, write_matrix_set};
use ultragen::ultrametric::{check_strong_triangle_with, ScanMode, StrongCheckOptions};
use ultragen::{
    check_metric_axioms, distance_matrix, generate_hierarchical_points, recover_dendrogram, theoretical_ultrametric,
    transform_metric, AxiomReport, DistanceMatrix, StrongReport, Transform,
};

use crate::config::{load_config, ExperimentConfig, IndexModeConfig, LoadedConfig};
use crate::experiment::{run_convergence_sweep, run_matrix_experiment};

#[derive(Debug, Parser)]
#[command(
    name = "umcli",
    version,
    about = "Hierarchical Gaussian point clouds and their limiting ultrametrics"
)]
pub struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a leaf point cloud (cloud.csv + cloud.json).
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalized distance matrix of a cloud.
    Distances {
        /// Cloud CSV written by `generate`.
        cloud: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Limiting ultrametric matrix of a topology.
    Theory {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ultrametricity and isometricity indexes of a matrix.
    Indexes {
        matrix: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Directory for summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        skip_degenerate: bool,
        #[arg(long)]
        allow_large: bool,
    },
    /// Check metric axioms and the strong triangle inequality. Exits 1 on violation.
    Verify {
        matrix: PathBuf,
        /// Absolute tolerance (default: 1e-9 times the largest entry).
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        allow_large: bool,
    },
    /// Recover the tree of an ultrametric matrix.
    Dendro {
        matrix: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Directory for dendrogram.json and dendrogram.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DendroFormat::Text)]
        format: DendroFormat,
    },
    /// Apply a monotone transform to an ultrametric matrix.
    Transform {
        matrix: PathBuf,
        /// e.g. `pow:0.5`, `scale:2,min:3`.
        #[arg(long = "transform")]
        transform: Transform,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare empirical distance matrices with the limit at one dimension.
    MatrixExp {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Track the indexes over a range of dimensions.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Estimate the indexes from this many random triangles per run.
        #[arg(long)]
        sample_count: Option<usize>,
        /// Summarize the limiting matrix instead of generated data.
        #[arg(long)]
        theoretical_only: bool,
    },
}

#[derive(Debug, Args)]
pub struct Sampling {
    /// Estimate from this many random triangles instead of all of them.
    #[arg(long)]
    pub sample_count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured seeds (repeatable).
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    /// Overrides the configured dimensions (repeatable).
    #[arg(long = "dim")]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DendroFormat {
    Json,
    Text,
}

/// A check ran to completion and found the input invalid.
#[derive(Debug)]
pub struct ValidationFailed(pub String);

impl fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailed {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ValidationFailed>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<ultragen::Error>() {
            return match e {
                ultragen::Error::NotUltrametric(_) | ultragen::Error::DegenerateTriangle(..) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_matrix(path: &Path) -> Result<DistanceMatrix> {
    Ok(read_matrix_with_meta(path)?.0)
}

fn experiment_config(args: &ExperimentArgs, default_out: &str) -> Result<ExperimentConfig> {
    let mut config = match load_config(&args.config)? {
        LoadedConfig::Experiment(e) => e,
        LoadedConfig::Topology(t) => {
            if args.dims.is_empty() {
                bail!("{} has no dimensions; pass --dim", args.config.display());
            }
            let seeds = if args.seeds.is_empty() {
                crate::config::DEFAULT_SEEDS.to_vec()
            } else {
                args.seeds.clone()
            };
            ExperimentConfig::new(t, args.dims.clone(), seeds, default_out)?
        }
    };
    if !args.dims.is_empty() {
        config.dimensions = args.dims.clone();
    }
    if !args.seeds.is_empty() {
        config.seeds = args.seeds.clone();
    }
    if let Some(out) = &args.out {
        config.outputs = out.clone();
    }
    config.normalize()?;
    Ok(config)
}

fn summary_csv(s: &IndexSummary) -> String {
    let (se_u, se_e) = s
        .standard_error
        .map(|se| (se.u.to_string(), se.e.to_string()))
        .unwrap_or_default();
    let mode = serde_json::to_value(s.mode)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    format!(
        "U,E,triangle_count,mode,se_U,se_E\n{},{},{},{},{},{}",
        s.u, s.e, s.triangle_count, mode, se_u, se_e
    )
}

#[derive(Serialize)]
struct VerifyReport {
    metric: AxiomReport,
    strong: StrongReport,
}

fn verify_csv(r: &VerifyReport) -> String {
    let mut out = String::from("a,b,c,longest,middle,excess\n");
    for v in &r.strong.violations {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            v.a, v.b, v.c, v.longest, v.middle, v.excess
        ));
    }
    out.pop();
    out
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        ultragen::exec::configure_threads(k)?;
    }
    match cli.command {
        Command::Generate { config, seed, dim, out } => {
            let topology = load_config(&config)?.topology().clone();
            let cloud = generate_hierarchical_points(&topology, dim, seed)?;
            let path = out.join("cloud.csv");
            write_cloud(&cloud, &path)?;
            eprintln!("wrote {} ({} points, n = {dim})", path.display(), cloud.len());
        }
        Command::Distances { cloud, out } => {
            let c = read_cloud(&cloud)?;
            let m = distance_matrix(&c)?;
            let files = write_matrix_set(
                &m,
                &out,
                "distances",
                json!({ "kind": "empirical", "cloud": cloud, "seed": c.seed(), "dimension": c.dimension() }),
            )?;
            eprintln!("wrote {}", files.full.display());
        }
        Command::Theory { config, out } => {
            let topology = load_config(&config)?.topology().clone();
            let m = theoretical_ultrametric(&topology)?;
            let files = write_matrix_set(
                &m,
                &out,
                "theoretical",
                json!({ "kind": "theoretical", "topology": topology }),
            )?;
            eprintln!("wrote {}", files.full.display());
        }
        Command::Indexes {
            matrix,
            sampling,
            out,
            format,
            skip_degenerate,
            allow_large,
        } => {
            let m = load_matrix(&matrix)?;
            let opts = IndexOptions {
                skip_degenerate,
                allow_large,
                ..IndexOptions::default()
            };
            let summary = match sampling.sample_count {
                Some(k) => sampled_indexes(&m, k, sampling.seed, &opts)?,
                None => exact_indexes(&m, &opts)?,
            };
            if let Some(dir) = out {
                write_json(&summary, &dir.join("summary.json"))?;
            }
            match format {
                Format::Json => print_json(&summary)?,
                Format::Csv => println!("{}", summary_csv(&summary)),
            }
        }
        Command::Verify {
            matrix,
            tol,
            sampling,
            format,
            allow_large,
        } => {
            let m = load_matrix(&matrix)?;
            let tol = tol.unwrap_or_else(|| m.default_tolerance());
            let metric = check_metric_axioms(&m, tol)?;
            let options = StrongCheckOptions {
                mode: match sampling.sample_count {
                    Some(samples) => ScanMode::Sampled {
                        samples,
                        seed: sampling.seed,
                    },
                    None => ScanMode::Exhaustive,
                },
                allow_large,
                ..StrongCheckOptions::default()
            };
            let strong = check_strong_triangle_with(&m, tol, &options)?;
            let report = VerifyReport { metric, strong };
            match format {
                Format::Json => print_json(&report)?,
                Format::Csv => println!("{}", verify_csv(&report)),
            }
            if !report.metric.is_metric() {
                return Err(
                    ValidationFailed(format!("{} metric axiom violations", report.metric.violations.len())).into(),
                );
            }
            if let Some(worst) = &report.strong.worst {
                return Err(ValidationFailed(format!(
                    "{} strong triangle violations; worst {worst}",
                    report.strong.violation_count
                ))
                .into());
            }
        }
        Command::Dendro {
            matrix,
            tol,
            out,
            format,
        } => {
            let m = load_matrix(&matrix)?;
            let tol = tol.unwrap_or_else(|| m.default_tolerance());
            let d = recover_dendrogram(&m, tol)?;
            let text = d.render_text();
            if let Some(dir) = out {
                write_json(&d, &dir.join("dendrogram.json"))?;
                let txt = dir.join("dendrogram.txt");
                std::fs::write(&txt, &text).with_context(|| format!("writing {}", txt.display()))?;
            }
            match format {
                DendroFormat::Json => print_json(&d)?,
                DendroFormat::Text => print!("{text}"),
            }
        }
        Command::Transform { matrix, transform, out } => {
            let m = load_matrix(&matrix)?;
            let t = transform_metric(&m, &transform)?;
            let files = write_matrix_set(
                &t,
                &out,
                "transformed",
                json!({ "kind": "transformed", "source": matrix, "transform": transform }),
            )?;
            eprintln!("wrote {}", files.full.display());
        }
        Command::MatrixExp { exp } => {
            let config = experiment_config(&exp, "out/matrix")?;
            let report = run_matrix_experiment(&config)?;
            for run in &report.runs {
                println!(
                    "seed {}: max |d - u| = {:.6}, {} pairs beyond 5 sd",
                    run.seed, run.max_abs_deviation, run.exceedances
                );
            }
        }
        Command::Sweep {
            exp,
            sample_count,
            theoretical_only,
        } => {
            let mut config = experiment_config(&exp, "out/sweep")?;
            if let Some(sample_count) = sample_count {
                config.index_mode = IndexModeConfig::Sampled { sample_count };
                config.normalize()?;
            }
            let series = run_convergence_sweep(&config, theoretical_only)?;
            print!("{}", series.medians_csv());
        }
    }
    Ok(())
}
