//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultragen::persist::read_matrix;
use ultragen::{
    check_strong_triangle, cophenetic_matrix, exact_indexes, generate_hierarchical_points, recover_dendrogram,
    theoretical_ultrametric, transform_metric, DistanceMatrix, IndexOptions, Transform, TreeTopology,
};

const BIN: &str = env!("CARGO_BIN_EXE_umcli");
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type Outcome = Result<String, String>;

fn umcli(args: &[&str]) -> Result<Duration, String> {
    let t = Instant::now();
    let o = Command::new(BIN).args(args).output().map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    if !o.status.success() {
        return Err(format!(
            "umcli {} exited {:?}: {}",
            args.join(" "),
            o.status.code(),
            String::from_utf8_lossy(&o.stderr).trim()
        ));
    }
    Ok(elapsed)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn topology_toml(branching: &[usize], sigmas: &[f64]) -> String {
    format!(
        "levels = {}\nbranching = {branching:?}\nsigmas = {sigmas:?}\n",
        branching.len()
    )
}

/// Limit for leaves `a`, `b` straight from the leaf paths.
fn oracle(branching: &[usize], sigmas: &[f64], a: usize, b: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let path = |mut l: usize| {
        let mut digits = vec![0; branching.len()];
        for k in (0..branching.len()).rev() {
            digits[k] = l % branching[k];
            l /= branching[k];
        }
        digits
    };
    let (pa, pb) = (path(a), path(b));
    let first = (0..branching.len()).find(|&k| pa[k] != pb[k]).unwrap();
    (2.0 * sigmas[first..].iter().map(|s| s * s).sum::<f64>()).sqrt()
}

fn oracle_matrix(branching: &[usize], sigmas: &[f64]) -> Vec<Vec<f64>> {
    let n: usize = branching.iter().product();
    (0..n)
        .map(|a| (0..n).map(|b| oracle(branching, sigmas, a, b)).collect())
        .collect()
}

/// Brute-force `E` over ordered triples, every unordered triangle counted 6 times.
fn brute_e(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let (mut sum, mut count) = (0.0, 0u64);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c {
                    continue;
                }
                let s = [m[a][b], m[b][c], m[a][c]];
                let max = s.iter().cloned().fold(f64::MIN, f64::max);
                let min = s.iter().cloned().fold(f64::MAX, f64::min);
                sum += 1.0 - min / max;
                count += 1;
            }
        }
    }
    sum / count as f64
}

fn distinct_off_diagonal(m: &DistanceMatrix, tol: f64) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    for a in 0..m.size() {
        for b in (a + 1)..m.size() {
            let v = m.get(a, b);
            if !values.iter().any(|&w| (w - v).abs() <= tol) {
                values.push(v);
            }
        }
    }
    values.sort_by(f64::total_cmp);
    values
}

fn criterion_1(dir: &Path) -> Outcome {
    let cases: [(&[usize], &[f64], Vec<f64>); 2] = [
        (&[3, 3], &[1.0, 1.0], vec![2f64.sqrt(), 2.0]),
        (&[2, 2, 2], &[1.0, 1.0, 1.0], vec![2f64.sqrt(), 2.0, 6f64.sqrt()]),
    ];
    let mut details = Vec::new();
    for (i, (branching, sigmas, expected)) in cases.iter().enumerate() {
        let cfg = dir.join(format!("c1_{i}.toml"));
        fs::write(&cfg, topology_toml(branching, sigmas)).unwrap();
        let out = dir.join(format!("c1_{i}"));
        let elapsed = umcli(&["theory", "--config", p(&cfg), "--out", p(&out)])?;
        if elapsed >= Duration::from_secs(1) {
            return Err(format!("{branching:?}: took {elapsed:?}"));
        }
        let m = read_matrix(&out.join("theoretical.csv")).map_err(|e| e.to_string())?;
        let values = distinct_off_diagonal(&m, 1e-12);
        if values.len() != expected.len() || values.iter().zip(expected).any(|(v, e)| (v - e).abs() > 1e-12) {
            return Err(format!("{branching:?}: values {values:?}, expected {expected:?}"));
        }
        let want = oracle_matrix(branching, sigmas);
        let worst = (0..m.size())
            .flat_map(|a| (0..m.size()).map(move |b| (a, b)))
            .map(|(a, b)| (m.get(a, b) - want[a][b]).abs())
            .fold(0.0, f64::max);
        if worst > 1e-12 {
            return Err(format!("{branching:?}: entry off by {worst:e}"));
        }
        details.push(format!("{branching:?} -> {} values in {elapsed:.0?}", values.len()));
    }
    Ok(details.join("; "))
}

fn reproduction(dir: &Path, tag: &str, branching: &[usize], sigmas: &[f64]) -> Outcome {
    let n = 10_000usize;
    let cfg = dir.join(format!("{tag}.toml"));
    fs::write(&cfg, topology_toml(branching, sigmas)).unwrap();
    let out = dir.join(tag);
    let mut args = vec!["matrix-exp", "--config", p(&cfg), "--dim", "10000", "--out", p(&out)];
    let seeds: Vec<String> = SEEDS.iter().map(u64::to_string).collect();
    for s in &seeds {
        args.extend(["--seed", s]);
    }
    let elapsed = umcli(&args)?;
    let want = oracle_matrix(branching, sigmas);
    let (mut exceed, mut worst) = (0usize, 0.0f64);
    for s in SEEDS {
        let m = read_matrix(&out.join(format!("seed_{s}/empirical.csv"))).map_err(|e| e.to_string())?;
        for a in 0..m.size() {
            for b in (a + 1)..m.size() {
                let u = want[a][b];
                let dev = (m.get(a, b) - u).abs();
                worst = worst.max(dev);
                if dev > 5.0 * u / (2.0 * n as f64).sqrt() {
                    exceed += 1;
                }
            }
        }
    }
    let detail = format!("{exceed} entry-seed exceedances, max |d - u| = {worst:.4}, {elapsed:.1?}");
    if exceed > 1 {
        return Err(detail);
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("too slow: {detail}"));
    }
    Ok(detail)
}

fn criterion_4() -> Outcome {
    let n = 10_000;
    let limit = 6f64.sqrt();
    let tau = 5.0 * limit / (2.0 * n as f64).sqrt();
    let a = TreeTopology::with_base_mean(vec![1], vec![1.0], 0.0).map_err(|e| e.to_string())?;
    let b = TreeTopology::with_base_mean(vec![1], vec![2.0], 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for s in SEEDS {
        let x = generate_hierarchical_points(&a, n, 2 * s).map_err(|e| e.to_string())?;
        let y = generate_hierarchical_points(&b, n, 2 * s + 1).map_err(|e| e.to_string())?;
        let d = ultragen::normalized_distance(x.row(0), y.row(0)).map_err(|e| e.to_string())?;
        worst = worst.max((d - limit).abs());
    }
    let detail = format!("max |d - sqrt(6)| = {worst:.4} over 5 seeds, tolerance {tau:.4}");
    if worst <= tau {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn battery() -> Vec<TreeTopology> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..50)
        .map(|_| {
            let levels = rng.random_range(1..=4);
            let branching = (0..levels).map(|_| rng.random_range(1..=4)).collect();
            // (0, 3]
            let sigmas = (0..levels).map(|_| 3.0 - rng.random_range(0.0..3.0)).collect();
            TreeTopology::new(branching, sigmas).unwrap()
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut max_u = 0.0f64;
    let mut scored = 0;
    for t in battery() {
        let m = theoretical_ultrametric(&t).map_err(|e| e.to_string())?;
        let report = check_strong_triangle(&m, 0.0).map_err(|e| e.to_string())?;
        if !report.is_ultrametric() {
            return Err(format!(
                "{:?}: {} strong violations",
                t.branching(),
                report.violation_count
            ));
        }
        // U needs at least 3 points with no coincident pair
        if m.size() >= 3 {
            let s = exact_indexes(&m, &IndexOptions::default()).map_err(|e| e.to_string())?;
            max_u = max_u.max(s.u.abs());
            scored += 1;
        }
    }
    let detail = format!("50 topologies ultrametric, max U = {max_u:e} over {scored} with >= 3 leaves");
    if max_u <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6(dir: &Path) -> Outcome {
    let out = dir.join("sweep");
    let cfg = dir.join("sweep.toml");
    fs::write(
        &cfg,
        format!(
            "dimensions = [5, 10, 15, 30, 100, 1000, 10000]\nseeds = [1, 2, 3, 4, 5]\noutputs = {:?}\n\n[topology]\n{}",
            p(&out),
            topology_toml(&[3, 3, 3], &[1.0, 1.0, 1.0])
        ),
    )
    .unwrap();
    let elapsed = umcli(&["sweep", "--config", p(&cfg)])?;
    let text = fs::read_to_string(out.join("series.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    if lines.next() != Some("n,seed,U,E,max_abs_dev") {
        return Err("series.csv header".into());
    }
    let rows: Vec<(usize, f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let median = |n: usize, col: fn(&(usize, f64, f64)) -> f64| {
        let mut v: Vec<f64> = rows.iter().filter(|r| r.0 == n).map(col).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(v.len(), 5);
        v[2]
    };
    let u = |n| median(n, |r| r.1);
    let e_exact = brute_e(&oracle_matrix(&[3, 3, 3], &[1.0, 1.0, 1.0]));
    let e_big = median(10_000, |r| r.2);
    let checks = [
        ("a", u(10_000) < 0.02),
        ("b", u(10_000) < u(10)),
        ("c", (e_big - e_exact).abs() <= 0.02),
        ("d", u(15) < u(5)),
        ("runtime", elapsed < Duration::from_secs(120)),
    ];
    let detail = format!(
        "median U: n=5 {:.4}, n=10 {:.4}, n=15 {:.4}, n=1e4 {:.4}; median E at 1e4 {e_big:.4} vs exact {e_exact:.4}; {elapsed:.1?}",
        u(5),
        u(10),
        u(15),
        u(10_000)
    );
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if failed.is_empty() {
        Ok(detail)
    } else {
        Err(format!("failed ({}) {detail}", failed.join(", ")))
    }
}

fn random_descriptor(rng: &mut ChaCha8Rng) -> String {
    let steps = rng.random_range(1..=3);
    (0..steps)
        .map(|_| match rng.random_range(0..4) {
            0 => "identity".to_string(),
            1 => format!("pow:{}", rng.random_range(0.1..4.0)),
            2 => format!("scale:{}", rng.random_range(0.01..100.0)),
            _ => format!("min:{}", rng.random_range(0.1..5.0)),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..200 {
        let levels = rng.random_range(1..=4);
        let branching = (0..levels).map(|_| rng.random_range(1..=4)).collect();
        let sigmas = (0..levels).map(|_| 3.0 - rng.random_range(0.0..3.0)).collect();
        let t = TreeTopology::new(branching, sigmas).unwrap();
        let desc = random_descriptor(&mut rng);
        let f: Transform = desc.parse().map_err(|e| format!("{desc}: {e}"))?;
        let m = theoretical_ultrametric(&t).map_err(|e| e.to_string())?;
        let out = transform_metric(&m, &f).map_err(|e| format!("pair {i} ({desc}): {e}"))?;
        let report = check_strong_triangle(&out, 1e-12 * out.max_entry()).map_err(|e| e.to_string())?;
        if !report.is_ultrametric() {
            return Err(format!("pair {i} ({desc}): {} violations", report.violation_count));
        }
    }
    Ok("200 transformed matrices pass at 1e-12 * max".into())
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    for t in battery() {
        let m = theoretical_ultrametric(&t).map_err(|e| e.to_string())?;
        let d = recover_dendrogram(&m, 0.0).map_err(|e| e.to_string())?;
        if d.merges.len() + 1 != m.size() {
            return Err(format!("{:?}: {} merges", t.branching(), d.merges.len()));
        }
        worst = worst.max(cophenetic_matrix(&d).max_abs_deviation(&m).map_err(|e| e.to_string())?);
    }
    let detail = format!("50 topologies, max |cophenetic - u| = {worst:e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9(dir: &Path) -> Outcome {
    let cfg = dir.join("c9.toml");
    fs::write(&cfg, topology_toml(&[3, 3], &[1.0, 1.0])).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.join(format!("c9_t{threads}"));
        let t = ["--threads", threads];
        umcli(
            &[
                &t[..],
                &[
                    "generate",
                    "--config",
                    p(&cfg),
                    "--seed",
                    "1",
                    "--dim",
                    "10000",
                    "--out",
                    p(&out),
                ],
            ]
            .concat(),
        )?;
        umcli(&[&t[..], &["distances", p(&out.join("cloud.csv")), "--out", p(&out)]].concat())?;
        umcli(&[&t[..], &["indexes", p(&out.join("distances.csv")), "--out", p(&out)]].concat())?;
        let summary = fs::read(out.join("summary.json")).map_err(|e| e.to_string())?;
        let matrix = fs::read(out.join("distances.csv")).map_err(|e| e.to_string())?;
        outputs.push((summary, matrix));
    }
    if outputs[0].0 != outputs[1].0 {
        return Err("summary.json differs between --threads 1 and --threads 8".into());
    }
    if outputs[0].1 != outputs[1].1 {
        return Err("distances.csv differs between --threads 1 and --threads 8".into());
    }
    Ok(format!(
        "summary.json identical ({} bytes), distances.csv identical",
        outputs[0].0.len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("closed-form matrix oracle", Box::new(|| criterion_1(d))),
        (
            "two-level reproduction",
            Box::new(|| reproduction(d, "c2", &[3, 3], &[1.0, 1.0])),
        ),
        (
            "three-level reproduction",
            Box::new(|| reproduction(d, "c3", &[2, 2, 2], &[1.0, 1.0, 1.0])),
        ),
        ("two-point limit", Box::new(criterion_4)),
        ("ultrametric exactness", Box::new(criterion_5)),
        ("convergence sweep", Box::new(|| criterion_6(d))),
        ("transform property suite", Box::new(criterion_7)),
        ("dendrogram round-trip", Box::new(criterion_8)),
        ("determinism across thread caps", Box::new(|| criterion_9(d))),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
