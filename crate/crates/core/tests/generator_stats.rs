//! Statistical and reproducibility properties of the hierarchical generator.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use ultragen::generator::{generate_with, GenerateOptions};
use ultragen::topology::TreeTopology;
use ultragen::{derive_stream_seed, generate_hierarchical_points, Execution, SeedPath};

fn all_node_paths(branching: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for &p in branching {
        let next: Vec<Vec<usize>> = frontier
            .iter()
            .flat_map(|prefix| {
                (1..=p).map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn distinct_seeds(master: u64, branching: &[usize]) -> (usize, usize) {
    let paths = all_node_paths(branching);
    let seeds: HashSet<u64> = paths
        .iter()
        .map(|p| {
            derive_stream_seed(&SeedPath {
                master,
                node_path: p.clone(),
            })
        })
        .collect();
    (paths.len(), seeds.len())
}

#[test]
fn stream_seeds_distinct_for_ten_cubed() {
    assert_eq!(distinct_seeds(42, &[10, 10, 10]), (1110, 1110));
}

#[test]
fn stream_seeds_distinct_near_a_million_nodes() {
    // 99 + 9 900 + 990 000 = 999 999 nodes
    let (nodes, distinct) = distinct_seeds(7, &[99, 100, 100]);
    assert!(nodes <= 1_000_000);
    assert_eq!(nodes, distinct);
    let (nodes, distinct) = distinct_seeds(0, &[2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2]);
    assert_eq!(nodes, distinct);
}

fn variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

#[test]
fn two_level_variances() {
    let t = TreeTopology::new(vec![3, 3], vec![1.0, 1.0]).unwrap();
    let n = 10_000;
    let cloud = generate_hierarchical_points(&t, n, 2024).unwrap();

    // within-parent: deviations of leaves from their sibling-group mean
    let mut within = Vec::new();
    for group in 0..3 {
        for i in 0..n {
            let vals: Vec<f64> = (0..3).map(|k| cloud.row(group * 3 + k)[i]).collect();
            let m = vals.iter().sum::<f64>() / 3.0;
            // unbiased with 2 dof per group-coordinate
            within.extend(vals.iter().map(|v| (v - m) * 1.5f64.sqrt()));
        }
    }
    let v_within = within.iter().map(|d| d * d).sum::<f64>() / within.len() as f64;
    assert!((v_within - 1.0).abs() < 0.1, "within-parent variance {v_within}");

    let v_total = variance(cloud.points().iter().copied());
    assert!((v_total - 2.0).abs() < 0.1, "pooled variance {v_total}");

    // direct oracle: parent ~ N(0,1), child ~ N(parent, 1), 2·10⁵ samples
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let oracle: Vec<f64> = (0..200_000)
        .map(|_| {
            let parent = unit.sample(&mut rng);
            parent + unit.sample(&mut rng)
        })
        .collect();
    let v_oracle = variance(oracle.iter().copied());
    assert!((v_oracle - 2.0).abs() < 0.05);
    assert!((v_total - v_oracle).abs() < 0.1);
}

#[test]
fn children_average_to_parent() {
    let sigmas = [1.0, 0.8];
    let p = 60;
    let t = TreeTopology::new(vec![3, p], sigmas.to_vec()).unwrap();
    let n = 40;
    let opts = GenerateOptions {
        keep_intermediate: true,
        ..Default::default()
    };
    let cloud = generate_with(&t, n, 5, &opts).unwrap();
    let parents = cloud.intermediate(1).unwrap();
    let tol = 4.0 * sigmas[1] / (p as f64).sqrt();
    for node in 0..3 {
        for i in 0..n {
            let mean = (0..p).map(|k| cloud.row(node * p + k)[i]).sum::<f64>() / p as f64;
            let parent = parents[node * n + i];
            assert!((mean - parent).abs() <= tol, "node {node} coord {i}");
        }
    }
}

#[test]
fn level_one_variance_within_chi_square_bounds() {
    let sigma1: f64 = 1.7;
    let t = TreeTopology::new(vec![20, 2], vec![sigma1, 0.3]).unwrap();
    let n = 500;
    let opts = GenerateOptions {
        keep_intermediate: true,
        ..Default::default()
    };
    let cloud = generate_with(&t, n, 31, &opts).unwrap();
    let level1 = cloud.intermediate(1).unwrap();
    // known mean 0: Σx²/σ² ~ χ²(20·n)
    let dof = level1.len() as f64;
    let stat = level1.iter().map(|x| x * x).sum::<f64>() / (sigma1 * sigma1);
    let chi = ChiSquared::new(dof).unwrap();
    let confidence = 0.999;
    let lo = chi.inverse_cdf((1.0 - confidence) / 2.0);
    let hi = chi.inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    assert!(lo <= stat && stat <= hi, "{lo} <= {stat} <= {hi}");
}

#[test]
fn base_mean_is_a_pure_shift() {
    let c = 3.25;
    let zero = TreeTopology::new(vec![2, 3, 2], vec![1.0, 0.5, 0.1]).unwrap();
    let shifted = TreeTopology::with_base_mean(vec![2, 3, 2], vec![1.0, 0.5, 0.1], c).unwrap();
    let a = generate_hierarchical_points(&zero, 300, 8).unwrap();
    let b = generate_hierarchical_points(&shifted, 300, 8).unwrap();
    for (x, y) in a.points().iter().zip(b.points()) {
        assert!((y - x - c).abs() <= 1e-12 * (c.abs() + x.abs()), "{x} {y}");
    }
}

#[test]
fn identical_across_worker_counts() {
    let t = TreeTopology::new(vec![3, 4, 5], vec![1.0, 0.5, 0.25]).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| generate_hierarchical_points(&t, 1000, 123).unwrap())
    };
    let one = run(1);
    assert_eq!(one.points(), run(3).points());
    assert_eq!(one.points(), run(8).points());
    let serial = generate_with(
        &t,
        1000,
        123,
        &GenerateOptions {
            execution: Execution::Serial,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(one.points(), serial.points());
}

#[test]
fn non_branching_level_adds_its_variance() {
    // p_2 = 1: the lone child still moves by σ_2, so leaves under different
    // level-1 nodes sit at √2·√(σ_1² + σ_2²)
    let t = TreeTopology::new(vec![4, 1], vec![1.0, 2.0]).unwrap();
    let n = 20_000;
    let cloud = generate_hierarchical_points(&t, n, 17).unwrap();
    let limit = (2.0f64 * 5.0).sqrt();
    let tol = 5.0 * limit / (2.0 * n as f64).sqrt();
    for a in 0..4 {
        for b in (a + 1)..4 {
            let d = ultragen::normalized_distance(cloud.row(a), cloud.row(b)).unwrap();
            assert!((d - limit).abs() < tol, "{d} vs {limit}");
        }
    }
}
