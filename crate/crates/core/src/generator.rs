//! Hierarchical Gaussian point generation.
//!
//! Level-1 nodes are drawn coordinatewise from `N(base_mean, σ_1²)`; every
//! node at level `k ≥ 2` is its parent plus an independent `N(0, σ_k²)`
//! displacement per coordinate. The leaves form the point cloud.
//!
//! Every node owns a private random stream keyed by its path, so a node's
//! coordinates never depend on generation order or on how rows are split
//! across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::topology::{prefix_path, TreeTopology};
use crate::{Error, Result};

/// Default cap on the number of stored coordinates (1 GiB of `f64`).
pub const DEFAULT_MAX_VALUES: usize = 1 << 27;

/// A node in the generation tree, identified by the master seed and its path
/// prefix `(a_1, …, a_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedPath {
    pub master: u64,
    pub node_path: Vec<usize>,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed SplitMix64 chain over (master, level, component). Each step is a
/// bijection of the running state for a fixed level, so siblings never share
/// a stream.
pub fn derive_stream_seed(seed_path: &SeedPath) -> u64 {
    stream_seed(seed_path.master, &seed_path.node_path)
}

pub(crate) fn stream_seed(master: u64, node_path: &[usize]) -> u64 {
    let mut h = mix64(master ^ GOLDEN);
    for (k, &a) in node_path.iter().enumerate() {
        let tag = ((k as u64 + 1) << 48) ^ a as u64;
        h = mix64(h.wrapping_add(GOLDEN).wrapping_add(tag));
    }
    mix64(h ^ (node_path.len() as u64).wrapping_mul(GOLDEN))
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Also return the internal node coordinates of levels `1..N−1`.
    pub keep_intermediate: bool,
    /// Maximum number of `f64` coordinates the generator may hold.
    pub max_values: usize,
    pub execution: Execution,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            keep_intermediate: false,
            max_values: DEFAULT_MAX_VALUES,
            execution: Execution::default(),
        }
    }
}

/// Leaf points of a generated hierarchy, one row per leaf in linear-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dimension: usize,
    topology: TreeTopology,
    points: Vec<f64>,
    seed: u64,
    intermediate_levels: Option<Vec<Vec<f64>>>,
}

/// Provenance written next to a persisted cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudMeta {
    pub topology: TreeTopology,
    pub seed: u64,
    pub dimension: usize,
}

impl PointCloud {
    /// Wraps existing coordinates, e.g. when reading a cloud back from disk.
    pub fn from_parts(topology: TreeTopology, dimension: usize, seed: u64, points: Vec<f64>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if points.len() != topology.leaf_count() * dimension {
            return Err(Error::InvalidArgument(format!(
                "expected {} x {} coordinates, got {}",
                topology.leaf_count(),
                dimension,
                points.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("cloud contains non-finite coordinates".into()));
        }
        Ok(PointCloud {
            dimension,
            topology,
            points,
            seed,
            intermediate_levels: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn topology(&self) -> &TreeTopology {
        &self.topology
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.topology.leaf_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major `leaf_count × dimension` coordinates.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn row(&self, leaf: usize) -> &[f64] {
        &self.points[leaf * self.dimension..(leaf + 1) * self.dimension]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dimension)
    }

    /// Coordinates of the internal nodes at `level` (1-based, `< N`), if kept.
    pub fn intermediate(&self, level: usize) -> Option<&[f64]> {
        self.intermediate_levels
            .as_ref()
            .and_then(|levels| levels.get(level.checked_sub(1)?))
            .map(Vec::as_slice)
    }

    pub fn meta(&self) -> CloudMeta {
        CloudMeta {
            topology: self.topology.clone(),
            seed: self.seed,
            dimension: self.dimension,
        }
    }
}

pub fn generate_hierarchical_points(topology: &TreeTopology, dimension: usize, seed: u64) -> Result<PointCloud> {
    generate_with(topology, dimension, seed, &GenerateOptions::default())
}

pub fn generate_with(
    topology: &TreeTopology,
    dimension: usize,
    seed: u64,
    options: &GenerateOptions,
) -> Result<PointCloud> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let rows = if options.keep_intermediate {
        topology.node_count()
    } else {
        topology.leaf_count()
    };
    let requested = rows as u128 * dimension as u128;
    if requested > options.max_values as u128 {
        return Err(Error::Capacity {
            requested,
            budget: options.max_values as u128,
        });
    }

    let branching = topology.branching();
    let mut kept = Vec::new();
    let mut parent: Vec<f64> = Vec::new();
    for level in 1..=topology.levels() {
        let count = topology.nodes_at_level(level);
        let p = branching[level - 1];
        let sigma = topology.sigmas()[level - 1];
        let prefix = &branching[..level];
        let mut current = vec![0.0; count * dimension];
        exec::for_each_row(options.execution, &mut current, dimension, |node, row| {
            let path = prefix_path(node, prefix);
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &path));
            if level == 1 {
                for v in row.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v = sigma * z;
                }
            } else {
                let up = node / p;
                let base = &parent[up * dimension..(up + 1) * dimension];
                for (v, m) in row.iter_mut().zip(base) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v = m + sigma * z;
                }
            }
        });
        let finished = std::mem::replace(&mut parent, current);
        if options.keep_intermediate && level > 1 {
            kept.push(finished);
        }
    }

    // Sampling is done around the origin; the mean is added last so that a
    // shifted cloud is the unshifted one plus a constant.
    let shift = |values: &mut [f64]| {
        let c = topology.base_mean();
        if c != 0.0 {
            values.iter_mut().for_each(|v| *v += c);
        }
    };
    shift(&mut parent);
    for level in kept.iter_mut() {
        shift(level);
    }

    Ok(PointCloud {
        dimension,
        topology: topology.clone(),
        points: parent,
        seed,
        intermediate_levels: options.keep_intermediate.then_some(kept),
    })
}
