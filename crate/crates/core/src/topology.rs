//! Hierarchical tree topology of a finite homogeneous ultrametric space.
//!
//! Level `k` (1-based) gives every node of level `k − 1` exactly `p_k`
//! children, and children of level `k` are displaced from their parent by a
//! Gaussian with standard deviation `σ_k`. Leaves are addressed by their path
//! `(a_1, …, a_N)` with `1 ≤ a_k ≤ p_k`, linearized row-major so that sibling
//! blocks are contiguous.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologySpec", into = "TopologySpec")]
pub struct TreeTopology {
    branching: Vec<usize>,
    sigmas: Vec<f64>,
    base_mean: f64,
    leaf_count: usize,
}

/// Serialized form of a [`TreeTopology`]. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub levels: usize,
    pub branching: Vec<usize>,
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub base_mean: f64,
}

impl TryFrom<TopologySpec> for TreeTopology {
    type Error = Error;

    fn try_from(spec: TopologySpec) -> Result<Self> {
        if spec.branching.len() != spec.levels || spec.sigmas.len() != spec.levels {
            return Err(Error::InvalidTopology(format!(
                "levels = {} but {} branching factors and {} sigmas given",
                spec.levels,
                spec.branching.len(),
                spec.sigmas.len()
            )));
        }
        TreeTopology::with_base_mean(spec.branching, spec.sigmas, spec.base_mean)
    }
}

impl From<TreeTopology> for TopologySpec {
    fn from(t: TreeTopology) -> Self {
        TopologySpec {
            levels: t.levels(),
            branching: t.branching,
            sigmas: t.sigmas,
            base_mean: t.base_mean,
        }
    }
}

impl TreeTopology {
    pub fn new(branching: Vec<usize>, sigmas: Vec<f64>) -> Result<Self> {
        Self::with_base_mean(branching, sigmas, 0.0)
    }

    pub fn with_base_mean(branching: Vec<usize>, sigmas: Vec<f64>, base_mean: f64) -> Result<Self> {
        if branching.is_empty() {
            return Err(Error::InvalidTopology("at least one level is required".into()));
        }
        if branching.len() != sigmas.len() {
            return Err(Error::InvalidTopology(format!(
                "{} branching factors but {} sigmas",
                branching.len(),
                sigmas.len()
            )));
        }
        if let Some(k) = branching.iter().position(|&p| p == 0) {
            return Err(Error::InvalidTopology(format!(
                "branching factor at level {} must be >= 1",
                k + 1
            )));
        }
        if let Some(k) = sigmas.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidTopology(format!(
                "sigma at level {} must be positive and finite, got {}",
                k + 1,
                sigmas[k]
            )));
        }
        if !base_mean.is_finite() {
            return Err(Error::InvalidTopology("base_mean must be finite".into()));
        }
        let leaf_count = branching
            .iter()
            .try_fold(1usize, |acc, &p| acc.checked_mul(p))
            .ok_or_else(|| Error::InvalidTopology("leaf count overflows usize".into()))?;
        Ok(TreeTopology {
            branching,
            sigmas,
            base_mean,
            leaf_count,
        })
    }

    pub fn levels(&self) -> usize {
        self.branching.len()
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn base_mean(&self) -> f64 {
        self.base_mean
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Number of nodes at `level` (1-based), i.e. `p_1 ⋯ p_level`.
    pub fn nodes_at_level(&self, level: usize) -> usize {
        self.branching[..level].iter().product()
    }

    /// Total number of non-root nodes across all levels.
    pub fn node_count(&self) -> usize {
        (1..=self.levels()).map(|k| self.nodes_at_level(k)).sum()
    }

    /// Σ_{k=level..N} σ_k², the squared half-distance between leaves whose
    /// paths first differ at `level`.
    pub fn tail_variance(&self, level: usize) -> f64 {
        self.sigmas[level - 1..].iter().map(|s| s * s).sum()
    }

    pub fn classify(&self) -> TopologyClass {
        classify_topology(self)
    }

    pub fn leaves(&self) -> impl Iterator<Item = LeafIndex> + '_ {
        (0..self.leaf_count).map(move |i| delinearize(i, self).expect("in range"))
    }
}

/// A leaf address: the 1-based path together with its row-major linear index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeafIndex {
    pub path: Vec<usize>,
    pub linear: usize,
}

impl LeafIndex {
    pub fn from_path(path: Vec<usize>, topology: &TreeTopology) -> Result<Self> {
        let linear = linearize(&path, topology)?;
        Ok(LeafIndex { path, linear })
    }
}

/// Row-major linear index of a leaf path, `Σ_k (a_k − 1)·∏_{j>k} p_j`.
pub fn linearize(path: &[usize], topology: &TreeTopology) -> Result<usize> {
    prefix_linear(path, topology.branching())
}

/// Linear index of a node path of any depth `k ≤ N` among the nodes of level `k`.
pub(crate) fn prefix_linear(path: &[usize], branching: &[usize]) -> Result<usize> {
    if path.len() != branching.len() {
        return Err(Error::InvalidIndex(format!(
            "path has {} components, expected {}",
            path.len(),
            branching.len()
        )));
    }
    let mut linear = 0usize;
    for (k, (&a, &p)) in path.iter().zip(branching).enumerate() {
        if a < 1 || a > p {
            return Err(Error::InvalidIndex(format!(
                "component {} at level {} outside [1, {}]",
                a,
                k + 1,
                p
            )));
        }
        linear = linear * p + (a - 1);
    }
    Ok(linear)
}

pub fn delinearize(linear: usize, topology: &TreeTopology) -> Result<LeafIndex> {
    if linear >= topology.leaf_count() {
        return Err(Error::InvalidIndex(format!(
            "linear index {} outside [0, {})",
            linear,
            topology.leaf_count()
        )));
    }
    Ok(LeafIndex {
        path: prefix_path(linear, topology.branching()),
        linear,
    })
}

/// Inverse of [`prefix_linear`]; `linear` must be in range.
pub(crate) fn prefix_path(mut linear: usize, branching: &[usize]) -> Vec<usize> {
    let mut path = vec![0; branching.len()];
    for (slot, &p) in path.iter_mut().zip(branching).rev() {
        *slot = linear % p + 1;
        linear /= p;
    }
    path
}

/// Smallest 1-based level at which the two paths differ, or `None` for the
/// same leaf.
pub fn first_divergence_level(a: &[usize], b: &[usize]) -> Result<Option<usize>> {
    if a.len() != b.len() {
        return Err(Error::InvalidIndex(format!(
            "paths of different length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).position(|(x, y)| x != y).map(|k| k + 1))
}

/// Divergence level computed straight from linear indices, without building paths.
pub(crate) fn divergence_from_linear(a: usize, b: usize, branching: &[usize]) -> Option<usize> {
    if a == b {
        return None;
    }
    // Walk from the leaves upward; the last level where the quotients still
    // differ is the first divergence level.
    let (mut qa, mut qb) = (a, b);
    let mut level = branching.len();
    for (k, &p) in branching.iter().enumerate().rev() {
        if qa != qb {
            level = k + 1;
        }
        qa /= p;
        qb /= p;
    }
    Some(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyClass {
    pub homogeneous: bool,
    pub self_similar: bool,
}

/// Branching depends only on the level, so every tree here is homogeneous;
/// constant branching makes it a Cayley tree boundary, i.e. self-similar.
pub fn classify_topology(topology: &TreeTopology) -> TopologyClass {
    let p = topology.branching();
    TopologyClass {
        homogeneous: true,
        self_similar: p.windows(2).all(|w| w[0] == w[1]),
    }
}
