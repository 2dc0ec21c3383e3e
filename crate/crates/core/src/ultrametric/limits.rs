use crate::exec::Execution;
use crate::metric::{DistanceMatrix, DEFAULT_MAX_ENTRIES};
use crate::topology::{divergence_from_linear, TreeTopology};
use crate::{Error, Result};

/// Limit of the normalized distance between two independent Gaussian points
/// with coordinate means `m_a`, `m_b` and standard deviations `σ_a`, `σ_b`:
/// `√(σ_a² + σ_b² + (m_a − m_b)²)`.
pub fn two_point_limit(m_a: f64, sigma_a: f64, m_b: f64, sigma_b: f64) -> Result<f64> {
    if !(sigma_a >= 0.0) || !(sigma_b >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "standard deviations must be >= 0, got {sigma_a} and {sigma_b}"
        )));
    }
    let dm = m_a - m_b;
    Ok((sigma_a * sigma_a + sigma_b * sigma_b + dm * dm).sqrt())
}

/// The limiting leaf-to-leaf ultrametric of a topology: leaves whose paths
/// first differ at level `ℓ` sit at `√2·(Σ_{k=ℓ..N} σ_k²)^{1/2}`.
pub fn theoretical_ultrametric(topology: &TreeTopology) -> Result<DistanceMatrix> {
    theoretical_ultrametric_with(topology, Execution::default(), DEFAULT_MAX_ENTRIES)
}

pub fn theoretical_ultrametric_with(
    topology: &TreeTopology,
    exec: Execution,
    max_entries: usize,
) -> Result<DistanceMatrix> {
    let n = topology.leaf_count();
    let requested = n as u128 * n as u128;
    if requested > max_entries as u128 {
        return Err(Error::Capacity {
            requested,
            budget: max_entries as u128,
        });
    }
    // one value per divergence level, so equal-level entries are bit-identical
    let by_level: Vec<f64> = (1..=topology.levels())
        .map(|l| (2.0 * topology.tail_variance(l)).sqrt())
        .collect();
    let branching = topology.branching();
    DistanceMatrix::from_fn(n, exec, |a, b| match divergence_from_linear(a, b, branching) {
        Some(level) => by_level[level - 1],
        None => 0.0,
    })
    .with_labels(topology.leaves().map(|l| l.path).collect())
}
