//! Stochastic generation of finite ultrametric spaces.
//!
//! Points are generated level by level down an `N`-level tree: each node is a
//! Gaussian perturbation of its parent in `R^n`. As `n` grows, the
//! dimension-normalized Euclidean distances between the leaves converge in
//! probability to an ultrametric determined by the tree alone,
//!
//! ```text
//! u(a, b) = √2 · (σ_ℓ² + σ_{ℓ+1}² + … + σ_N²)^{1/2},
//! ```
//!
//! where `ℓ` is the first level at which the leaf paths of `a` and `b` differ.
//!
//! The crate provides the generator ([`generator`]), distance matrices and
//! metric checks ([`metric`]), the limiting matrices with ultrametric
//! validation, transforms and tree recovery ([`ultrametric`]), and the
//! triangle indexes that measure how far a matrix is from ultrametric
//! ([`indexes`]).
//!
//! Data-parallel kernels use rayon when the `parallel` feature (on by default)
//! is enabled; every result is independent of the worker count.

pub mod error;
pub mod exec;
pub mod generator;
pub mod indexes;
pub mod metric;
pub mod persist;
pub mod sum;
pub mod topology;
pub mod ultrametric;

pub use error::{Error, Result};
pub use exec::Execution;
pub use generator::{derive_stream_seed, generate_hierarchical_points, GenerateOptions, PointCloud, SeedPath};
pub use indexes::{
    exact_indexes, isometricity_index, sampled_indexes, triangle_indexes, ultrametricity_index, IndexMode,
    IndexOptions, IndexSummary, TriangleIndexes,
};
pub use metric::{check_metric_axioms, distance_matrix, normalized_distance, AxiomReport, DistanceMatrix};
pub use topology::{
    classify_topology, delinearize, first_divergence_level, linearize, LeafIndex, TopologyClass, TreeTopology,
};
pub use ultrametric::{
    check_strong_triangle, cophenetic_matrix, recover_dendrogram, theoretical_ultrametric, transform_metric,
    two_point_limit, Dendrogram, StrongReport, Transform,
};
