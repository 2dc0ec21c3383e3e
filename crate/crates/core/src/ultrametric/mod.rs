//! Closed-form limiting ultrametrics, the strong triangle inequality, monotone
//! transforms and tree recovery.

mod dendrogram;
mod limits;
mod strong;
mod transform;

pub use dendrogram::{cophenetic_matrix, recover_dendrogram, Dendrogram, Merge};
pub use limits::{theoretical_ultrametric, theoretical_ultrametric_with, two_point_limit};
pub use strong::{
    check_strong_triangle, check_strong_triangle_with, ScanMode, StrongCheckOptions, StrongReport, StrongViolation,
    EXHAUSTIVE_POINT_LIMIT,
};
pub use transform::{transform_metric, Transform};
