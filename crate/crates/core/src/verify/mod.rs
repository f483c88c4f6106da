pub mod bellman;
pub mod checks;
pub mod domain;
pub mod report;
pub mod tolerances;

pub use bellman::{bellman_matrix, candidate_matrix, BellmanMatrix};
pub use checks::*;
pub use domain::{Axis, Scale, Sampling, ScanDomain};
pub use report::{all_gating_passed, to_json_document, to_json_lines, Metric, VerificationReport};
pub use tolerances::Tolerances;
