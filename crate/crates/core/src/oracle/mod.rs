//! Brute-force references in exact rational arithmetic.
//!
//! Everything here enumerates: token trajectories, line-protocol boundary
//! walks, or the complete randomness of a protocol run. Size guards refuse
//! instances that would not finish rather than falling back to sampling.

mod check;
mod detection;
mod enumerate;
mod line;
mod trajectory;

pub use check::{check_mismatch, irregular_example, run_oracle_suite, CheckOutcome, OracleReport};
pub use detection::{oracle_detection_probability, oracle_snapshot_likelihoods, ENUM_MAX_T_LINE, ENUM_MAX_T_TREE};
pub use enumerate::{enumerate, DEFAULT_PATH_LIMIT};
pub use line::{oracle_line_distribution, triangular_size_law, LineDistribution, LINE_ORACLE_MAX_T};
pub use trajectory::{oracle_adaptive_likelihoods, TrajectorySum, TRAJECTORY_MAX_NODES, TRAJECTORY_MAX_T};

use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Nearest `f64` to an exact value.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
