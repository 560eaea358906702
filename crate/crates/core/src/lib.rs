//! Probability calculus for a bipartite quantum system whose local
//! measurements trigger quantum jumps with a causelike order.
//!
//! Actual-measurement statistics (joint and conditional probabilities) do
//! not depend on which jump comes first. Counterfactual probabilities do:
//! the R-state an alternative measurement would have found depends on
//! whether the nonselective L-measurement jump preceded the R-jump.
//!
//! - [`hilbert`]: kets, operators, density operators, partial traces.
//! - [`measurement`]: nonselective and selective projective updates,
//!   the symmetric case and the reciprocity relation.
//! - [`spacetime`]: Minkowski events, boosts, and the [`spacetime::OrderTag`].
//! - [`counterfactual`]: conditionals and counterfactuals under either order.
//! - [`hardy`]: the Hardy-type state and its closed-form counterfactuals.
//! - [`montecarlo`]: frequency counting under either order.
//! - [`scenario`]: TOML scenario files, reports and CSV output for the CLI.

pub mod counterfactual;
pub mod ensemble;
pub mod error;
pub mod hardy;
pub mod hilbert;
pub mod measurement;
pub mod montecarlo;
pub mod scenario;
pub mod spacetime;

pub use error::{Error, Result};

/// Normalization tolerance for kets and traces.
pub const EPS_NORM: f64 = 1e-10;
/// Hermiticity tolerance.
pub const EPS_HERM: f64 = 1e-10;
/// Elementwise agreement tolerance between two computation paths.
pub const EPS_NUM: f64 = 1e-10;
/// Smallest eigenvalue accepted as nonnegative.
pub const EPS_PSD: f64 = 1e-9;
/// Outcome probabilities at or below this are treated as impossible.
pub const EPS_PROB: f64 = 1e-12;
/// Largest supported `d_L * d_R`.
pub const MAX_COMPOSITE_DIM: usize = 64;
