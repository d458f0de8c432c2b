//! Robust optimal stopping on finite event trees.
//!
//! The crate computes classical Snell envelopes, the lower Snell envelope of a
//! payoff under a stable (rectangular) family of equivalent measures, and the
//! robust optimal stopping time. Every result can be cross-checked against
//! exhaustive evaluators in [`oracle`] that enumerate stopping times and
//! family members directly.
//!
//! All computations are generic over [`Scalar`]: `f64` for speed and
//! [`Exact`] rationals when identities must hold without rounding.

pub mod cli;
pub mod error;
pub mod lower;
pub mod measure;
pub mod models;
pub mod oracle;
pub mod scalar;
pub mod snell;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use lower::{lower_snell, upper_snell, LowerSnellResult};
pub use measure::{ExplicitFamily, Family, Measure, RectangularFamily};
pub use models::{binomial_kappa, random_instance, BinomialParams, ExplicitModel, InstanceBounds, Model, Payoff};
pub use scalar::{Exact, Scalar, TOLERANCE};
pub use snell::{min_optimal_time, snell_envelope};
pub use tree::{AdaptedProcess, EventTree, NodeId, NodeSpec, RandomVariable, StoppingTime};
