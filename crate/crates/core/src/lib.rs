//! Optimal randomized decision policies over finite populations under two
//! views of fairness: accuracy maximization subject to statistical fairness
//! constraints, and concave social-welfare maximization over group
//! utilities.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod constraints;
pub mod error;
pub mod experiments;
pub mod model;
pub mod objectives;
pub mod solvers;

#[cfg(feature = "serde")]
pub mod serde_float;

pub use constraints::{ConstraintKind, FairnessConstraint};
pub use error::{Error, Result};
pub use model::{induce_joint, Alphabets, JointDistribution, Policy, PopulationDistribution};
pub use objectives::{PayoffRole, PayoffTable, PhiFunction};
pub use solvers::{DesignerSpec, SolveResult, SolveStatus, SolverConfig};
