//! Simulation relations and assume-guarantee contracts for continuous-time
//! linear systems in driving-variable form.
//!
//! The crate is layered bottom-up:
//!
//! * [`subspace`] holds the rank-revealing subspace algebra every check reduces to.
//! * [`models`] defines driven systems, constrained systems, guarantees and contracts.
//! * [`interconnect`] builds the block-matrix interconnections.
//! * [`verify`] computes consistent subspaces and largest simulation relations.
//! * [`contracts`] decides compatibility, implementation, refinement and composition.
//! * [`oracle`] cross-checks verdicts with exact rational arithmetic and simulated trajectories.

pub mod contracts;
pub mod error;
pub mod interconnect;
pub mod models;
pub mod oracle;
pub mod subspace;
pub mod verify;

pub use error::{Error, Result};
pub use models::{AnySystem, ConstrainedSystem, Contract, DrivenSystem, GuaranteeSystem};
pub use subspace::{Matrix, Subspace, Tolerance};
pub use verify::SimulationReport;
