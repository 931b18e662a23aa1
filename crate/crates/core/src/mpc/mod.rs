//! Linear MPC by condensing: lifted prediction matrices, QP assembly,
//! receding-horizon steps and closed-loop simulation.

mod closed_loop;
mod condense;
mod config;
mod lifted;
mod system;

pub use closed_loop::{
    closed_loop_simulate, mpc_step, ReferenceSchedule, SimTrace, StepResult, StepStatus,
};
pub use condense::{
    admissible_input_set, build_regulation_qp, build_tracking_qp, CondensedQp, ReferenceTrajectory,
};
pub use config::MpcConfig;
pub use lifted::{build_lifted, LiftedProblem};
pub use system::DiscreteLtiSystem;

use thiserror::Error;

use crate::lp_qp::SolverError;
use crate::polytope::PolytopeError;
use crate::riccati::RiccatiError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpcError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
}
