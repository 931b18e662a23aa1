//! Dense linear and quadratic programming.
//!
//! Two solvers live here: a two-phase tableau simplex for
//! `min cᵀx s.t. A x ≤ b` with free variables, and a primal active-set method
//! for strictly convex `min xᵀH x + 2 fᵀx s.t. A x ≤ b`. Both are sized for
//! problems with tens of variables and at most a few hundred rows; the
//! polytope routines call the LP solver thousands of times, the MPC loop calls
//! the QP solver once per step.

mod active_set;
mod simplex;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use active_set::{check_kkt, solve_qp, KktReport};
pub use simplex::solve_lp;

/// Feasibility tolerance of the phase-1 LP and of primal residuals.
pub const TOL_FEAS: f64 = 1e-8;
/// Stationarity and multiplier-sign tolerance of the QP solver.
pub const TOL_KKT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem data contains non-finite values")]
    NonFinite,
    #[error("hessian is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("hessian is not positive definite")]
    NotPositiveDefinite,
    #[error("singular KKT system in the active-set iteration")]
    SingularKkt,
    #[error("iteration limit of {limit} reached ({what})")]
    IterationLimit { limit: usize, what: &'static str },
    #[error("check_kkt needs an optimal outcome")]
    NotOptimal,
}

/// The inequality system `A x ≤ b` shared by LPs and QPs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraints {
    normals: DMatrix<f64>,
    offsets: DVector<f64>,
}

impl LinearConstraints {
    pub fn new(normals: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self, SolverError> {
        if normals.nrows() != offsets.len() {
            return Err(SolverError::Dimension(format!(
                "{} constraint rows but {} offsets",
                normals.nrows(),
                offsets.len()
            )));
        }
        if normals.iter().chain(offsets.iter()).any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        Ok(Self { normals, offsets })
    }

    /// No constraints over `dim` variables.
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            normals: DMatrix::zeros(0, dim),
            offsets: DVector::zeros(0),
        }
    }

    pub fn normals(&self) -> &DMatrix<f64> {
        &self.normals
    }

    pub fn offsets(&self) -> &DVector<f64> {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.normals.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.normals.ncols()
    }

    /// Slack `b − A x`; negative entries are violated rows.
    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.offsets - &self.normals * x
    }

    /// Largest violation `max(0, max_i (A x − b)_i)`.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        self.slack(x).iter().fold(0.0_f64, |acc, s| acc.max(-s))
    }

    /// Rows whose slack is at most `tol`.
    pub fn binding_rows(&self, x: &DVector<f64>, tol: f64) -> Vec<usize> {
        self.slack(x)
            .iter()
            .enumerate()
            .filter(|(_, s)| **s <= tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// `min cᵀx s.t. A x ≤ b`, `x` free.
#[derive(Clone, Debug)]
pub struct LpProblem {
    cost: DVector<f64>,
    constraints: LinearConstraints,
}

impl LpProblem {
    pub fn new(cost: DVector<f64>, constraints: LinearConstraints) -> Result<Self, SolverError> {
        if cost.len() != constraints.dim() {
            return Err(SolverError::Dimension(format!(
                "cost has length {} but constraints act on {} variables",
                cost.len(),
                constraints.dim()
            )));
        }
        if cost.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        Ok(Self { cost, constraints })
    }

    /// Pure feasibility problem (zero cost).
    pub fn feasibility(constraints: LinearConstraints) -> Self {
        Self {
            cost: DVector::zeros(constraints.dim()),
            constraints,
        }
    }

    pub fn cost(&self) -> &DVector<f64> {
        &self.cost
    }

    pub fn constraints(&self) -> &LinearConstraints {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.cost.len()
    }
}

/// `min xᵀH x + 2 fᵀx s.t. A x ≤ b` with `H ≻ 0`.
#[derive(Clone, Debug)]
pub struct QpProblem {
    hessian: DMatrix<f64>,
    linear: DVector<f64>,
    constraints: LinearConstraints,
}

impl QpProblem {
    /// Validates symmetry (within `1e-10` relative to the largest entry) and
    /// positive definiteness (Cholesky).
    pub fn new(
        hessian: DMatrix<f64>,
        linear: DVector<f64>,
        constraints: LinearConstraints,
    ) -> Result<Self, SolverError> {
        let n = linear.len();
        if hessian.nrows() != n || hessian.ncols() != n || constraints.dim() != n {
            return Err(SolverError::Dimension(format!(
                "hessian {}x{}, linear term {}, constraints over {} variables",
                hessian.nrows(),
                hessian.ncols(),
                n,
                constraints.dim()
            )));
        }
        if hessian.iter().chain(linear.iter()).any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        let scale = hessian.amax().max(1.0);
        let asym = (&hessian - hessian.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(SolverError::NotSymmetric(asym));
        }
        if n > 0 && hessian.clone().cholesky().is_none() {
            return Err(SolverError::NotPositiveDefinite);
        }
        Ok(Self {
            hessian,
            linear,
            constraints,
        })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn constraints(&self) -> &LinearConstraints {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// `xᵀH x + 2 fᵀx`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.hessian * x)) + 2.0 * self.linear.dot(x)
    }

    /// Gradient of [`objective`](Self::objective): `2 (H x + f)`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.hessian * x + &self.linear) * 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Present iff `status == Optimal`.
    pub point: Option<DVector<f64>>,
    /// Present iff `status == Optimal`.
    pub value: Option<f64>,
    /// Rows binding at `point` within [`TOL_FEAS`].
    pub active_rows: Vec<usize>,
    /// One multiplier per constraint row for optimal QPs, aligned with the
    /// objective gradient: `∇f(x) + Aᵀλ = 0`.
    pub multipliers: Option<DVector<f64>>,
    /// For infeasible outcomes, `y ≥ 0` with `Aᵀy ≈ 0` and `bᵀy < 0`.
    pub farkas: Option<DVector<f64>>,
    pub iterations: usize,
}

impl SolveOutcome {
    pub(crate) fn infeasible(farkas: DVector<f64>, iterations: usize) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            point: None,
            value: None,
            active_rows: Vec::new(),
            multipliers: None,
            farkas: Some(farkas),
            iterations,
        }
    }

    pub(crate) fn unbounded(iterations: usize) -> Self {
        Self {
            status: SolveStatus::Unbounded,
            point: None,
            value: None,
            active_rows: Vec::new(),
            multipliers: None,
            farkas: None,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
