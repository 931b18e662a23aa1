//! Infinite-horizon LQR: the discrete algebraic Riccati equation and its gain.
//!
//! With the control law `u = −K x`, the DARE in gain form reads
//!
//! ```text
//! P = Q + KᵀRK + (A − BK)ᵀ P (A − BK),   K = (BᵀPB + R)⁻¹ BᵀPA
//! ```
//!
//! and is solved by fixed-point iteration from `P₀ = Q`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{asymmetry, min_symmetric_eigenvalue, spectral_radius};
use crate::mpc::DiscreteLtiSystem;

/// Stop when `‖P_{k+1} − P_k‖_F` falls below this.
pub const DARE_TOL: f64 = 1e-12;
pub const DARE_MAX_ITER: usize = 100_000;
/// Acceptable gain-form residual at the returned `Qf`.
pub const DARE_RESIDUAL_TOL: f64 = 1e-9;

const SYM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiccatiError {
    #[error("{name} must be {expected}, got {rows}x{cols}")]
    Dimension {
        name: &'static str,
        expected: String,
        rows: usize,
        cols: usize,
    },
    #[error("{0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("Q must be positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("R must be positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("BᵀPB + R is singular")]
    Singular,
    #[error(
        "Riccati iteration did not converge in {iterations} iterations (last step {last_step:e})"
    )]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("Riccati iteration diverged; (A, B) is likely not stabilizable")]
    Diverged,
    #[error("closed loop A − BK is not Schur stable (spectral radius {0})")]
    NotStabilizing(f64),
    #[error("Riccati residual {0:e} above tolerance")]
    Residual(f64),
}

/// Stage weights `Q ⪰ 0`, `R ≻ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostWeights {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl CostWeights {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self, RiccatiError> {
        for (name, m) in [("Q", &q), ("R", &r)] {
            if !m.is_square() || m.nrows() == 0 {
                return Err(RiccatiError::Dimension {
                    name,
                    expected: "square and non-empty".into(),
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.iter().any(|v| !v.is_finite()) || asymmetry(m) > SYM_TOL * m.amax().max(1.0) {
                return Err(RiccatiError::NotSymmetric(name));
            }
        }
        let qmin = min_symmetric_eigenvalue(&q);
        if qmin < -SYM_TOL * q.amax().max(1.0) {
            return Err(RiccatiError::NotPositiveSemidefinite(qmin));
        }
        let rmin = min_symmetric_eigenvalue(&r);
        if rmin <= 0.0 || r.clone().cholesky().is_none() {
            return Err(RiccatiError::NotPositiveDefinite(rmin));
        }
        Ok(Self { q, r })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    fn check_system(&self, sys: &DiscreteLtiSystem) -> Result<(), RiccatiError> {
        if self.q.nrows() != sys.n() {
            return Err(RiccatiError::Dimension {
                name: "Q",
                expected: format!("{0}x{0}", sys.n()),
                rows: self.q.nrows(),
                cols: self.q.ncols(),
            });
        }
        if self.r.nrows() != sys.m() {
            return Err(RiccatiError::Dimension {
                name: "R",
                expected: format!("{0}x{0}", sys.m()),
                rows: self.r.nrows(),
                cols: self.r.ncols(),
            });
        }
        Ok(())
    }
}

/// Terminal cost and local controller for a stabilizing MPC design.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalIngredients {
    /// Stabilizing DARE solution.
    pub qf: DMatrix<f64>,
    /// Gain of the law `u = −K x`.
    pub k: DMatrix<f64>,
    /// Max-abs entry of `Q + KᵀRK − Qf + (A−BK)ᵀQf(A−BK)`.
    pub residual: f64,
    pub closed_loop_spectral_radius: f64,
    pub iterations: usize,
}

impl TerminalIngredients {
    /// `A − B K`.
    pub fn closed_loop(&self, sys: &DiscreteLtiSystem) -> DMatrix<f64> {
        sys.a() - sys.b() * &self.k
    }
}

/// `K = (BᵀPB + R)⁻¹ BᵀPA`.
pub fn lqr_gain(
    sys: &DiscreteLtiSystem,
    p: &DMatrix<f64>,
    weights: &CostWeights,
) -> Result<DMatrix<f64>, RiccatiError> {
    let bt = sys.b().transpose();
    let btp = &bt * p;
    let s = &btp * sys.b() + weights.r();
    let rhs = &btp * sys.a();
    s.lu().solve(&rhs).ok_or(RiccatiError::Singular)
}

/// One Riccati update `P ↦ Q + KᵀRK + (A − BK)ᵀ P (A − BK)`, symmetrized.
pub fn riccati_update(
    sys: &DiscreteLtiSystem,
    weights: &CostWeights,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>, RiccatiError> {
    let k = lqr_gain(sys, p, weights)?;
    let acl = sys.a() - sys.b() * &k;
    let next = weights.q() + k.transpose() * weights.r() * &k + acl.transpose() * p * &acl;
    Ok((&next + next.transpose()) * 0.5)
}

/// Max-abs entry of the gain-form DARE residual at `(qf, k)`.
pub fn riccati_residual(
    sys: &DiscreteLtiSystem,
    weights: &CostWeights,
    qf: &DMatrix<f64>,
    k: &DMatrix<f64>,
) -> f64 {
    let acl = sys.a() - sys.b() * k;
    let res = weights.q() + k.transpose() * weights.r() * k - qf + acl.transpose() * qf * &acl;
    res.amax()
}

/// Solves the DARE by fixed-point iteration from `P₀ = Q` and returns the
/// terminal weight, the LQR gain and diagnostics.
pub fn solve_dare(
    sys: &DiscreteLtiSystem,
    weights: &CostWeights,
) -> Result<TerminalIngredients, RiccatiError> {
    weights.check_system(sys)?;
    let mut p = weights.q().clone();
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    while iterations < DARE_MAX_ITER {
        let next = riccati_update(sys, weights, &p)?;
        iterations += 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(RiccatiError::Diverged);
        }
        last_step = (&next - &p).norm();
        p = next;
        if last_step <= DARE_TOL {
            break;
        }
    }
    if last_step > DARE_TOL {
        return Err(RiccatiError::NoConvergence {
            iterations,
            last_step,
        });
    }
    let k = lqr_gain(sys, &p, weights)?;
    let residual = riccati_residual(sys, weights, &p, &k);
    let rho = spectral_radius(&(sys.a() - sys.b() * &k));
    if rho >= 1.0 {
        return Err(RiccatiError::NotStabilizing(rho));
    }
    if residual > DARE_RESIDUAL_TOL * p.amax().max(1.0) {
        return Err(RiccatiError::Residual(residual));
    }
    Ok(TerminalIngredients {
        qf: p,
        k,
        residual,
        closed_loop_spectral_radius: rho,
        iterations,
    })
}
