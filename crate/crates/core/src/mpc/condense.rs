use nalgebra::{DMatrix, DVector};

use super::{LiftedProblem, MpcError};
use crate::lp_qp::{LinearConstraints, QpProblem};

/// Stacked references `X_ref = (x₀, …, x_N)` and `U_ref = (u₀, …, u_{N−1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTrajectory {
    pub states: DVector<f64>,
    pub inputs: DVector<f64>,
}

impl ReferenceTrajectory {
    pub fn new(states: DVector<f64>, inputs: DVector<f64>) -> Self {
        Self { states, inputs }
    }

    pub fn zeros(lp: &LiftedProblem) -> Self {
        Self {
            states: DVector::zeros(lp.n() * (lp.horizon() + 1)),
            inputs: DVector::zeros(lp.m() * lp.horizon()),
        }
    }

    fn check(&self, lp: &LiftedProblem) -> Result<(), MpcError> {
        let xs = lp.n() * (lp.horizon() + 1);
        let us = lp.m() * lp.horizon();
        if self.states.len() != xs {
            return Err(MpcError::Dimension {
                what: "state reference",
                expected: xs,
                found: self.states.len(),
            });
        }
        if self.inputs.len() != us {
            return Err(MpcError::Dimension {
                what: "input reference",
                expected: us,
                found: self.inputs.len(),
            });
        }
        Ok(())
    }
}

/// A QP over the stacked input together with the constant the solver drops,
/// so that `qp.objective(U) + constant` is the true finite-horizon cost.
#[derive(Clone, Debug)]
pub struct CondensedQp {
    pub qp: QpProblem,
    pub constant: f64,
}

fn check_state(lp: &LiftedProblem, x: &DVector<f64>) -> Result<(), MpcError> {
    if x.len() != lp.n() {
        return Err(MpcError::Dimension {
            what: "state",
            expected: lp.n(),
            found: x.len(),
        });
    }
    Ok(())
}

/// All input sequences that keep the predicted states and inputs admissible
/// from `x`: `[F̃ℬ; G̃] U ≤ [f̃ − F̃𝒜x; g̃]`. Redundant rows are kept.
pub fn admissible_input_set(
    lp: &LiftedProblem,
    x: &DVector<f64>,
) -> Result<LinearConstraints, MpcError> {
    check_state(lp, x)?;
    let fb = lp.state_normals_input();
    let g = lp.input_normals();
    let (rs, rg, cols) = (fb.nrows(), g.nrows(), fb.ncols());
    let mut normals = DMatrix::zeros(rs + rg, cols);
    normals.view_mut((0, 0), (rs, cols)).copy_from(fb);
    normals.view_mut((rs, 0), (rg, cols)).copy_from(g);
    let mut offsets = DVector::zeros(rs + rg);
    offsets
        .rows_mut(0, rs)
        .copy_from(&(lp.state_offsets() - lp.state_normals_free() * x));
    offsets.rows_mut(rs, rg).copy_from(lp.input_offsets());
    Ok(LinearConstraints::new(normals, offsets)?)
}

fn condense(
    lp: &LiftedProblem,
    x: &DVector<f64>,
    reference: Option<&ReferenceTrajectory>,
) -> Result<CondensedQp, MpcError> {
    let mut error = lp.free_response() * x;
    if let Some(r) = reference {
        r.check(lp)?;
        error -= &r.states;
    }
    let weighted_error = lp.state_weight() * &error;
    let mut constant = error.dot(&weighted_error);
    let mut linear = lp.input_response_t_weight() * &error;
    if let Some(r) = reference {
        let weighted_input = lp.input_weight() * &r.inputs;
        linear -= &weighted_input;
        constant += r.inputs.dot(&weighted_input);
    }
    let constraints = admissible_input_set(lp, x)?;
    let qp = QpProblem::new(lp.hessian().clone(), linear, constraints)?;
    Ok(CondensedQp { qp, constant })
}

/// Regulation to the origin: `H = ℬᵀQ̃ℬ + R̃`, `f = ℬᵀQ̃𝒜x`,
/// constant `xᵀ𝒜ᵀQ̃𝒜x`.
pub fn build_regulation_qp(lp: &LiftedProblem, x: &DVector<f64>) -> Result<CondensedQp, MpcError> {
    check_state(lp, x)?;
    condense(lp, x, None)
}

/// Tracking: `f = ℬᵀQ̃(𝒜x − X_ref) − R̃U_ref`, constant
/// `(𝒜x − X_ref)ᵀQ̃(𝒜x − X_ref) + U_refᵀR̃U_ref`.
pub fn build_tracking_qp(
    lp: &LiftedProblem,
    x: &DVector<f64>,
    reference: &ReferenceTrajectory,
) -> Result<CondensedQp, MpcError> {
    check_state(lp, x)?;
    condense(lp, x, Some(reference))
}
