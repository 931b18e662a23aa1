//! Maximal stabilizing set of the origin and the set of feasible initial
//! states of a horizon-N problem.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::mpc::{DiscreteLtiSystem, LiftedProblem};
use crate::polytope::{HPolyhedron, PolytopeError, DEFAULT_ROW_CAP, TOL_SET};

pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantSetError {
    #[error("{0} must contain the origin")]
    OriginNotContained(&'static str),
    #[error("{what} has dimension {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("candidate set is not contained in the state constraints")]
    NotInsideStateSet,
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Clone, Debug)]
pub struct StabilizingSetResult {
    /// Last iterate `𝒦_i`.
    pub set: HPolyhedron,
    /// Number of set updates performed before the fixed point was detected
    /// (or `max_iter` if it never was).
    pub iterations: usize,
    pub converged: bool,
    /// Row count of every iterate, starting with `𝒦₀ = {0}`.
    pub history_sizes: Vec<usize>,
}

fn check_sets(
    sys: &DiscreteLtiSystem,
    x_set: &HPolyhedron,
    u_set: &HPolyhedron,
) -> Result<(), InvariantSetError> {
    for (what, set, dim) in [("state set", x_set, sys.n()), ("input set", u_set, sys.m())] {
        if set.dim() != dim {
            return Err(InvariantSetError::Dimension {
                what,
                expected: dim,
                found: set.dim(),
            });
        }
        if !set.contains(&DVector::zeros(dim), TOL_SET)? {
            return Err(InvariantSetError::OriginNotContained(what));
        }
    }
    Ok(())
}

/// States that some admissible input maps into `target`:
/// `(target ⊕ (−B∘𝒰)) ∘ A`. No state constraint is applied.
pub fn one_step_controllable(
    sys: &DiscreteLtiSystem,
    target: &HPolyhedron,
    u_set: &HPolyhedron,
) -> Result<HPolyhedron, InvariantSetError> {
    let neg_b: DMatrix<f64> = -sys.b();
    let reach = target.minkowski_sum(&u_set.affine_image(&neg_b)?)?;
    Ok(reach.affine_preimage(sys.a())?.remove_redundant()?)
}

/// Iterates `𝒦₀ = {0}`, `𝒦_{i+1} = (𝒦_i ⊕ (−B∘𝒰)) ∘ A ∩ 𝒳` until two
/// consecutive iterates agree within [`TOL_SET`] or `max_iter` updates have
/// been made.
pub fn max_stabilizing_set(
    sys: &DiscreteLtiSystem,
    x_set: &HPolyhedron,
    u_set: &HPolyhedron,
    max_iter: usize,
) -> Result<StabilizingSetResult, InvariantSetError> {
    max_stabilizing_set_with(sys, x_set, u_set, max_iter, |_, _| {})
}

/// [`max_stabilizing_set`] with a callback receiving every new iterate and
/// its index.
pub fn max_stabilizing_set_with(
    sys: &DiscreteLtiSystem,
    x_set: &HPolyhedron,
    u_set: &HPolyhedron,
    max_iter: usize,
    mut observe: impl FnMut(usize, &HPolyhedron),
) -> Result<StabilizingSetResult, InvariantSetError> {
    check_sets(sys, x_set, u_set)?;
    let mut current = HPolyhedron::origin(sys.n());
    let mut history_sizes = vec![current.num_rows()];
    observe(0, &current);
    for i in 0..max_iter {
        let next = one_step_controllable(sys, &current, u_set)?.intersect(x_set)?;
        if next.set_equal(&current, TOL_SET)? {
            return Ok(StabilizingSetResult {
                set: current,
                iterations: i,
                converged: true,
                history_sizes,
            });
        }
        history_sizes.push(next.num_rows());
        observe(i + 1, &next);
        current = next;
    }
    Ok(StabilizingSetResult {
        set: current,
        iterations: max_iter,
        converged: false,
        history_sizes,
    })
}

/// Whether every state of `s` has an admissible input that keeps the
/// successor in `s`. `s` must lie inside `x_set`.
pub fn certify_control_invariant(
    sys: &DiscreteLtiSystem,
    s: &HPolyhedron,
    x_set: &HPolyhedron,
    u_set: &HPolyhedron,
) -> Result<bool, InvariantSetError> {
    check_sets(sys, x_set, u_set)?;
    if s.dim() != sys.n() {
        return Err(InvariantSetError::Dimension {
            what: "candidate set",
            expected: sys.n(),
            found: s.dim(),
        });
    }
    if !s.is_subset(x_set, TOL_SET)? {
        return Err(InvariantSetError::NotInsideStateSet);
    }
    let pre = one_step_controllable(sys, s, u_set)?;
    Ok(s.is_subset(&pre, TOL_SET)?)
}

/// The set `𝒳_N` of initial states for which the horizon problem has a
/// feasible input sequence.
pub fn feasible_initial_set(lifted: &LiftedProblem) -> Result<HPolyhedron, InvariantSetError> {
    feasible_initial_set_with_cap(lifted, DEFAULT_ROW_CAP)
}

/// [`feasible_initial_set`] with an explicit guard on intermediate row counts.
pub fn feasible_initial_set_with_cap(
    lifted: &LiftedProblem,
    cap: usize,
) -> Result<HPolyhedron, InvariantSetError> {
    let n = lifted.n();
    let fa = lifted.state_normals_free();
    let fb = lifted.state_normals_input();
    let g = lifted.input_normals();
    let nu = fb.ncols();
    let (rs, rg) = (fa.nrows(), g.nrows());
    let mut normals = DMatrix::zeros(rs + rg, n + nu);
    normals.view_mut((0, 0), (rs, n)).copy_from(fa);
    normals.view_mut((0, n), (rs, nu)).copy_from(fb);
    normals.view_mut((rs, n), (rg, nu)).copy_from(g);
    let mut offsets = DVector::zeros(rs + rg);
    offsets.rows_mut(0, rs).copy_from(lifted.state_offsets());
    offsets.rows_mut(rs, rg).copy_from(lifted.input_offsets());
    let joint = HPolyhedron::new_or_empty(normals, offsets)?.remove_redundant()?;
    let keep: Vec<usize> = (0..n).collect();
    Ok(joint.project_with_cap(&keep, cap)?)
}
