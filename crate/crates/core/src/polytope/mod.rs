//! H-representation polyhedra `{x | F x ≤ f}` and their set algebra.
//!
//! Every row is scaled to a unit-norm normal on construction, so all
//! tolerances below are Euclidean distances. Equalities are stored as pairs of
//! opposing inequalities; lower-dimensional sets such as a segment in the plane
//! therefore need no special representation.
//!
//! The empty set has an explicit marker ([`HPolyhedron::empty`]) with no rows;
//! a system whose rows are merely contradictory is *also* empty, which
//! [`HPolyhedron::is_empty`] detects with a phase-1 LP.

mod io;
mod ops;
mod projection;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lp_qp::{LinearConstraints, SolverError};

pub use projection::DEFAULT_ROW_CAP;

/// Containment tolerance used by set comparisons.
pub const TOL_SET: f64 = 1e-6;
/// Slack below which a row is considered implied by the others.
pub const TOL_REDUNDANT: f64 = 1e-9;
/// Normals shorter than this are treated as zero rows.
const ZERO_ROW: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row {row} has a zero normal and a negative offset; use HPolyhedron::empty for the empty set")]
    InfeasibleZeroRow { row: usize },
    #[error("polyhedron data contains non-finite values")]
    NonFinite,
    #[error("invalid projection coordinates: {0}")]
    InvalidKeep(String),
    #[error("projection produced {rows} rows, above the cap of {cap}")]
    ProjectionBlowup { rows: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// The set `{x ∈ ℝ^dim | normals · x ≤ offsets}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolyhedron {
    normals: DMatrix<f64>,
    offsets: DVector<f64>,
    dim: usize,
    empty: bool,
}

impl HPolyhedron {
    /// Builds a polyhedron, normalizing every row and dropping zero rows with
    /// nonnegative offsets. A zero row with a negative offset is rejected.
    pub fn new(normals: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self, PolytopeError> {
        Self::build(normals, offsets, true)
    }

    /// Like [`new`](Self::new), but an infeasible zero row yields the empty
    /// marker instead of an error. Used by the set operations, where such rows
    /// arise naturally.
    pub(crate) fn new_or_empty(
        normals: DMatrix<f64>,
        offsets: DVector<f64>,
    ) -> Result<Self, PolytopeError> {
        Self::build(normals, offsets, false)
    }

    fn build(
        normals: DMatrix<f64>,
        offsets: DVector<f64>,
        strict: bool,
    ) -> Result<Self, PolytopeError> {
        let dim = normals.ncols();
        if normals.nrows() != offsets.len() {
            return Err(PolytopeError::DimensionMismatch {
                expected: normals.nrows(),
                found: offsets.len(),
            });
        }
        if normals.iter().chain(offsets.iter()).any(|v| !v.is_finite()) {
            return Err(PolytopeError::NonFinite);
        }
        let mut rows: Vec<usize> = Vec::with_capacity(normals.nrows());
        let mut scale: Vec<f64> = Vec::with_capacity(normals.nrows());
        for i in 0..normals.nrows() {
            let norm = normals.row(i).norm();
            if norm <= ZERO_ROW {
                if offsets[i] < -ZERO_ROW {
                    if strict {
                        return Err(PolytopeError::InfeasibleZeroRow { row: i });
                    }
                    return Ok(Self::empty(dim));
                }
                continue;
            }
            rows.push(i);
            // Already-normalized rows are left bit-for-bit unchanged.
            scale.push(if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
                1.0
            } else {
                norm
            });
        }
        let out_normals =
            DMatrix::from_fn(rows.len(), dim, |r, j| normals[(rows[r], j)] / scale[r]);
        let out_offsets = DVector::from_fn(rows.len(), |r, _| offsets[rows[r]] / scale[r]);
        Ok(Self {
            normals: out_normals,
            offsets: out_offsets,
            dim,
            empty: false,
        })
    }

    /// The explicit empty set in `ℝ^dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            normals: DMatrix::zeros(0, dim),
            offsets: DVector::zeros(0),
            dim,
            empty: true,
        }
    }

    /// All of `ℝ^dim`.
    pub fn universe(dim: usize) -> Self {
        Self {
            normals: DMatrix::zeros(0, dim),
            offsets: DVector::zeros(0),
            dim,
            empty: false,
        }
    }

    /// `{0}`, as `±e_i · x ≤ 0` for every coordinate.
    pub fn origin(dim: usize) -> Self {
        Self::from_bounds(&vec![0.0; dim], &vec![0.0; dim]).expect("zero bounds are consistent")
    }

    /// The box `lower ≤ x ≤ upper`, rows ordered `x_i ≤ u_i, −x_i ≤ −l_i`.
    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self, PolytopeError> {
        if lower.len() != upper.len() {
            return Err(PolytopeError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let dim = lower.len();
        let mut normals = DMatrix::zeros(2 * dim, dim);
        let mut offsets = DVector::zeros(2 * dim);
        for i in 0..dim {
            normals[(2 * i, i)] = 1.0;
            offsets[2 * i] = upper[i];
            normals[(2 * i + 1, i)] = -1.0;
            offsets[2 * i + 1] = -lower[i];
        }
        Self::new(normals, offsets)
    }

    /// The box `|x_i| ≤ bound_i`.
    pub fn symmetric_box(bounds: &[f64]) -> Self {
        let lower: Vec<f64> = bounds.iter().map(|b| -b).collect();
        Self::from_bounds(&lower, bounds).expect("matching lengths")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &DMatrix<f64> {
        &self.normals
    }

    pub fn offsets(&self) -> &DVector<f64> {
        &self.offsets
    }

    pub fn num_rows(&self) -> usize {
        self.normals.nrows()
    }

    /// True for the explicit marker only; see [`is_empty`](Self::is_empty)
    /// for the semantic test.
    pub fn is_empty_marker(&self) -> bool {
        self.empty
    }

    /// The rows as an LP constraint system.
    pub fn constraints(&self) -> LinearConstraints {
        LinearConstraints::new(self.normals.clone(), self.offsets.clone())
            .expect("polyhedron rows are consistent")
    }

    /// Point membership: every row satisfies `normalᵀx ≤ offset + tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, PolytopeError> {
        self.check_dim(x.len())?;
        if self.empty {
            return Ok(false);
        }
        Ok((&self.normals * x - &self.offsets)
            .iter()
            .all(|v| *v <= tol))
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<(), PolytopeError> {
        if found != self.dim {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    pub(crate) fn rows_vec(&self) -> Vec<(Vec<f64>, f64)> {
        (0..self.num_rows())
            .map(|i| {
                (
                    self.normals.row(i).iter().copied().collect(),
                    self.offsets[i],
                )
            })
            .collect()
    }

    pub(crate) fn from_rows_vec(
        dim: usize,
        rows: &[(Vec<f64>, f64)],
    ) -> Result<Self, PolytopeError> {
        let normals = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i].0[j]);
        let offsets = DVector::from_fn(rows.len(), |i, _| rows[i].1);
        Self::new_or_empty(normals, offsets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn rows_are_normalized_and_zero_rows_dropped() {
        let p = HPolyhedron::new(dmatrix![3.0, 4.0; 0.0, 0.0], dvector![10.0, 1.0]).unwrap();
        assert_eq!(p.num_rows(), 1);
        assert!((p.normals().row(0).norm() - 1.0).abs() < 1e-15);
        assert!((p.offsets()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_zero_row_is_rejected() {
        let err = HPolyhedron::new(dmatrix![1.0; 0.0], dvector![1.0, -1.0]).unwrap_err();
        assert_eq!(err, PolytopeError::InfeasibleZeroRow { row: 1 });
        let lenient = HPolyhedron::new_or_empty(dmatrix![1.0; 0.0], dvector![1.0, -1.0]).unwrap();
        assert!(lenient.is_empty_marker());
    }

    #[test]
    fn box_membership() {
        let x_set = HPolyhedron::symmetric_box(&[10.0, 10.0]);
        assert!(x_set.contains(&dvector![0.0, 0.0], 1e-9).unwrap());
        assert!(!x_set.contains(&dvector![10.1, 0.0], 1e-9).unwrap());
        assert!(x_set.contains(&dvector![10.0, -10.0], 0.0).unwrap());
        assert!(matches!(
            x_set.contains(&dvector![0.0], 1e-9),
            Err(PolytopeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_marker_contains_nothing() {
        let e = HPolyhedron::empty(2);
        assert!(!e.contains(&dvector![0.0, 0.0], 1.0).unwrap());
    }
}
