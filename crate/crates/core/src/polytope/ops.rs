use nalgebra::{DMatrix, DVector};

use super::{HPolyhedron, PolytopeError, TOL_REDUNDANT};
use crate::lp_qp::{solve_lp, LinearConstraints, LpProblem, SolveStatus};

/// Drops rows whose normals coincide with an earlier row, keeping the
/// tightest offset.
fn dedup_rows(rows: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows.len());
    'next: for (a, b) in rows {
        for (ka, kb) in out.iter_mut() {
            if ka.iter().zip(&a).all(|(x, y)| (x - y).abs() <= 1e-12) {
                if b < *kb {
                    *kb = b;
                }
                continue 'next;
            }
        }
        out.push((a, b));
    }
    out
}

impl HPolyhedron {
    /// Maximizes `direction · x` over the set. `Ok(None)` means unbounded;
    /// `Err` is reserved for solver failures. Callers must handle emptiness
    /// separately (an empty set yields `Some(-∞)`).
    pub fn support(&self, direction: &DVector<f64>) -> Result<Option<f64>, PolytopeError> {
        self.check_dim(direction.len())?;
        if self.empty {
            return Ok(Some(f64::NEG_INFINITY));
        }
        let lp = LpProblem::new(-direction, self.constraints())?;
        let out = solve_lp(&lp)?;
        Ok(match out.status {
            SolveStatus::Optimal => Some(-out.value.expect("optimal value")),
            SolveStatus::Unbounded => None,
            SolveStatus::Infeasible => Some(f64::NEG_INFINITY),
        })
    }

    /// True iff no point satisfies all rows (phase-1 LP).
    pub fn is_empty(&self) -> Result<bool, PolytopeError> {
        if self.empty {
            return Ok(true);
        }
        if self.num_rows() == 0 {
            return Ok(false);
        }
        let out = solve_lp(&LpProblem::feasibility(self.constraints()))?;
        Ok(out.status == SolveStatus::Infeasible)
    }

    /// `self ⊆ other`, checked with one LP per row of `other`.
    pub fn is_subset(&self, other: &HPolyhedron, tol: f64) -> Result<bool, PolytopeError> {
        self.check_dim(other.dim)?;
        if self.empty {
            return Ok(true);
        }
        if other.empty {
            return self.is_empty();
        }
        let cons = self.constraints();
        for i in 0..other.num_rows() {
            let g: DVector<f64> = other.normals.row(i).transpose();
            let out = solve_lp(&LpProblem::new(-g, cons.clone())?)?;
            match out.status {
                SolveStatus::Infeasible => return Ok(true),
                SolveStatus::Unbounded => return Ok(false),
                SolveStatus::Optimal => {
                    if -out.value.expect("optimal value") > other.offsets[i] + tol {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Mutual containment within `tol`.
    pub fn set_equal(&self, other: &HPolyhedron, tol: f64) -> Result<bool, PolytopeError> {
        Ok(self.is_subset(other, tol)? && other.is_subset(self, tol)?)
    }

    /// Removes every row implied by the remaining ones.
    ///
    /// Row `i` is dropped when `max normalᵢ · x` over the other surviving rows
    /// (with row `i` relaxed by one unit, which keeps the LP bounded) stays
    /// within `offsetᵢ + TOL_REDUNDANT`. An empty input returns the empty
    /// marker.
    pub fn remove_redundant(&self) -> Result<HPolyhedron, PolytopeError> {
        if self.empty {
            return Ok(self.clone());
        }
        if self.is_empty()? {
            return Ok(HPolyhedron::empty(self.dim));
        }
        let rows = dedup_rows(self.rows_vec());
        let mut keep = vec![true; rows.len()];
        for i in 0..rows.len() {
            let idx: Vec<usize> = (0..rows.len()).filter(|&j| keep[j]).collect();
            if idx.len() <= 1 {
                break;
            }
            let normals = DMatrix::from_fn(idx.len(), self.dim, |r, c| rows[idx[r]].0[c]);
            let offsets = DVector::from_fn(idx.len(), |r, _| {
                let j = idx[r];
                if j == i {
                    rows[j].1 + 1.0
                } else {
                    rows[j].1
                }
            });
            let dir = DVector::from_column_slice(&rows[i].0);
            let lp = LpProblem::new(-dir, LinearConstraints::new(normals, offsets)?)?;
            let out = solve_lp(&lp)?;
            if out.status == SolveStatus::Optimal
                && -out.value.expect("optimal value") <= rows[i].1 + TOL_REDUNDANT
            {
                keep[i] = false;
            }
        }
        let kept: Vec<(Vec<f64>, f64)> = rows
            .into_iter()
            .zip(keep)
            .filter_map(|(r, k)| k.then_some(r))
            .collect();
        HPolyhedron::from_rows_vec(self.dim, &kept)
    }

    /// `self ∩ other`, redundancy-pruned.
    pub fn intersect(&self, other: &HPolyhedron) -> Result<HPolyhedron, PolytopeError> {
        self.check_dim(other.dim)?;
        if self.empty || other.empty {
            return Ok(HPolyhedron::empty(self.dim));
        }
        let mut rows = self.rows_vec();
        rows.extend(other.rows_vec());
        HPolyhedron::from_rows_vec(self.dim, &rows)?.remove_redundant()
    }

    /// `{x | M x ∈ self}`; `M` has `self.dim()` rows.
    pub fn affine_preimage(&self, m: &DMatrix<f64>) -> Result<HPolyhedron, PolytopeError> {
        self.check_dim(m.nrows())?;
        if self.empty {
            return Ok(HPolyhedron::empty(m.ncols()));
        }
        HPolyhedron::new_or_empty(&self.normals * m, self.offsets.clone())
    }

    /// `{M u | u ∈ self}`; `M` has `self.dim()` columns.
    ///
    /// Computed in the lifted space `(y, u)` with the equality `y = M u` and
    /// projected onto `y`.
    pub fn affine_image(&self, m: &DMatrix<f64>) -> Result<HPolyhedron, PolytopeError> {
        self.check_dim(m.ncols())?;
        let p = m.nrows();
        let k = self.dim;
        if self.empty {
            return Ok(HPolyhedron::empty(p));
        }
        let r = self.num_rows();
        let mut normals = DMatrix::zeros(r + 2 * p, p + k);
        let mut offsets = DVector::zeros(r + 2 * p);
        normals.view_mut((0, p), (r, k)).copy_from(&self.normals);
        offsets.rows_mut(0, r).copy_from(&self.offsets);
        for i in 0..p {
            normals[(r + 2 * i, i)] = 1.0;
            normals[(r + 2 * i + 1, i)] = -1.0;
            for j in 0..k {
                normals[(r + 2 * i, p + j)] = -m[(i, j)];
                normals[(r + 2 * i + 1, p + j)] = m[(i, j)];
            }
        }
        let lifted = HPolyhedron::new_or_empty(normals, offsets)?;
        let keep: Vec<usize> = (0..p).collect();
        lifted.project(&keep)
    }

    /// `self ⊕ other = {p + q | p ∈ self, q ∈ other}`.
    ///
    /// Built as `{(x, q) | F_P (x − q) ≤ f_P, F_Q q ≤ f_Q}` with `q`
    /// eliminated.
    pub fn minkowski_sum(&self, other: &HPolyhedron) -> Result<HPolyhedron, PolytopeError> {
        self.check_dim(other.dim)?;
        let d = self.dim;
        if self.empty || other.empty {
            return Ok(HPolyhedron::empty(d));
        }
        let (rp, rq) = (self.num_rows(), other.num_rows());
        let mut normals = DMatrix::zeros(rp + rq, 2 * d);
        let mut offsets = DVector::zeros(rp + rq);
        normals.view_mut((0, 0), (rp, d)).copy_from(&self.normals);
        normals
            .view_mut((0, d), (rp, d))
            .copy_from(&(-&self.normals));
        offsets.rows_mut(0, rp).copy_from(&self.offsets);
        normals.view_mut((rp, d), (rq, d)).copy_from(&other.normals);
        offsets.rows_mut(rp, rq).copy_from(&other.offsets);
        let lifted = HPolyhedron::new_or_empty(normals, offsets)?;
        let keep: Vec<usize> = (0..d).collect();
        lifted.project(&keep)
    }
}
