//! Fourier–Motzkin projection.

use super::{HPolyhedron, PolytopeError};

/// Default ceiling on the number of rows produced by a single elimination.
pub const DEFAULT_ROW_CAP: usize = 20_000;

const ZERO_COEF: f64 = 1e-12;
const PAIR_TOL: f64 = 1e-10;

type Row = (Vec<f64>, f64);

/// Finds a pair of opposing rows (an encoded equality) that involves column
/// `col`, preferring the largest coefficient.
fn equality_pair(rows: &[Row], col: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (a, b)) in rows.iter().enumerate() {
        let c = a[col].abs();
        if c <= 1e-9 || best.is_some_and(|(_, bc)| c <= bc) {
            continue;
        }
        let opposite = rows.iter().any(|(a2, b2)| {
            (b + b2).abs() <= PAIR_TOL * (1.0 + b.abs())
                && a.iter().zip(a2).all(|(x, y)| (x + y).abs() <= PAIR_TOL)
        });
        if opposite {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}

fn is_opposite(r: &Row, s: &Row) -> bool {
    (r.1 + s.1).abs() <= PAIR_TOL * (1.0 + r.1.abs())
        && r.0.iter().zip(&s.0).all(|(x, y)| (x + y).abs() <= PAIR_TOL)
}

/// Eliminates column `col` and removes it from every row.
fn eliminate(rows: Vec<Row>, col: usize, cap: usize) -> Result<Vec<Row>, PolytopeError> {
    let mut out: Vec<Row> = Vec::new();
    if let Some(eq) = equality_pair(&rows, col) {
        // Substitution through the equality; exact projection.
        let pivot = rows[eq].clone();
        let c = pivot.0[col];
        for (i, row) in rows.into_iter().enumerate() {
            if i == eq || is_opposite(&row, &pivot) {
                continue;
            }
            let factor = row.0[col] / c;
            let mut a = row.0;
            let mut b = row.1;
            if factor != 0.0 {
                for (x, p) in a.iter_mut().zip(&pivot.0) {
                    *x -= factor * p;
                }
                b -= factor * pivot.1;
            }
            a.remove(col);
            out.push((a, b));
        }
        return Ok(out);
    }

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for row in rows {
        let c = row.0[col];
        if c > ZERO_COEF {
            pos.push(row);
        } else if c < -ZERO_COEF {
            neg.push(row);
        } else {
            let (mut a, b) = row;
            a.remove(col);
            out.push((a, b));
        }
    }
    let total = out.len() + pos.len() * neg.len();
    if total > cap {
        return Err(PolytopeError::ProjectionBlowup { rows: total, cap });
    }
    for (ap, bp) in &pos {
        let cp = ap[col];
        for (an, bn) in &neg {
            let cn = -an[col];
            let mut a: Vec<f64> = ap.iter().zip(an).map(|(x, y)| x / cp + y / cn).collect();
            a.remove(col);
            out.push((a, bp / cp + bn / cn));
        }
    }
    Ok(out)
}

/// Elimination cost of a column: substitutable columns first, then the
/// smallest `#positive × #negative` product.
fn elimination_score(rows: &[Row], col: usize) -> (usize, usize) {
    if equality_pair(rows, col).is_some() {
        return (0, 0);
    }
    let pos = rows.iter().filter(|r| r.0[col] > ZERO_COEF).count();
    let neg = rows.iter().filter(|r| r.0[col] < -ZERO_COEF).count();
    (1, pos * neg)
}

impl HPolyhedron {
    /// Orthogonal projection onto the coordinates `keep` (in that order).
    pub fn project(&self, keep: &[usize]) -> Result<HPolyhedron, PolytopeError> {
        self.project_with_cap(keep, DEFAULT_ROW_CAP)
    }

    /// [`project`](Self::project) with an explicit row-count guard.
    ///
    /// Coordinates outside `keep` are eliminated one at a time. A coordinate
    /// that appears in an encoded equality is substituted out; otherwise every
    /// positive row is paired with every negative row. Redundant rows are
    /// pruned by LP after each elimination.
    pub fn project_with_cap(
        &self,
        keep: &[usize],
        cap: usize,
    ) -> Result<HPolyhedron, PolytopeError> {
        if keep.is_empty() {
            return Err(PolytopeError::InvalidKeep("no coordinates kept".into()));
        }
        let mut seen = vec![false; self.dim];
        for &k in keep {
            if k >= self.dim {
                return Err(PolytopeError::InvalidKeep(format!(
                    "coordinate {k} outside dimension {}",
                    self.dim
                )));
            }
            if seen[k] {
                return Err(PolytopeError::InvalidKeep(format!(
                    "coordinate {k} repeated"
                )));
            }
            seen[k] = true;
        }
        if self.empty {
            return Ok(HPolyhedron::empty(keep.len()));
        }

        // Column order: kept coordinates first, then the ones to eliminate.
        let mut order: Vec<usize> = keep.to_vec();
        order.extend((0..self.dim).filter(|c| !seen[*c]));
        let mut rows: Vec<Row> = self
            .rows_vec()
            .into_iter()
            .map(|(a, b)| (order.iter().map(|&c| a[c]).collect(), b))
            .collect();
        let mut live = self.dim;

        while live > keep.len() {
            let col = (keep.len()..live)
                .min_by_key(|&c| (elimination_score(&rows, c), c))
                .expect("at least one column to eliminate");
            rows = eliminate(rows, col, cap)?;
            live -= 1;
            let current = HPolyhedron::from_rows_vec(live, &rows)?;
            if current.is_empty_marker() {
                return Ok(HPolyhedron::empty(keep.len()));
            }
            let pruned = current.remove_redundant()?;
            if pruned.is_empty_marker() {
                return Ok(HPolyhedron::empty(keep.len()));
            }
            rows = pruned.rows_vec();
        }
        HPolyhedron::from_rows_vec(keep.len(), &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn box_projects_to_interval() {
        let p = HPolyhedron::symmetric_box(&[1.0, 1.0]);
        let q = p.project(&[1]).unwrap();
        let expected = HPolyhedron::symmetric_box(&[1.0]);
        assert!(q.set_equal(&expected, 1e-9).unwrap());
    }

    #[test]
    fn simplex_projects_to_unit_interval() {
        let p = HPolyhedron::new(
            dmatrix![1.0, 1.0; -1.0, 0.0; 0.0, -1.0],
            dvector![1.0, 0.0, 0.0],
        )
        .unwrap();
        let q = p.project(&[0]).unwrap();
        let expected = HPolyhedron::from_bounds(&[0.0], &[1.0]).unwrap();
        assert!(q.set_equal(&expected, 1e-9).unwrap());
    }

    #[test]
    fn keep_order_is_respected() {
        let p = HPolyhedron::from_bounds(&[0.0, 2.0, -1.0], &[1.0, 3.0, 1.0]).unwrap();
        let q = p.project(&[1, 0]).unwrap();
        let expected = HPolyhedron::from_bounds(&[2.0, 0.0], &[3.0, 1.0]).unwrap();
        assert!(q.set_equal(&expected, 1e-9).unwrap());
    }

    #[test]
    fn invalid_keep_sets_are_rejected() {
        let p = HPolyhedron::symmetric_box(&[1.0, 1.0]);
        assert!(matches!(p.project(&[]), Err(PolytopeError::InvalidKeep(_))));
        assert!(matches!(
            p.project(&[2]),
            Err(PolytopeError::InvalidKeep(_))
        ));
        assert!(matches!(
            p.project(&[0, 0]),
            Err(PolytopeError::InvalidKeep(_))
        ));
    }

    #[test]
    fn empty_projects_to_empty() {
        let p = HPolyhedron::new(dmatrix![1.0, 0.0; -1.0, 0.0], dvector![0.0, -1.0]).unwrap();
        let q = p.project(&[1]).unwrap();
        assert!(q.is_empty().unwrap());
    }

    #[test]
    fn row_cap_guards_blowup() {
        // 8 rows with positive and 8 with negative x₂ coefficient.
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for k in 0..8 {
            let t = k as f64 * 0.1;
            normals.extend_from_slice(&[t, 1.0, -t, -1.0]);
            offsets.extend_from_slice(&[1.0, 1.0]);
        }
        let p = HPolyhedron::new(
            nalgebra::DMatrix::from_row_slice(16, 2, &normals),
            nalgebra::DVector::from_vec(offsets),
        )
        .unwrap();
        assert!(matches!(
            p.project_with_cap(&[0], 10),
            Err(PolytopeError::ProjectionBlowup { .. })
        ));
    }
}
