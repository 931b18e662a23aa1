//! Two-phase tableau simplex.
//!
//! `min cᵀx s.t. A x ≤ b` is brought to standard form with `x = x⁺ − x⁻`,
//! one slack per row and one artificial per row with `b_i < 0`. Entering
//! columns follow Dantzig's rule until a run of degenerate pivots is seen,
//! after which Bland's rule takes over until progress resumes.

use nalgebra::DVector;

use super::{LpProblem, SolveOutcome, SolveStatus, SolverError, TOL_FEAS};

const EPS_PIVOT: f64 = 1e-9;
const EPS_COST: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 8;

struct Tableau {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: Option<&mut [f64]>) {
        let w = self.cols + 1;
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let factor = row[c];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= factor * pv;
                }
                row[c] = 0.0;
            }
        }
        if let Some(d) = reduced {
            let factor = d[c];
            if factor != 0.0 {
                for (dj, pv) in d.iter_mut().zip(prow.iter()) {
                    *dj -= factor * pv;
                }
                d[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `d = c − c_Bᵀ B⁻¹ A`, with the objective in slot `cols`.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = cost.to_vec();
        d.push(0.0);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.data[i * (self.cols + 1) + j];
                }
            }
        }
        d
    }

    fn optimize(
        &mut self,
        cost: &[f64],
        allowed: &[bool],
        iterations: &mut usize,
        limit: usize,
    ) -> Result<(Phase, Vec<f64>), SolverError> {
        let mut d = self.reduced_costs(cost);
        let mut streak = 0usize;
        loop {
            if *iterations >= limit {
                return Err(SolverError::IterationLimit {
                    limit,
                    what: "simplex",
                });
            }
            let bland = streak >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = -EPS_COST;
            for j in 0..self.cols {
                if !allowed[j] || d[j] >= -EPS_COST {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if d[j] < best {
                    best = d[j];
                    entering = Some(j);
                }
            }
            let Some(c) = entering else {
                return Ok((Phase::Optimal, d));
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a <= EPS_PIVOT {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best_ratio))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok((Phase::Unbounded, d));
            };
            streak = if ratio <= 1e-12 { streak + 1 } else { 0 };
            self.pivot(r, c, Some(&mut d));
            *iterations += 1;
        }
    }
}

/// Solves `min cᵀx s.t. A x ≤ b` over free `x`.
///
/// Returns `Infeasible` when the phase-1 optimum exceeds [`TOL_FEAS`], with a
/// Farkas witness `y ≥ 0, Aᵀy ≈ 0, bᵀy < 0` read off the phase-1 duals.
pub fn solve_lp(problem: &LpProblem) -> Result<SolveOutcome, SolverError> {
    let cons = problem.constraints();
    let k = problem.dim();
    let m = cons.len();
    let a = cons.normals();
    let b = cons.offsets();

    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    let cols = 2 * k + m + n_art;
    let w = cols + 1;
    let mut data = vec![0.0; m * w];
    let mut basis = vec![0usize; m];
    let mut sign = vec![1.0; m];
    let mut art_of_row = vec![usize::MAX; m];
    for (idx, &i) in negative.iter().enumerate() {
        sign[i] = -1.0;
        art_of_row[i] = 2 * k + m + idx;
    }
    for i in 0..m {
        let s = sign[i];
        let row = &mut data[i * w..(i + 1) * w];
        for j in 0..k {
            row[j] = s * a[(i, j)];
            row[k + j] = -s * a[(i, j)];
        }
        row[2 * k + i] = s;
        row[cols] = s * b[i];
        if s < 0.0 {
            row[art_of_row[i]] = 1.0;
            basis[i] = art_of_row[i];
        } else {
            basis[i] = 2 * k + i;
        }
    }
    let mut tab = Tableau {
        data,
        rows: m,
        cols,
        basis,
    };
    let limit = 50 * (m + cols) + 1000;
    let mut iterations = 0usize;

    if n_art > 0 {
        let mut cost1 = vec![0.0; cols];
        for c in cost1.iter_mut().skip(2 * k + m) {
            *c = 1.0;
        }
        let allowed = vec![true; cols];
        let (_, d) = tab.optimize(&cost1, &allowed, &mut iterations, limit)?;
        let infeasibility = -d[cols];
        if infeasibility > TOL_FEAS {
            // π_i = c_j − d_j on the column that started basic in row i.
            let y = DVector::from_fn(m, |i, _| {
                let (j, cj) = if sign[i] < 0.0 {
                    (art_of_row[i], 1.0)
                } else {
                    (2 * k + i, 0.0)
                };
                let pi = cj - d[j];
                (-sign[i] * pi).max(0.0)
            });
            return Ok(SolveOutcome::infeasible(y, iterations));
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= 2 * k + m {
                if let Some(j) = (0..2 * k + m).find(|&j| tab.at(i, j).abs() > EPS_PIVOT) {
                    tab.pivot(i, j, None);
                }
            }
        }
    }

    let mut cost2 = vec![0.0; cols];
    for j in 0..k {
        cost2[j] = problem.cost()[j];
        cost2[k + j] = -problem.cost()[j];
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < 2 * k + m).collect();
    let (phase, _) = tab.optimize(&cost2, &allowed, &mut iterations, limit)?;
    if let Phase::Unbounded = phase {
        return Ok(SolveOutcome::unbounded(iterations));
    }

    let mut x = DVector::zeros(k);
    for i in 0..m {
        let j = tab.basis[i];
        if j < k {
            x[j] += tab.rhs(i);
        } else if j < 2 * k {
            x[j - k] -= tab.rhs(i);
        }
    }
    let value = problem.cost().dot(&x);
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        active_rows: cons.binding_rows(&x, TOL_FEAS),
        point: Some(x),
        value: Some(value),
        multipliers: None,
        farkas: None,
        iterations,
    })
}
