//! Primal active-set method for strictly convex QPs.

use nalgebra::{DMatrix, DVector};

use super::{
    solve_lp, LpProblem, QpProblem, SolveOutcome, SolveStatus, SolverError, TOL_FEAS, TOL_KKT,
};

/// Residuals of the first-order optimality conditions at a solver outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct KktReport {
    /// `‖∇f(x) + Aᵀλ‖∞`.
    pub stationarity: f64,
    /// `max(0, max_i (A x − b)_i)`.
    pub primal_violation: f64,
    /// Smallest multiplier over the binding rows, `None` when nothing binds.
    pub min_multiplier: Option<f64>,
}

/// Picks a linearly independent subset of `candidates` (in order), at most
/// `dim` rows, by Gram–Schmidt on the row normals.
fn independent_rows(a: &DMatrix<f64>, candidates: &[usize]) -> Vec<usize> {
    let dim = a.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for &i in candidates {
        if chosen.len() == dim {
            break;
        }
        let mut v: DVector<f64> = a.row(i).transpose();
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 * norm0 {
            basis.push(v / norm);
            chosen.push(i);
        }
    }
    chosen
}

/// Solves the equality-constrained step problem
/// `[2H  Aᵂᵀ; Aᵂ 0] [p; λ] = [−g; 0]`.
fn kkt_step(
    h2: &DMatrix<f64>,
    a: &DMatrix<f64>,
    working: &[usize],
    grad: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>), SolverError> {
    let n = h2.nrows();
    let w = working.len();
    let mut kkt = DMatrix::zeros(n + w, n + w);
    kkt.view_mut((0, 0), (n, n)).copy_from(h2);
    for (r, &i) in working.iter().enumerate() {
        for j in 0..n {
            kkt[(n + r, j)] = a[(i, j)];
            kkt[(j, n + r)] = a[(i, j)];
        }
    }
    let mut rhs = DVector::zeros(n + w);
    rhs.rows_mut(0, n).copy_from(&(-grad));
    let sol = kkt.lu().solve(&rhs).ok_or(SolverError::SingularKkt)?;
    Ok((sol.rows(0, n).into_owned(), sol.rows(n, w).into_owned()))
}

/// Solves `min xᵀH x + 2 fᵀx s.t. A x ≤ b`.
///
/// The iteration starts from `hint` when it is feasible, otherwise from the
/// unconstrained minimizer when that is feasible, otherwise from a phase-1
/// LP vertex. Each iteration solves the equality-constrained subproblem on
/// the working set, then either steps to the first blocking row (lowest index
/// on ties) or drops the most negative multiplier.
pub fn solve_qp(p: &QpProblem, hint: Option<&DVector<f64>>) -> Result<SolveOutcome, SolverError> {
    let n = p.dim();
    let cons = p.constraints();
    let a = cons.normals();
    let rows = cons.len();
    let h2 = p.hessian() * 2.0;

    if let Some(h) = hint {
        if h.len() != n {
            return Err(SolverError::Dimension(format!(
                "hint has length {} for a {n}-variable QP",
                h.len()
            )));
        }
    }

    let mut iterations = 0usize;
    let mut x = match hint.filter(|h| cons.max_violation(h) <= TOL_FEAS) {
        Some(h) => h.clone(),
        None => {
            let unconstrained = p
                .hessian()
                .clone()
                .cholesky()
                .ok_or(SolverError::NotPositiveDefinite)?
                .solve(&(-p.linear()));
            if cons.max_violation(&unconstrained) <= TOL_FEAS {
                unconstrained
            } else {
                let phase1 = solve_lp(&LpProblem::feasibility(cons.clone()))?;
                iterations += phase1.iterations;
                match phase1.status {
                    SolveStatus::Optimal => phase1.point.expect("optimal LP has a point"),
                    _ => {
                        let farkas = phase1.farkas.unwrap_or_else(|| DVector::zeros(rows));
                        return Ok(SolveOutcome::infeasible(farkas, iterations));
                    }
                }
            }
        }
    };

    let mut working = independent_rows(a, &cons.binding_rows(&x, TOL_FEAS));
    let limit = 50 * rows.max(1);
    let mut inner = 0usize;
    loop {
        if inner >= limit {
            return Err(SolverError::IterationLimit {
                limit,
                what: "active-set QP",
            });
        }
        inner += 1;
        let grad = p.gradient(&x);
        let (step, lambda) = kkt_step(&h2, a, &working, &grad)?;
        let scale = 1.0 + x.amax();
        if step.amax() <= 1e-11 * scale {
            // Stationary on the working set.
            let mut drop: Option<(usize, f64)> = None;
            for (pos, &i) in working.iter().enumerate() {
                let l = lambda[pos];
                if l < -TOL_KKT {
                    let better = match drop {
                        None => true,
                        Some((bp, bl)) => l < bl || (l == bl && i < working[bp]),
                    };
                    if better {
                        drop = Some((pos, l));
                    }
                }
            }
            match drop {
                Some((pos, _)) => {
                    working.remove(pos);
                }
                None => {
                    let mut multipliers = DVector::zeros(rows);
                    for (pos, &i) in working.iter().enumerate() {
                        multipliers[i] = lambda[pos];
                    }
                    let value = p.objective(&x);
                    return Ok(SolveOutcome {
                        status: SolveStatus::Optimal,
                        active_rows: cons.binding_rows(&x, TOL_FEAS),
                        point: Some(x),
                        value: Some(value),
                        multipliers: Some(multipliers),
                        farkas: None,
                        iterations: iterations + inner,
                    });
                }
            }
        } else {
            let slack = cons.slack(&x);
            let ap = a * &step;
            let mut alpha = 1.0;
            let mut blocking = None;
            for i in 0..rows {
                if working.contains(&i) || ap[i] <= 1e-14 * scale {
                    continue;
                }
                let ratio = slack[i].max(0.0) / ap[i];
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
            x += step * alpha;
            if let Some(i) = blocking {
                working.push(i);
            }
        }
    }
}

/// KKT residuals of an optimal outcome; multipliers follow the convention
/// `2(H x + f) + Aᵀλ = 0`.
pub fn check_kkt(p: &QpProblem, out: &SolveOutcome) -> Result<KktReport, SolverError> {
    let (Some(x), Some(lambda)) = (&out.point, &out.multipliers) else {
        return Err(SolverError::NotOptimal);
    };
    if out.status != SolveStatus::Optimal {
        return Err(SolverError::NotOptimal);
    }
    let cons = p.constraints();
    let residual = p.gradient(x) + cons.normals().transpose() * lambda;
    let min_multiplier = out
        .active_rows
        .iter()
        .map(|&i| lambda[i])
        .min_by(|a, b| a.total_cmp(b));
    Ok(KktReport {
        stationarity: residual.amax(),
        primal_violation: cons.max_violation(x),
        min_multiplier,
    })
}
