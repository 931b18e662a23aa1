//! Brute-force reference implementations used to check the library.
#![allow(dead_code)]

use mpckit::mpc::DiscreteLtiSystem;
use mpckit::polytope::HPolyhedron;
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// All `k`-element index subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn push_unique(points: &mut Vec<DVector<f64>>, p: DVector<f64>, tol: f64) {
    if !points.iter().any(|q| (q - &p).amax() <= tol) {
        points.push(p);
    }
}

/// Vertices of a bounded `{x | A x ≤ b}` by solving every square subsystem.
pub fn vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = a.ncols();
    let mut out = Vec::new();
    for rows in combinations(a.nrows(), d) {
        let sub = DMatrix::from_fn(d, d, |i, j| a[(rows[i], j)]);
        let rhs = DVector::from_fn(d, |i, _| b[rows[i]]);
        let lu = sub.lu();
        if lu.determinant().abs() < 1e-10 {
            continue;
        }
        let Some(x) = lu.solve(&rhs) else { continue };
        if (a * &x - b).iter().all(|v| *v <= 1e-9 * (1.0 + b.amax())) {
            push_unique(&mut out, x, 1e-9);
        }
    }
    out
}

pub fn poly_vertices(p: &HPolyhedron) -> Vec<DVector<f64>> {
    vertices(p.normals(), p.offsets())
}

/// Facets `(normal, offset)` of the convex hull of a full-dimensional point
/// set in 2 or 3 dimensions, found by testing every candidate hyperplane.
pub fn hull_facets(points: &[DVector<f64>]) -> Vec<(DVector<f64>, f64)> {
    let d = points[0].len();
    assert!(d == 2 || d == 3, "hull oracle supports 2 and 3 dimensions");
    let mut facets = Vec::new();
    for idx in combinations(points.len(), d) {
        let normal = if d == 2 {
            let e = &points[idx[1]] - &points[idx[0]];
            DVector::from_vec(vec![-e[1], e[0]])
        } else {
            let e1 = (&points[idx[1]] - &points[idx[0]])
                .fixed_rows::<3>(0)
                .into_owned();
            let e2 = (&points[idx[2]] - &points[idx[0]])
                .fixed_rows::<3>(0)
                .into_owned();
            let c = e1.cross(&e2);
            DVector::from_vec(vec![c[0], c[1], c[2]])
        };
        let norm = normal.norm();
        if norm < 1e-9 {
            continue;
        }
        let normal = normal / norm;
        let offset = normal.dot(&points[idx[0]]);
        let (mut below, mut above) = (true, true);
        for p in points {
            let s = normal.dot(p) - offset;
            below &= s <= 1e-9;
            above &= s >= -1e-9;
            if !below && !above {
                break;
            }
        }
        if below {
            facets.push((normal, offset));
        } else if above {
            facets.push((-normal, -offset));
        }
    }
    facets
}

/// Mutual containment of `p` and `conv(points)` within `tol`.
pub fn matches_hull(p: &HPolyhedron, points: &[DVector<f64>], tol: f64) -> bool {
    let in_p = points
        .iter()
        .all(|v| p.contains(v, tol).expect("dimensions agree"));
    let facets = hull_facets(points);
    let in_hull = poly_vertices(p)
        .iter()
        .all(|w| facets.iter().all(|(n, o)| n.dot(w) <= o + tol));
    in_p && in_hull
}

/// A random full-dimensional polytope containing a ball around the origin,
/// bounded by a box of half-width `scale`.
pub fn random_polytope(rng: &mut StdRng, dim: usize, cuts: usize, scale: f64) -> HPolyhedron {
    let mut rows: Vec<f64> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut r = vec![0.0; dim];
            r[i] = sign;
            rows.extend(r);
            offsets.push(scale * rng.random_range(0.5..1.0));
        }
    }
    for _ in 0..cuts {
        let r: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        rows.extend(r);
        offsets.push(scale * rng.random_range(0.3..1.0));
    }
    HPolyhedron::new(
        DMatrix::from_row_slice(offsets.len(), dim, &rows),
        DVector::from_vec(offsets),
    )
    .expect("valid random polytope")
}

/// Minimizer of `xᵀH x + 2 fᵀx s.t. A x ≤ b` found by trying every active
/// set of at most `dim` rows and keeping the KKT point with the lowest cost.
/// `None` when no KKT point exists (the problem is infeasible).
pub fn qp_by_enumeration(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    let n = h.nrows();
    let tol = 1e-9 * (1.0 + b.amax());
    let mut best: Option<(DVector<f64>, f64)> = None;
    for k in 0..=n.min(a.nrows()) {
        for set in combinations(a.nrows(), k) {
            let mut kkt = DMatrix::zeros(n + k, n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&(h * 2.0));
            let mut rhs = DVector::zeros(n + k);
            rhs.rows_mut(0, n).copy_from(&(f * -2.0));
            for (r, &i) in set.iter().enumerate() {
                for j in 0..n {
                    kkt[(n + r, j)] = a[(i, j)];
                    kkt[(j, n + r)] = a[(i, j)];
                }
                rhs[n + r] = b[i];
            }
            let lu = kkt.lu();
            if lu.determinant().abs() < 1e-12 {
                continue;
            }
            let Some(sol) = lu.solve(&rhs) else { continue };
            let x = sol.rows(0, n).into_owned();
            if sol.rows(n, k).iter().any(|l| *l < -1e-9) {
                continue;
            }
            if (a * &x - b).iter().any(|v| *v > tol) {
                continue;
            }
            let value = x.dot(&(h * &x)) + 2.0 * f.dot(&x);
            if best.as_ref().is_none_or(|(_, bv)| value < *bv) {
                best = Some((x, value));
            }
        }
    }
    best
}

/// Minimum of `cᵀx` over the vertices of a bounded polyhedron.
pub fn lp_by_vertices(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Option<f64> {
    vertices(a, b)
        .iter()
        .map(|v| c.dot(v))
        .min_by(|x, y| x.total_cmp(y))
}

/// Horizon-N regulation problem evaluated by forward simulation, with no
/// use of stacked prediction matrices.
pub struct SimulatedOcp<'a> {
    pub sys: &'a DiscreteLtiSystem,
    pub q: &'a DMatrix<f64>,
    pub r: &'a DMatrix<f64>,
    pub qf: &'a DMatrix<f64>,
    pub x_set: &'a HPolyhedron,
    pub u_set: &'a HPolyhedron,
    pub terminal: Option<&'a HPolyhedron>,
    pub horizon: usize,
}

impl SimulatedOcp<'_> {
    fn inputs(&self, u: &DVector<f64>) -> Vec<DVector<f64>> {
        let m = self.sys.m();
        (0..self.horizon)
            .map(|i| u.rows(i * m, m).into_owned())
            .collect()
    }

    pub fn trajectory(&self, x0: &DVector<f64>, u: &DVector<f64>) -> Vec<DVector<f64>> {
        let mut xs = vec![x0.clone()];
        for ui in self.inputs(u) {
            let next = self.sys.a() * xs.last().unwrap() + self.sys.b() * ui;
            xs.push(next);
        }
        xs
    }

    /// `Σ xᵢᵀQxᵢ + uᵢᵀRuᵢ + x_NᵀQf x_N`.
    pub fn cost(&self, x0: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let xs = self.trajectory(x0, u);
        let mut total = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let w = if i == self.horizon { self.qf } else { self.q };
            total += x.dot(&(w * x));
        }
        for ui in self.inputs(u) {
            total += ui.dot(&(self.r * &ui));
        }
        total
    }

    /// Constraint values `g(U) ≤ 0` for every state and input row.
    pub fn constraint_values(&self, x0: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let xs = self.trajectory(x0, u);
        let mut vals = Vec::new();
        for (i, x) in xs.iter().enumerate().skip(1) {
            let set = if i == self.horizon {
                self.terminal.unwrap_or(self.x_set)
            } else {
                self.x_set
            };
            vals.extend((set.normals() * x - set.offsets()).iter());
        }
        for ui in self.inputs(u) {
            vals.extend((self.u_set.normals() * &ui - self.u_set.offsets()).iter());
        }
        DVector::from_vec(vals)
    }

    /// Solves by recovering the quadratic and affine data from simulated
    /// evaluations and enumerating active sets. Rows on the measured state
    /// are ignored (they do not depend on U).
    pub fn solve(&self, x0: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
        let dim = self.sys.m() * self.horizon;
        let zero = DVector::zeros(dim);
        let unit = |i: usize| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        };
        let c0 = self.cost(x0, &zero);
        let mut h = DMatrix::zeros(dim, dim);
        let mut f = DVector::zeros(dim);
        for i in 0..dim {
            let ji = self.cost(x0, &unit(i));
            let jm = self.cost(x0, &(-unit(i)));
            h[(i, i)] = (ji + jm) / 2.0 - c0;
            f[i] = (ji - jm) / 4.0;
        }
        for i in 0..dim {
            for j in 0..i {
                let jij = self.cost(x0, &(unit(i) + unit(j)));
                let v = (jij - c0 - 2.0 * f[i] - 2.0 * f[j] - h[(i, i)] - h[(j, j)]) / 2.0;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let g0 = self.constraint_values(x0, &zero);
        let mut a = DMatrix::zeros(g0.len(), dim);
        for i in 0..dim {
            let gi = self.constraint_values(x0, &unit(i));
            a.set_column(i, &(gi - &g0));
        }
        let b = -g0;
        qp_by_enumeration(&h, &f, &a, &b).map(|(u, _)| {
            let cost = self.cost(x0, &u);
            (u, cost)
        })
    }
}

/// The double-integrator data used throughout the tests.
pub struct ExampleSetup {
    pub sys: DiscreteLtiSystem,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub x_set: HPolyhedron,
    pub u_set: HPolyhedron,
}

pub fn example_setup() -> ExampleSetup {
    ExampleSetup {
        sys: DiscreteLtiSystem::double_integrator(0.05),
        q: DMatrix::identity(2, 2),
        r: DMatrix::identity(1, 1),
        x_set: HPolyhedron::symmetric_box(&[10.0, 10.0]),
        u_set: HPolyhedron::symmetric_box(&[20.0]),
    }
}

/// Parses a two-column `index value` table.
pub fn read_series(text: &str) -> Vec<f64> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace();
            let _k = it.next();
            it.next().unwrap().parse().unwrap()
        })
        .collect()
}

/// The published eleven-row terminal set intersected with the state box.
pub fn published_terminal_set() -> HPolyhedron {
    let rows: Vec<(f64, f64, f64)> = include_str!("../fixtures/published_terminal_set.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    let normals = DMatrix::from_fn(
        rows.len(),
        2,
        |i, j| if j == 0 { rows[i].0 } else { rows[i].1 },
    );
    let offsets = DVector::from_fn(rows.len(), |i, _| rows[i].2);
    HPolyhedron::new(normals, offsets)
        .unwrap()
        .intersect(&HPolyhedron::symmetric_box(&[10.0, 10.0]))
        .unwrap()
}

pub struct RandomQp {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Strictly convex QP in at most four variables with up to eight rows.
/// Roughly one instance in five is infeasible.
pub fn random_qp(rng: &mut StdRng) -> RandomQp {
    let n = rng.random_range(1..=4);
    let rows = rng.random_range(0..=8);
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let h = m.transpose() * &m + DMatrix::identity(n, n) * 0.1;
    let h = (&h + h.transpose()) * 0.5;
    let f = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
    let a = DMatrix::from_fn(rows, n, |_, _| rng.random_range(-1.0..1.0));
    let center = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let infeasible = rows >= 2 && rng.random_bool(0.2);
    let mut b = DVector::from_fn(rows, |i, _| {
        a.row(i).dot(&center.transpose()) + rng.random_range(0.0..1.0)
    });
    if infeasible {
        // Rows 0 and 1 become `aᵀx ≤ −0.5` and `−aᵀx ≤ −0.5`.
        let r0 = a.row(0).into_owned();
        let mut a = a;
        a.set_row(1, &(-&r0));
        b[0] = -0.5;
        b[1] = -0.5;
        return RandomQp { h, f, a, b };
    }
    RandomQp { h, f, a, b }
}

pub struct RandomLp {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Bounded LP (a box is always included) in at most four variables.
pub fn random_lp(rng: &mut StdRng) -> RandomLp {
    let n = rng.random_range(1..=4);
    let cuts = rng.random_range(0..=6);
    let rows = 2 * n + cuts;
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);
    for i in 0..n {
        a[(2 * i, i)] = 1.0;
        a[(2 * i + 1, i)] = -1.0;
        b[2 * i] = rng.random_range(1.0..5.0);
        b[2 * i + 1] = rng.random_range(1.0..5.0);
    }
    for r in 2 * n..rows {
        for j in 0..n {
            a[(r, j)] = rng.random_range(-1.0..1.0);
        }
        // Some cuts exclude the origin and may empty the set.
        b[r] = rng.random_range(-1.5..3.0);
    }
    let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    RandomLp { c, a, b }
}
