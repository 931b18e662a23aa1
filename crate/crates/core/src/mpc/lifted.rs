use nalgebra::{DMatrix, DVector};

use super::MpcConfig;
use crate::linalg::block_diag;

/// The horizon-N problem written over the stacked input `U = (u₀, …, u_{N−1})`.
///
/// Predicted states stack as `X = 𝒜 x + ℬ U` with `X = (x₀, …, x_N)`.
#[derive(Clone, Debug)]
pub struct LiftedProblem {
    n: usize,
    m: usize,
    horizon: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    free_response: DMatrix<f64>,
    input_response: DMatrix<f64>,
    state_weight: DMatrix<f64>,
    input_weight: DMatrix<f64>,
    state_normals: DMatrix<f64>,
    state_offsets: DVector<f64>,
    input_normals: DMatrix<f64>,
    input_offsets: DVector<f64>,
    // Cached products used at every step.
    hessian: DMatrix<f64>,
    input_response_t_weight: DMatrix<f64>,
    state_normals_free: DMatrix<f64>,
    state_normals_input: DMatrix<f64>,
}

pub fn build_lifted(cfg: &MpcConfig) -> LiftedProblem {
    let sys = cfg.system();
    let (n, m, big_n) = (sys.n(), sys.m(), cfg.horizon());

    let mut powers = Vec::with_capacity(big_n + 1);
    powers.push(DMatrix::<f64>::identity(n, n));
    for i in 0..big_n {
        let next = sys.a() * &powers[i];
        powers.push(next);
    }
    let mut free_response = DMatrix::zeros(n * (big_n + 1), n);
    for (i, p) in powers.iter().enumerate() {
        free_response.view_mut((i * n, 0), (n, n)).copy_from(p);
    }
    let mut input_response = DMatrix::zeros(n * (big_n + 1), m * big_n);
    for i in 1..=big_n {
        for j in 0..i {
            let block = &powers[i - j - 1] * sys.b();
            input_response
                .view_mut((i * n, j * m), (n, m))
                .copy_from(&block);
        }
    }

    let q = cfg.weights().q();
    let r = cfg.weights().r();
    let mut qs: Vec<&DMatrix<f64>> = vec![q; big_n];
    qs.push(cfg.terminal_weight());
    let state_weight = block_diag(&qs);
    let input_weight = block_diag(&vec![r; big_n]);

    let x_set = cfg.state_set();
    let terminal = cfg.terminal_set().unwrap_or(x_set);
    let mut f_blocks: Vec<&DMatrix<f64>> = vec![x_set.normals(); big_n];
    f_blocks.push(terminal.normals());
    let state_normals = block_diag(&f_blocks);
    let mut state_offsets = Vec::new();
    for _ in 0..big_n {
        state_offsets.extend(x_set.offsets().iter());
    }
    state_offsets.extend(terminal.offsets().iter());
    let state_offsets = DVector::from_vec(state_offsets);

    let u_set = cfg.input_set();
    let input_normals = block_diag(&vec![u_set.normals(); big_n]);
    let mut input_offsets = Vec::new();
    for _ in 0..big_n {
        input_offsets.extend(u_set.offsets().iter());
    }
    let input_offsets = DVector::from_vec(input_offsets);

    let input_response_t_weight = input_response.transpose() * &state_weight;
    let h = &input_response_t_weight * &input_response + &input_weight;
    let hessian = (&h + h.transpose()) * 0.5;
    let state_normals_free = &state_normals * &free_response;
    let state_normals_input = &state_normals * &input_response;

    LiftedProblem {
        n,
        m,
        horizon: big_n,
        a: sys.a().clone(),
        b: sys.b().clone(),
        free_response,
        input_response,
        state_weight,
        input_weight,
        state_normals,
        state_offsets,
        input_normals,
        input_offsets,
        hessian,
        input_response_t_weight,
        state_normals_free,
        state_normals_input,
    }
}

impl LiftedProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `𝒜 = [I; A; …; A^N]`.
    pub fn free_response(&self) -> &DMatrix<f64> {
        &self.free_response
    }

    /// `ℬ`, block `(i, j)` equal to `A^{i−j−1} B` below the diagonal.
    pub fn input_response(&self) -> &DMatrix<f64> {
        &self.input_response
    }

    /// `Q̃ = diag(Q, …, Q, Qf)`.
    pub fn state_weight(&self) -> &DMatrix<f64> {
        &self.state_weight
    }

    /// `R̃ = diag(R, …, R)`.
    pub fn input_weight(&self) -> &DMatrix<f64> {
        &self.input_weight
    }

    /// Stacked state constraints `F̃ X ≤ f̃`, terminal block last.
    pub fn state_normals(&self) -> &DMatrix<f64> {
        &self.state_normals
    }

    pub fn state_offsets(&self) -> &DVector<f64> {
        &self.state_offsets
    }

    /// Stacked input constraints `G̃ U ≤ g̃`.
    pub fn input_normals(&self) -> &DMatrix<f64> {
        &self.input_normals
    }

    pub fn input_offsets(&self) -> &DVector<f64> {
        &self.input_offsets
    }

    /// `ℬᵀQ̃ℬ + R̃`, exactly symmetric.
    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub(crate) fn input_response_t_weight(&self) -> &DMatrix<f64> {
        &self.input_response_t_weight
    }

    pub(crate) fn state_normals_free(&self) -> &DMatrix<f64> {
        &self.state_normals_free
    }

    pub(crate) fn state_normals_input(&self) -> &DMatrix<f64> {
        &self.state_normals_input
    }

    /// Stacked predicted states, equal to `𝒜 x + ℬ U` but computed by the
    /// recursion `x_{i+1} = A x_i + B u_i` so that consecutive blocks satisfy
    /// the dynamics exactly.
    pub fn predict(&self, x: &DVector<f64>, inputs: &DVector<f64>) -> DVector<f64> {
        let (n, m) = (self.n, self.m);
        let mut out = DVector::zeros(n * (self.horizon + 1));
        out.rows_mut(0, n).copy_from(x);
        for i in 0..self.horizon {
            let next = &self.a * out.rows(i * n, n) + &self.b * inputs.rows(i * m, m);
            out.rows_mut((i + 1) * n, n).copy_from(&next);
        }
        out
    }

    /// Finite-horizon cost `Σ xᵢᵀQxᵢ + uᵢᵀRuᵢ + x_NᵀQf x_N` of a stacked
    /// trajectory, evaluated term by term.
    pub fn stage_cost_sum(&self, states: &DVector<f64>, inputs: &DVector<f64>) -> f64 {
        let (n, m) = (self.n, self.m);
        let mut total = 0.0;
        for i in 0..=self.horizon {
            let xi = states.rows(i * n, n);
            let w = self.state_weight.view((i * n, i * n), (n, n));
            total += (xi.transpose() * w * xi)[(0, 0)];
        }
        for i in 0..self.horizon {
            let ui = inputs.rows(i * m, m);
            let w = self.input_weight.view((i * m, i * m), (m, m));
            total += (ui.transpose() * w * ui)[(0, 0)];
        }
        total
    }
}
