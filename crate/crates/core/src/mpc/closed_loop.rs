use nalgebra::DVector;

use super::{
    build_lifted, build_regulation_qp, build_tracking_qp, DiscreteLtiSystem, LiftedProblem,
    MpcConfig, MpcError, ReferenceTrajectory,
};
use crate::lp_qp::{solve_qp, SolveStatus, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Optimal,
    Infeasible,
}

/// Outcome of one receding-horizon optimization.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub status: StepStatus,
    /// First input of the optimal sequence.
    pub u_applied: Option<DVector<f64>>,
    /// Optimal stacked input sequence `U*`.
    pub inputs: Option<DVector<f64>>,
    /// Predicted stacked states `𝒜x + ℬU*`; the first block is the measured state.
    pub predicted_states: Option<DVector<f64>>,
    /// Optimal finite-horizon cost including the constant term.
    pub cost: Option<f64>,
}

impl StepResult {
    fn infeasible() -> Self {
        Self {
            status: StepStatus::Infeasible,
            u_applied: None,
            inputs: None,
            predicted_states: None,
            cost: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == StepStatus::Optimal
    }
}

/// Solves the horizon problem at `x` and returns the first input.
///
/// `hint` is an optional starting input sequence for the QP solver; it is
/// used only when feasible.
pub fn mpc_step(
    lp: &LiftedProblem,
    x: &DVector<f64>,
    reference: Option<&ReferenceTrajectory>,
    hint: Option<&DVector<f64>>,
) -> Result<StepResult, MpcError> {
    let condensed = match reference {
        Some(r) => build_tracking_qp(lp, x, r)?,
        None => build_regulation_qp(lp, x)?,
    };
    let out = solve_qp(&condensed.qp, hint)?;
    match out.status {
        SolveStatus::Infeasible => Ok(StepResult::infeasible()),
        SolveStatus::Unbounded => Err(SolverError::NotOptimal.into()),
        SolveStatus::Optimal => {
            let inputs = out.point.expect("optimal outcome carries a point");
            let value = out.value.expect("optimal outcome carries a value");
            let predicted = lp.predict(x, &inputs);
            Ok(StepResult {
                status: StepStatus::Optimal,
                u_applied: Some(inputs.rows(0, lp.m()).into_owned()),
                inputs: Some(inputs),
                predicted_states: Some(predicted),
                cost: Some(value + condensed.constant),
            })
        }
    }
}

/// Per-step references for a closed-loop run. Index `k` holds `x_{k,ref}`
/// and `u_{k,ref}`; indices past the end repeat the last entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSchedule {
    states: Vec<DVector<f64>>,
    inputs: Vec<DVector<f64>>,
}

impl ReferenceSchedule {
    pub fn new(states: Vec<DVector<f64>>, inputs: Vec<DVector<f64>>) -> Result<Self, MpcError> {
        if states.is_empty() || inputs.is_empty() {
            return Err(MpcError::InvalidConfig(
                "reference schedule must not be empty".into(),
            ));
        }
        let (n, m) = (states[0].len(), inputs[0].len());
        if states.iter().any(|s| s.len() != n) || inputs.iter().any(|u| u.len() != m) {
            return Err(MpcError::InvalidConfig(
                "reference entries must share one dimension".into(),
            ));
        }
        Ok(Self { states, inputs })
    }

    /// Constant reference at the equilibrium `(x_s, u_s)` with
    /// `A x_s + B u_s = x_s`; `u_s` is the least-squares solution and must
    /// make the residual vanish.
    pub fn equilibrium(sys: &DiscreteLtiSystem, x_s: &DVector<f64>) -> Result<Self, MpcError> {
        if x_s.len() != sys.n() {
            return Err(MpcError::Dimension {
                what: "equilibrium state",
                expected: sys.n(),
                found: x_s.len(),
            });
        }
        let rhs = x_s - sys.a() * x_s;
        let u_s = sys
            .b()
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| MpcError::InvalidConfig(e.to_string()))?;
        let residual = (sys.b() * &u_s - &rhs).amax();
        if residual > 1e-9 * (1.0 + x_s.amax()) {
            return Err(MpcError::InvalidConfig(format!(
                "state is not an equilibrium of the system (residual {residual:e})"
            )));
        }
        Self::new(vec![x_s.clone()], vec![u_s])
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn inputs(&self) -> &[DVector<f64>] {
        &self.inputs
    }

    /// Stacked references for the horizon starting at step `k`.
    pub fn window(&self, k: usize, horizon: usize) -> ReferenceTrajectory {
        let pick = |v: &[DVector<f64>], i: usize| v[i.min(v.len() - 1)].clone();
        let xs: Vec<f64> = (0..=horizon)
            .flat_map(|i| {
                pick(&self.states, k + i)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect();
        let us: Vec<f64> = (0..horizon)
            .flat_map(|i| {
                pick(&self.inputs, k + i)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect();
        ReferenceTrajectory::new(DVector::from_vec(xs), DVector::from_vec(us))
    }
}

/// Closed-loop record. `states` has one more entry than `inputs` unless the
/// run stopped on an infeasible step, in which case the last state is the
/// one at which the optimization failed.
#[derive(Clone, Debug, Default)]
pub struct SimTrace {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub costs: Vec<f64>,
    /// Predicted stacked states of every feasible step.
    pub predictions: Vec<DVector<f64>>,
    pub feasible_steps: usize,
    pub terminated_infeasible: bool,
}

impl SimTrace {
    /// Step index whose optimization was infeasible, if any.
    pub fn infeasible_step(&self) -> Option<usize> {
        self.terminated_infeasible.then_some(self.feasible_steps)
    }
}

/// Runs `steps` receding-horizon iterations from `x0`, applying the first
/// optimal input each time. Stops at the first infeasible optimization.
pub fn closed_loop_simulate(
    cfg: &MpcConfig,
    x0: &DVector<f64>,
    steps: usize,
    reference: Option<&ReferenceSchedule>,
) -> Result<SimTrace, MpcError> {
    if steps == 0 {
        return Err(MpcError::InvalidConfig("steps must be ≥ 1".into()));
    }
    let sys = cfg.system();
    if let Some(r) = reference {
        if r.states[0].len() != sys.n() || r.inputs[0].len() != sys.m() {
            return Err(MpcError::InvalidConfig(
                "reference dimensions do not match the system".into(),
            ));
        }
    }
    let lp = build_lifted(cfg);
    let m = sys.m();
    let mut trace = SimTrace {
        states: vec![x0.clone()],
        ..SimTrace::default()
    };
    let mut hint: Option<DVector<f64>> = None;
    let mut x = x0.clone();
    for k in 0..steps {
        let window = reference.map(|r| r.window(k, cfg.horizon()));
        let step = mpc_step(&lp, &x, window.as_ref(), hint.as_ref())?;
        if !step.is_optimal() {
            trace.terminated_infeasible = true;
            break;
        }
        let u = step.u_applied.expect("optimal step has an input");
        let plan = step.inputs.expect("optimal step has a plan");
        let len = plan.len();
        let mut shifted = DVector::zeros(len);
        shifted
            .rows_mut(0, len - m)
            .copy_from(&plan.rows(m, len - m));
        hint = Some(shifted);
        x = sys.step(&x, &u);
        trace.inputs.push(u);
        trace
            .costs
            .push(step.cost.expect("optimal step has a cost"));
        trace
            .predictions
            .push(step.predicted_states.expect("optimal step has predictions"));
        trace.states.push(x.clone());
        trace.feasible_steps += 1;
    }
    Ok(trace)
}
