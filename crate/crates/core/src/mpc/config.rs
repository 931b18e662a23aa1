use nalgebra::{DMatrix, DVector};

use super::{DiscreteLtiSystem, MpcError};
use crate::linalg::{asymmetry, min_symmetric_eigenvalue};
use crate::polytope::{HPolyhedron, TOL_SET};
use crate::riccati::CostWeights;

/// Everything that defines the finite-horizon problem solved at each step.
#[derive(Clone, Debug)]
pub struct MpcConfig {
    system: DiscreteLtiSystem,
    horizon: usize,
    weights: CostWeights,
    terminal_weight: DMatrix<f64>,
    state_set: HPolyhedron,
    input_set: HPolyhedron,
    terminal_set: Option<HPolyhedron>,
}

impl MpcConfig {
    /// Without a terminal set the last predicted state is constrained to
    /// `state_set` only.
    pub fn new(
        system: DiscreteLtiSystem,
        horizon: usize,
        weights: CostWeights,
        terminal_weight: DMatrix<f64>,
        state_set: HPolyhedron,
        input_set: HPolyhedron,
        terminal_set: Option<HPolyhedron>,
    ) -> Result<Self, MpcError> {
        let (n, m) = (system.n(), system.m());
        if horizon == 0 {
            return Err(MpcError::InvalidConfig("horizon must be ≥ 1".into()));
        }
        let dims = [
            ("Q", weights.q().nrows(), n),
            ("R", weights.r().nrows(), m),
            ("Qf", terminal_weight.nrows(), n),
            ("Qf", terminal_weight.ncols(), n),
            ("state set", state_set.dim(), n),
            ("input set", input_set.dim(), m),
        ];
        for (what, found, expected) in dims {
            if found != expected {
                return Err(MpcError::Dimension {
                    what,
                    expected,
                    found,
                });
            }
        }
        if let Some(t) = &terminal_set {
            if t.dim() != n {
                return Err(MpcError::Dimension {
                    what: "terminal set",
                    expected: n,
                    found: t.dim(),
                });
            }
        }
        let scale = terminal_weight.amax().max(1.0);
        if terminal_weight.iter().any(|v| !v.is_finite())
            || asymmetry(&terminal_weight) > 1e-10 * scale
        {
            return Err(MpcError::InvalidConfig("Qf must be symmetric".into()));
        }
        if min_symmetric_eigenvalue(&terminal_weight) < -1e-10 * scale {
            return Err(MpcError::InvalidConfig(
                "Qf must be positive semidefinite".into(),
            ));
        }
        let sets = [
            ("state set", Some(&state_set)),
            ("input set", Some(&input_set)),
            ("terminal set", terminal_set.as_ref()),
        ];
        for (name, set) in sets {
            if let Some(s) = set {
                let zero = DVector::zeros(s.dim());
                if !s.contains(&zero, TOL_SET)? {
                    return Err(MpcError::InvalidConfig(format!(
                        "{name} must contain the origin"
                    )));
                }
            }
        }
        Ok(Self {
            system,
            horizon,
            weights,
            terminal_weight,
            state_set,
            input_set,
            terminal_set,
        })
    }

    pub fn system(&self) -> &DiscreteLtiSystem {
        &self.system
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn weights(&self) -> &CostWeights {
        &self.weights
    }

    pub fn terminal_weight(&self) -> &DMatrix<f64> {
        &self.terminal_weight
    }

    pub fn state_set(&self) -> &HPolyhedron {
        &self.state_set
    }

    pub fn input_set(&self) -> &HPolyhedron {
        &self.input_set
    }

    pub fn terminal_set(&self) -> Option<&HPolyhedron> {
        self.terminal_set.as_ref()
    }

    /// Same problem with another horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self, MpcError> {
        let mut c = self.clone();
        if horizon == 0 {
            return Err(MpcError::InvalidConfig("horizon must be ≥ 1".into()));
        }
        c.horizon = horizon;
        Ok(c)
    }

    /// Same problem with another (or no) terminal set.
    pub fn with_terminal_set(&self, terminal_set: Option<HPolyhedron>) -> Result<Self, MpcError> {
        Self::new(
            self.system.clone(),
            self.horizon,
            self.weights.clone(),
            self.terminal_weight.clone(),
            self.state_set.clone(),
            self.input_set.clone(),
            terminal_set,
        )
    }
}
