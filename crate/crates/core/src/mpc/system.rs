use nalgebra::{DMatrix, DVector};

use super::MpcError;

/// `x⁺ = A x + B u`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLtiSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl DiscreteLtiSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self, MpcError> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(MpcError::InvalidConfig(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(MpcError::InvalidConfig(format!(
                "B must have {} rows and at least one column, got {}x{}",
                a.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(MpcError::InvalidConfig(
                "A or B contains non-finite entries".into(),
            ));
        }
        Ok(Self { a, b })
    }

    /// Position/velocity double integrator sampled with step `dt`:
    /// `A = [[1, dt], [0, 1]]`, `B = [0, dt]ᵀ`.
    pub fn double_integrator(dt: f64) -> Self {
        Self {
            a: DMatrix::from_row_slice(2, 2, &[1.0, dt, 0.0, 1.0]),
            b: DMatrix::from_row_slice(2, 1, &[0.0, dt]),
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u
    }
}
