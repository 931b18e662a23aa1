//! Small dense helpers not covered directly by nalgebra.

use nalgebra::DMatrix;

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest absolute entry of `m − mᵀ`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Block-diagonal matrix with the given blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rotation_has_unit_spectral_radius() {
        let t: f64 = 0.3;
        let rot = dmatrix![t.cos(), -t.sin(); t.sin(), t.cos()];
        assert!((spectral_radius(&rot) - 1.0).abs() < 1e-12);
        assert!((spectral_radius(&(rot * 0.5)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn block_diagonal_layout() {
        let a = dmatrix![1.0, 2.0];
        let b = dmatrix![3.0; 4.0];
        let d = block_diag(&[&a, &b]);
        assert_eq!(d, dmatrix![1.0, 2.0, 0.0; 0.0, 0.0, 3.0; 0.0, 0.0, 4.0]);
    }
}
