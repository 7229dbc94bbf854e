//! Small helpers over complex matrices shared across the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Operator norm: largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `max(‖M*M - I‖, ‖MM* - I‖)` in operator norm.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    let a = m.adjoint() * m - &id;
    let b = m * m.adjoint() - &id;
    op_norm(&a).max(op_norm(&b))
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && unitarity_defect(m) <= tol
}

/// Distance between two matrices in operator norm.
pub fn op_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

#[cfg(test)]
pub mod testutil {
    use super::*;
    use rand::Rng;

    /// Random unitary via QR of a complex Ginibre matrix.
    pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
        loop {
            let g = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let qr = g.qr();
            let q = qr.q();
            let r = qr.r();
            // normalize so the diagonal of R is positive: keeps Q Haar-ish
            let mut q = q;
            for j in 0..n {
                let d = r[(j, j)];
                if d.norm() < 1e-12 {
                    continue;
                }
                let phase = d / d.norm();
                for i in 0..n {
                    q[(i, j)] *= phase.conj();
                }
            }
            if is_unitary(&q, 1e-10) {
                return q;
            }
        }
    }
}
