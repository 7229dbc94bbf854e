//! Scalar finite Blaschke products: evaluation on the closed disc, boundary
//! argument (continuous lift), Poisson-kernel derivative and Lipschitz bounds.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

/// Default minimum distance of a zero from the unit circle.
pub const DEFAULT_ZERO_MARGIN: f64 = 1e-6;

/// Tolerance on `|constant| = 1`.
pub const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BlaschkeError {
    #[error("zero {0} lies outside the allowed disc of radius {1}")]
    ZeroOutOfRange(Complex64, f64),
    #[error("constant {0} is not unimodular (|c| = {1})")]
    ConstantNotUnimodular(Complex64, f64),
    #[error("margin must satisfy 0 < margin < 1, got {0}")]
    BadMargin(f64),
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Wrap a phase difference into `(-π, π]`.
pub fn wrap_signed(x: f64) -> f64 {
    let t = x.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Poisson kernel `P_r(Δ) = (1 - r²) / (1 - 2r cos Δ + r²)`.
pub fn poisson_kernel(r: f64, delta: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * delta.cos() + r * r)
}

/// Continuous lift of the boundary argument contribution of a single factor
/// with zero at radius `r`, as a function of `Δ = θ - φ₀`.
///
/// Antiderivative of the Poisson kernel: `2·arctan(λ·tan(Δ/2))` with
/// `λ = (1+r)/(1-r)`, continued across branch points so the result is
/// increasing on all of ℝ and rises by `2π` per period.
pub fn step_lift(r: f64, delta: f64) -> f64 {
    let lambda = (1.0 + r) / (1.0 - r);
    let u = 0.5 * delta;
    // u = u0 + kπ with u0 ∈ [-π/2, π/2)
    let k = ((u + FRAC_PI_2) / PI).floor();
    let u0 = u - k * PI;
    2.0 * ((lambda * u0.tan()).atan() + k * PI)
}

/// A finite Blaschke product: unimodular constant times a product of factors
/// `b_α(z) = (z - α)/(1 - ᾱz)` with zeros in the open disc.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBlaschke {
    zeros: Vec<Complex64>,
    constant: Complex64,
}

/// Continuous-lift boundary argument sampled on a grid.
#[derive(Debug, Clone)]
pub struct ArgumentTrace {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Evaluate a single Blaschke factor `b_α(z) = (z - α)/(1 - ᾱz)`.
pub fn factor_eval(alpha: Complex64, z: Complex64) -> Result<Complex64, BlaschkeError> {
    if alpha.norm() >= 1.0 {
        return Err(BlaschkeError::ZeroOutOfRange(alpha, 1.0));
    }
    Ok((z - alpha) / (Complex64::new(1.0, 0.0) - alpha.conj() * z))
}

impl FiniteBlaschke {
    /// Construct with the default zero margin.
    pub fn new(zeros: Vec<Complex64>, constant: Complex64) -> Result<Self, BlaschkeError> {
        Self::with_margin(zeros, constant, DEFAULT_ZERO_MARGIN)
    }

    /// Construct, rejecting zeros with `|α| > 1 - margin`.
    pub fn with_margin(
        zeros: Vec<Complex64>,
        constant: Complex64,
        margin: f64,
    ) -> Result<Self, BlaschkeError> {
        if !(margin > 0.0 && margin < 1.0) {
            return Err(BlaschkeError::BadMargin(margin));
        }
        let cap = 1.0 - margin;
        for &z in &zeros {
            if z.norm() > cap {
                return Err(BlaschkeError::ZeroOutOfRange(z, cap));
            }
        }
        let cn = constant.norm();
        if (cn - 1.0).abs() > UNIMODULAR_TOL {
            return Err(BlaschkeError::ConstantNotUnimodular(constant, cn));
        }
        Ok(Self { zeros, constant })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self {
            zeros: Vec::new(),
            constant: Complex64::new(1.0, 0.0),
        }
    }

    /// A degree-zero product with the given unimodular constant.
    pub fn constant_product(c: Complex64) -> Result<Self, BlaschkeError> {
        let cn = c.norm();
        if (cn - 1.0).abs() > UNIMODULAR_TOL {
            return Err(BlaschkeError::ConstantNotUnimodular(c, cn));
        }
        Ok(Self {
            zeros: Vec::new(),
            constant: c,
        })
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    /// Evaluate the product at `z` with `|z| ≤ 1`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = self.constant;
        for &a in &self.zeros {
            acc *= (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z);
        }
        acc
    }

    /// Evaluate on the boundary at angle `theta`.
    pub fn boundary_eval(&self, theta: f64) -> Complex64 {
        self.eval(Complex64::from_polar(1.0, theta))
    }

    /// Derivative of the boundary argument: sum of Poisson kernels at the zeros.
    pub fn boundary_arg_derivative(&self, theta: f64) -> f64 {
        self.zeros
            .iter()
            .map(|a| poisson_kernel(a.norm(), theta - a.arg()))
            .sum()
    }

    /// Continuous lift of `arg B(e^{iθ})` on a strictly increasing grid.
    ///
    /// The lift accumulates the per-factor closed-form antiderivative and is
    /// anchored so that `e^{iF(θ)} = B(e^{iθ})` at every grid point.
    pub fn boundary_argument(&self, grid: &[f64]) -> ArgumentTrace {
        let lift = |theta: f64| -> f64 {
            let mut s = self.constant.arg();
            for &a in &self.zeros {
                s += step_lift(a.norm(), theta - a.arg());
            }
            s
        };
        let values: Vec<f64> = grid.iter().map(|&t| lift(t)).collect();
        // Anchor the additive constant so the lift agrees with the actual
        // argument modulo 2π, not just in derivative.
        let offset = if let Some(&t0) = grid.first() {
            wrap_signed(self.boundary_eval(t0).arg() - values[0])
        } else {
            0.0
        };
        ArgumentTrace {
            grid: grid.to_vec(),
            values: values.into_iter().map(|v| v + offset).collect(),
        }
    }

    /// Upper bound for `sup_θ boundary_arg_derivative`: peak Poisson values.
    pub fn lipschitz_bound(&self) -> f64 {
        self.zeros
            .iter()
            .map(|a| {
                let r = a.norm();
                (1.0 + r) / (1.0 - r)
            })
            .sum()
    }

    /// Product of two finite Blaschke products.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        Self {
            zeros,
            constant: self.constant * other.constant,
        }
    }
}

impl ArgumentTrace {
    /// Net increase over the sampled range.
    pub fn total_increase(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Boundary value of the quotient `B_num / B_den` at angle `theta`.
///
/// On the circle `1/B_den = conj(B_den)`, so no division is involved.
pub fn quotient_boundary_eval(num: &FiniteBlaschke, den: &FiniteBlaschke, theta: f64) -> Complex64 {
    num.boundary_eval(theta) * den.boundary_eval(theta).conj()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_blaschke(rng: &mut impl Rng, max_degree: usize, max_r: f64) -> FiniteBlaschke {
        let deg = rng.gen_range(0..=max_degree);
        let zeros = (0..deg)
            .map(|_| {
                let r = rng.gen_range(0.0..max_r);
                let phi = rng.gen_range(0.0..TAU);
                Complex64::from_polar(r, phi)
            })
            .collect();
        let c = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
        FiniteBlaschke::with_margin(zeros, c, 1e-3).unwrap()
    }

    #[test]
    fn factor_identity_at_zero_alpha() {
        let z = Complex64::new(0.3, -0.4);
        assert_eq!(factor_eval(Complex64::new(0.0, 0.0), z).unwrap(), z);
    }

    #[test]
    fn factor_at_origin_and_one() {
        let a = Complex64::new(0.5, 0.0);
        let v0 = factor_eval(a, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v0.re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v0.im, 0.0, epsilon = 1e-15);
        let v1 = factor_eval(a, Complex64::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v1.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v1.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn factor_rejects_exterior_zero() {
        assert!(factor_eval(Complex64::new(1.1, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn empty_product_is_constant() {
        let b = FiniteBlaschke::one();
        assert_eq!(b.eval(Complex64::new(0.3, 0.7)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn z_squared_at_i() {
        let b = FiniteBlaschke::new(
            vec![Complex64::new(0.0, 0.0); 2],
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let v = b.eval(Complex64::new(0.0, 1.0));
        assert_abs_diff_eq!(v.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_pair_at_origin() {
        // zeros 0.5, -0.5: B(0) = c · (-0.5)(0.5) = -0.25. Oracle: direct
        // factor multiplication.
        let b = FiniteBlaschke::new(
            vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)],
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let z = Complex64::new(0.0, 0.0);
        let oracle = factor_eval(Complex64::new(0.5, 0.0), z).unwrap()
            * factor_eval(Complex64::new(-0.5, 0.0), z).unwrap();
        let v = b.eval(z);
        assert_abs_diff_eq!((v - oracle).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.re, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn boundary_unimodularity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let b = random_blaschke(&mut rng, 20, 0.997);
            for _ in 0..200 {
                let t = rng.gen_range(0.0..TAU);
                assert!((b.boundary_eval(t).norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn maximum_principle_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let b = random_blaschke(&mut rng, 10, 0.95);
            if b.degree() == 0 {
                continue;
            }
            for _ in 0..50 {
                let r = rng.gen_range(0.0..0.999);
                let t = rng.gen_range(0.0..TAU);
                assert!(b.eval(Complex64::from_polar(r, t)).norm() < 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn derivative_trivial_cases() {
        let b0 = FiniteBlaschke::one();
        assert_eq!(b0.boundary_arg_derivative(1.0), 0.0);
        let bz =
            FiniteBlaschke::new(vec![Complex64::new(0.0, 0.0)], Complex64::new(1.0, 0.0)).unwrap();
        for t in [0.0, 1.0, 3.0, 6.0] {
            assert_abs_diff_eq!(bz.boundary_arg_derivative(t), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_peak_value() {
        // zero at radius 0.9: peak (1+0.9)/(1-0.9) = 19 at θ = φ₀. Checked
        // against a centered finite difference of the boundary argument.
        let phi = 1.2;
        let b = FiniteBlaschke::new(
            vec![Complex64::from_polar(0.9, phi)],
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert_abs_diff_eq!(b.boundary_arg_derivative(phi), 19.0, epsilon = 1e-12);
        let h = 1e-6;
        let fd = wrap_signed(
            (b.boundary_eval(phi + h) * b.boundary_eval(phi - h).conj()).arg(),
        ) / (2.0 * h);
        assert_abs_diff_eq!(b.boundary_arg_derivative(phi), fd, epsilon = 1e-4);
    }

    #[test]
    fn derivative_matches_finite_difference_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let b = random_blaschke(&mut rng, 8, 0.99);
            if b.degree() == 0 {
                continue;
            }
            for _ in 0..20 {
                let t = rng.gen_range(0.0..TAU);
                let h = 1e-5;
                let fd = wrap_signed(
                    (b.boundary_eval(t + h) * b.boundary_eval(t - h).conj()).arg(),
                ) / (2.0 * h);
                let d = b.boundary_arg_derivative(t);
                assert!((d - fd).abs() <= 1e-5 * d.max(1.0), "d={d} fd={fd}");
            }
        }
    }

    #[test]
    fn argument_lift_of_monomials() {
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 * TAU / 1000.0).collect();
        let bz =
            FiniteBlaschke::new(vec![Complex64::new(0.0, 0.0)], Complex64::new(1.0, 0.0)).unwrap();
        let tr = bz.boundary_argument(&grid);
        for (t, v) in tr.grid.iter().zip(&tr.values) {
            assert_abs_diff_eq!(v - tr.values[0], *t, epsilon = 1e-12);
        }
        let b3 = FiniteBlaschke::new(
            vec![Complex64::new(0.0, 0.0); 3],
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let tr3 = b3.boundary_argument(&grid);
        let end = tr3.total_increase() + 3.0 * (TAU / 1000.0);
        assert_abs_diff_eq!(end, 3.0 * TAU, epsilon = 1e-8);
    }

    #[test]
    fn argument_concentrates_near_boundary_zero() {
        // zero 0.99·e^{iπ}: at least 95% of the 2π climb happens on
        // (π-0.3, π+0.3). Oracle: quadrature of the Poisson kernel over the
        // window. (At r = 0.9 the concentration is only 78.7%.)
        let b = FiniteBlaschke::with_margin(
            vec![Complex64::from_polar(0.99, PI)],
            Complex64::new(1.0, 0.0),
            1e-3,
        )
        .unwrap();
        let n = 4000;
        let grid: Vec<f64> = (0..n)
            .map(|i| PI - 0.3 + 0.6 * i as f64 / (n - 1) as f64)
            .collect();
        let tr = b.boundary_argument(&grid);
        let rise = tr.total_increase();
        // quadrature oracle
        let mut quad = 0.0;
        let h = 0.6 / (n - 1) as f64;
        for i in 0..n - 1 {
            quad += 0.5 * h * (b.boundary_arg_derivative(grid[i]) + b.boundary_arg_derivative(grid[i + 1]));
        }
        assert_abs_diff_eq!(rise, quad, epsilon = 1e-6);
        assert!(rise >= 0.95 * TAU, "rise = {rise}");
    }

    #[test]
    fn degree_winding_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid: Vec<f64> = (0..4096).map(|i| i as f64 * TAU / 4096.0).collect();
        for _ in 0..20 {
            let b = random_blaschke(&mut rng, 12, 0.95);
            let tr = b.boundary_argument(&grid);
            // Close the loop: add the increment from the last grid point back
            // to 2π using the derivative, then compare with 2π·degree.
            let tail = TAU / 4096.0 * b.boundary_arg_derivative(grid[4095]);
            let winding = (tr.total_increase() + tail) / TAU;
            assert!(
                (winding - b.degree() as f64).abs() < 1e-2,
                "winding {winding} degree {}",
                b.degree()
            );
        }
    }

    #[test]
    fn lipschitz_bound_values() {
        assert_eq!(FiniteBlaschke::one().lipschitz_bound(), 0.0);
        let b0 =
            FiniteBlaschke::new(vec![Complex64::new(0.0, 0.0)], Complex64::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(b0.lipschitz_bound(), 1.0, epsilon = 1e-15);
        let b = FiniteBlaschke::new(
            vec![Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.5)],
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert_abs_diff_eq!(b.lipschitz_bound(), 22.0, epsilon = 1e-12);
        // dense-grid sup never exceeds the bound
        let sup = (0..10000)
            .map(|i| b.boundary_arg_derivative(i as f64 * TAU / 10000.0))
            .fold(0.0f64, f64::max);
        assert!(sup <= 22.0 + 1e-9);
    }

    #[test]
    fn lipschitz_bound_dominates_derivative_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let b = random_blaschke(&mut rng, 10, 0.99);
            let bound = b.lipschitz_bound();
            for i in 0..2000 {
                let t = i as f64 * TAU / 2000.0;
                assert!(b.boundary_arg_derivative(t) <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn quotient_boundary_cases() {
        let one = FiniteBlaschke::one();
        let bz =
            FiniteBlaschke::new(vec![Complex64::new(0.0, 0.0)], Complex64::new(1.0, 0.0)).unwrap();
        let bz2 = FiniteBlaschke::new(
            vec![Complex64::new(0.0, 0.0); 2],
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        for i in 0..100 {
            let t = i as f64 * TAU / 100.0;
            let e = Complex64::from_polar(1.0, t);
            // B/B = 1
            let q0 = quotient_boundary_eval(&bz, &bz, t);
            assert!((q0 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            // z / 1 = e^{iθ}
            assert!((quotient_boundary_eval(&bz, &one, t) - e).norm() < 1e-12);
            // z² / z = e^{iθ}  (direct evaluation oracle)
            let oracle = bz2.boundary_eval(t) * bz.boundary_eval(t).conj();
            let q = quotient_boundary_eval(&bz2, &bz, t);
            assert!((q - oracle).norm() < 1e-14);
            assert!((q - e).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(FiniteBlaschke::new(
            vec![Complex64::new(0.9999999, 0.0)],
            Complex64::new(1.0, 0.0)
        )
        .is_err());
        assert!(FiniteBlaschke::new(vec![], Complex64::new(0.5, 0.0)).is_err());
    }
}
