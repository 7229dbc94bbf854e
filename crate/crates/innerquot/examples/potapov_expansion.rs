//! Every conjugated-diagonal inner function V*·diag(B_i)·V expands into a
//! Blaschke-Potapov product: a constant unitary times elementary factors
//! b_alpha·P + (I − P) with rank-one projections, one per zero. Both forms
//! agree pointwise, and the winding of the determinant equals the total
//! degree.

use innerquot::blaschke::FiniteBlaschke;
use innerquot::linalg::{op_distance, CMatrix};
use innerquot::potapov::{ConjugatedDiagonalInner, MatrixInner};
use num_complex::Complex64;
use std::f64::consts::TAU;

fn main() {
    // a fixed unitary conjugator and two scalar channels of different degree
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, s),
            Complex64::new(0.0, -s),
        ],
    );
    let b1 = FiniteBlaschke::new(
        vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.6)],
        Complex64::new(1.0, 0.0),
    )
    .unwrap();
    let b2 = FiniteBlaschke::new(vec![Complex64::new(0.0, -0.7)], Complex64::new(0.0, 1.0)).unwrap();
    let inner = ConjugatedDiagonalInner::new(v, vec![b1, b2]).unwrap();

    let potapov = inner.to_potapov_form().unwrap();
    println!(
        "total degree {}, Potapov factors {}",
        inner.total_degree(),
        potapov.factors().len()
    );

    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let z = Complex64::from_polar(0.005 * k as f64, 2.7 * k as f64);
        worst = worst.max(op_distance(&inner.eval(z), &potapov.eval(z)));
    }
    println!("max pointwise gap between the two forms: {worst:.2e}");

    let grid: Vec<f64> = (0..=4096).map(|k| k as f64 * TAU / 4096.0).collect();
    let total = inner.total_degree();
    let wrapped = MatrixInner::Conjugated(inner);
    let winding = wrapped.determinant_winding(&grid).unwrap();
    println!("determinant winding {winding} (= total degree {total})");
    assert_eq!(winding, total as i64);
}
