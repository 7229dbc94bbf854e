//! Certificates are checkable after the fact: rebuild the error function
//! from the recorded approximant, re-derive the bound on a finer grid, and
//! compare. A tampered certificate fails the same procedure.

use innerquot::certify::independent_recheck;
use innerquot::model::{Arc, ArcSet};
use innerquot::quotient_boundary_eval;
use innerquot::solver::{synthesize_two_valued, ScalarTarget, SynthesisConfig};
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let plateau = ArcSet::from_arcs(vec![Arc::new(0.0, PI).unwrap()]);
    let target = ScalarTarget::new(plateau, Complex64::new(0.0, 1.0)).unwrap();
    let cfg = SynthesisConfig::new(0.2, 0.1);
    let q = synthesize_two_valued(&target, &cfg).unwrap();

    let step = target.as_step().unwrap();
    let error_at = |theta: f64| {
        (quotient_boundary_eval(&q.numerator, &q.denominator, theta) - step.eval_scalar(theta))
            .norm()
    };
    let lipschitz = q.numerator.lipschitz_bound() + q.denominator.lipschitz_bound();

    let genuine = independent_recheck(&q.certificate, error_at, lipschitz, &q.exceptional);
    println!(
        "recorded bound {:.4}, independent recheck passes: {genuine}",
        q.certificate.bound
    );

    let mut tampered = q.certificate.clone();
    tampered.bound /= 3.0;
    let caught = !independent_recheck(&tampered, error_at, lipschitz, &q.exceptional);
    println!("tampered bound rejected: {caught}");
    assert!(genuine && caught);
}
