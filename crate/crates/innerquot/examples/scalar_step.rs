//! A scalar step function with three values (the cube roots of unity) is
//! factored into two-valued pieces and approximated by a single quotient of
//! Blaschke products, the product of the per-factor quotients.

use innerquot::model::{ArcPartition, StepUnimodular};
use innerquot::quotient_boundary_eval;
use innerquot::solver::{synthesize_step_scalar, SynthesisConfig};
use num_complex::Complex64;
use std::f64::consts::TAU;

fn main() {
    let partition = ArcPartition::new(vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0]).unwrap();
    let omega = Complex64::from_polar(1.0, TAU / 3.0);
    let target = StepUnimodular::scalar(
        partition,
        vec![Complex64::new(1.0, 0.0), omega, omega * omega],
    )
    .unwrap();

    let cfg = SynthesisConfig::new(0.45, 0.15);
    let q = synthesize_step_scalar(&target, &cfg).unwrap();
    println!(
        "combined quotient: degree {} / {}, bound {:.4}, exceptional measure {:.4}",
        q.numerator.degree(),
        q.denominator.degree(),
        q.certified_error,
        q.exceptional.measure()
    );

    // sample a few plateau midpoints: the quotient sits near the right root
    for j in 0..3 {
        let theta = (j as f64 + 0.5) * TAU / 3.0;
        let approx = quotient_boundary_eval(&q.numerator, &q.denominator, theta);
        let exact = target.eval_scalar(theta);
        println!(
            "theta {theta:.3}: |approx - value| = {:.4}",
            (approx - exact).norm()
        );
    }
}
