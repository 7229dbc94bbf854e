//! Approximate the step function that is 1 on the upper half circle and i on
//! the lower half by a quotient of two finite Blaschke products, then sample
//! the boundary error outside the reported exceptional arcs.

use innerquot::model::{Arc, ArcSet};
use innerquot::quotient_boundary_eval;
use innerquot::solver::{synthesize_two_valued, ScalarTarget, SynthesisConfig};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

fn main() {
    let plateau = ArcSet::from_arcs(vec![Arc::new(0.0, PI).unwrap()]);
    let target = ScalarTarget::new(plateau, Complex64::new(0.0, 1.0)).unwrap();
    let cfg = SynthesisConfig::new(0.2, 0.1);

    let q = synthesize_two_valued(&target, &cfg).unwrap();
    println!(
        "degrees: numerator {}, denominator {}",
        q.numerator.degree(),
        q.denominator.degree()
    );
    println!(
        "certified bound {:.4} (epsilon {}), exceptional measure {:.4} (delta {})",
        q.certified_error,
        cfg.epsilon,
        q.exceptional.measure(),
        cfg.delta
    );

    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let theta = k as f64 * TAU / 10_000.0;
        if q.exceptional.contains(theta) {
            continue;
        }
        let approx = quotient_boundary_eval(&q.numerator, &q.denominator, theta);
        worst = worst.max((approx - target.value_at(theta)).norm());
    }
    println!("sampled max error outside exceptional arcs: {worst:.4}");
    assert!(worst <= q.certified_error);
}
