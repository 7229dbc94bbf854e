//! Non-unitary targets: a step function with contraction values (operator
//! norm up to s) is written as s/2·(G1 + G2) with unitary step functions
//! G1, G2 — each value splits into an average of two unitaries — and the two
//! chains are synthesized separately.

use innerquot::linalg::{op_norm, CMatrix};
use innerquot::model::ArcPartition;
use innerquot::pipeline::{approximate_bounded, BoundedStep};
use innerquot::solver::SynthesisConfig;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

fn main() {
    let partition = ArcPartition::new(vec![0.0, PI]).unwrap();
    let a = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.7, 0.0),
            Complex64::new(0.2, 0.1),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, -0.4),
        ],
    );
    let b = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.1, 0.0),
            Complex64::new(0.6, 0.0),
        ],
    );
    let f = BoundedStep::new(partition, vec![a, b]).unwrap();
    println!("sup norm of the target: {:.4}", f.sup_norm());

    let cfg = SynthesisConfig::new(1.2, 0.2);
    let approx = approximate_bounded(&f, &cfg).unwrap();
    println!(
        "scale {:.4}, per-chain bounds {:.4} / {:.4}, combined {:.4}",
        approx.scale,
        approx.chains[0].certified_error,
        approx.chains[1].certified_error,
        approx.combined_bound
    );

    let mut worst: f64 = 0.0;
    for k in 0..5_000 {
        let theta = k as f64 * TAU / 5_000.0;
        if approx.exceptional.contains(theta) {
            continue;
        }
        worst = worst.max(op_norm(&(approx.boundary_eval(theta) - f.eval(theta))));
    }
    println!("sampled error outside exceptional arcs: {worst:.4}");
    assert!(worst <= approx.combined_bound + 1e-12);
}
