//! A unitary step function with three values is split into binary factors
//! (identity outside each factor's support) and approximated by a chain of
//! matrix quotients, one per factor. When the factors do not commute the
//! chain is the result; when they do, it collapses to a single quotient.

use innerquot::linalg::{identity, op_norm, CMatrix};
use innerquot::model::{ArcPartition, StepUnimodular};
use innerquot::pipeline::approximate_step;
use innerquot::solver::SynthesisConfig;
use num_complex::Complex64;
use std::f64::consts::TAU;

fn main() {
    let partition = ArcPartition::new(vec![0.0, 2.0, 4.2]).unwrap();
    let rot = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
        ],
    );
    let refl = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    let f = StepUnimodular::new(partition, vec![identity(2), rot, refl]).unwrap();

    let cfg = SynthesisConfig::new(0.45, 0.15);
    let chain = approximate_step(&f, &cfg).unwrap();
    println!(
        "{} quotients in the chain, total degree {}, bound {:.4}",
        chain.quotients.len(),
        chain.total_degree(),
        chain.certified_error
    );
    println!(
        "factors commute, chain collapses to a single quotient: {}",
        chain.merged.is_some()
    );

    let mut worst: f64 = 0.0;
    for k in 0..5_000 {
        let theta = k as f64 * TAU / 5_000.0;
        if chain.exceptional.contains(theta) {
            continue;
        }
        worst = worst.max(op_norm(&(chain.boundary_eval(theta) - f.eval(theta))));
    }
    println!("sampled operator-norm error outside exceptional arcs: {worst:.4}");
}
