//! Matrix targets reduce to scalars one eigenvalue at a time: the two-valued
//! function equal to I on the upper half circle and to the reflection
//! [[0,1],[1,0]] below is approximated by a pair of conjugated-diagonal inner
//! functions sharing the reflection's eigenbasis.

use innerquot::linalg::CMatrix;
use innerquot::model::{Arc, ArcSet};
use innerquot::pipeline::approximate_two_valued;
use innerquot::solver::SynthesisConfig;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let e = ArcSet::from_arcs(vec![Arc::new(0.0, PI).unwrap()]);
    let reflection = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );

    let cfg = SynthesisConfig::new(0.25, 0.1);
    let q = approximate_two_valued(&e, &reflection, &cfg).unwrap();

    println!(
        "Phi degree {}, Psi degree {}, certified bound {:.4}",
        q.phi.total_degree(),
        q.psi.total_degree(),
        q.certified_error
    );
    for (i, b) in q.phi.diagonal().iter().enumerate() {
        println!("eigenvalue channel {i}: numerator degree {}", b.degree());
    }

    // both inner parts really are inner: unitary boundary values
    let z = Complex64::from_polar(1.0, 2.4);
    let phi = q.phi.eval(z);
    println!(
        "unitarity defect of Phi at a boundary point: {:.2e}",
        innerquot::linalg::unitarity_defect(&phi)
    );
}
