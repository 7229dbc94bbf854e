//! From samples to a certified approximant: uniformly sampled unitary
//! boundary data is quantized into a step function (greedy cover of the
//! range, sup error < 2·epsilon_quant) and the step function is approximated
//! by a quotient chain; the reported bound adds the two contributions.

use innerquot::linalg::CMatrix;
use innerquot::pipeline::approximate_sampled;
use innerquot::solver::SynthesisConfig;
use num_complex::Complex64;
use std::f64::consts::TAU;

fn main() {
    // noisy samples of a two-plateau diagonal unitary
    let m = 64;
    let samples: Vec<(f64, CMatrix)> = (0..m)
        .map(|k| {
            let theta = k as f64 * TAU / m as f64;
            let base = if theta < TAU / 2.0 { 0.0 } else { TAU / 5.0 };
            let jitter = 0.02 * (13.0 * theta).sin();
            let d = Complex64::from_polar(1.0, base + jitter);
            let mat = CMatrix::from_row_slice(
                2,
                2,
                &[
                    d,
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    d.conj(),
                ],
            );
            (theta, mat)
        })
        .collect();

    let cfg = SynthesisConfig::new(0.5, 0.15);
    let approx = approximate_sampled(&samples, 0.1, &cfg).unwrap();

    println!(
        "quantized to {} arcs taking {} distinct values",
        approx.quantized.partition().arc_count(),
        approx.quantized.distinct_values().len()
    );
    println!(
        "chain bound {:.4} + quantization {:.4} = total {:.4}",
        approx.chain.certified_error,
        approx.quantization_bound,
        approx.total_bound
    );
    assert!(approx.total_bound < cfg.epsilon + approx.quantization_bound);
}
