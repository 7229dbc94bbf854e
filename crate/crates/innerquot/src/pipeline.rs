//! Matrix-valued approximation pipeline: spectral decomposition of unitary
//! values, per-eigenvalue scalar synthesis assembled into conjugated-diagonal
//! inner pairs, chains over binary factors, and the bounded (contraction-
//! valued) extension via averages of two unitary step functions.

use crate::blaschke::wrap_angle;
use crate::certify::{self, Certificate};
use crate::linalg::{identity, op_distance, op_norm, unitarity_defect, CMatrix};
use crate::model::{ArcPartition, ArcSet, ModelError, StepUnimodular};
use crate::potapov::{ConjugatedDiagonalInner, MatrixInner, PotapovError};
use crate::solver::{
    self, QuotientApproximant, ScalarTarget, SolverError, SynthesisConfig,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;
use thiserror::Error;

const UNITARY_TOL: f64 = 1e-10;
const EIGEN_GROUP_TOL: f64 = 1e-7;
const COMMUTE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input is not unitary: defect {0}")]
    NotUnitary(f64),
    #[error("input is not a contraction: operator norm {0}")]
    NotContraction(f64),
    #[error("eigen-decomposition residual {0} exceeds tolerance {1}")]
    EigenResidual(f64, f64),
    #[error("scalar synthesis failed on eigenvalue channel {index} (lambda = {eigenvalue})")]
    Channel {
        index: usize,
        eigenvalue: Complex64,
        #[source]
        source: Box<SolverError>,
    },
    #[error("chain certification failed: bound {bound} against epsilon {epsilon}")]
    ChainBudget { bound: f64, epsilon: f64 },
    #[error("samples must lie on a uniform increasing grid")]
    NonUniformGrid,
    #[error("error budget weights must be positive and sum to 1, got sum {0}")]
    BadWeights(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Potapov(#[from] PotapovError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Certify(#[from] certify::CertifyError),
}

/// Eigendecomposition of a unitary matrix: `T = V·diag(λ)·V*` with unitary
/// `V` (eigenvectors as columns) and unimodular eigenvalues sorted by
/// principal argument.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub v: CMatrix,
    pub eigenvalues: Vec<Complex64>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.eigenvalues[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &self.v * d * self.v.adjoint()
    }
}

/// Eigendecompose a unitary matrix through its commuting Hermitian parts:
/// `H = (T + T*)/2` fixes the eigenspace grouping, and the skew part
/// `S = (T − T*)/(2i)` is diagonalized inside each group. This avoids a
/// general non-Hermitian eigensolver and keeps repeated-eigenvalue bases
/// orthonormal by construction.
pub fn unitary_eig(t: &CMatrix, tol: f64) -> Result<SpectralDecomposition, PipelineError> {
    let defect = unitarity_defect(t);
    if defect > UNITARY_TOL {
        return Err(PipelineError::NotUnitary(defect));
    }
    let n = t.nrows();
    let h = (t + t.adjoint()).scale(0.5);
    let s = (t - t.adjoint()) * Complex64::new(0.0, -0.5);

    let eig_h = h.clone().symmetric_eigen();
    // sort H-eigenpairs by eigenvalue so groups are contiguous
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig_h.eigenvalues[a]
            .partial_cmp(&eig_h.eigenvalues[b])
            .unwrap()
    });

    let mut pairs: Vec<(Complex64, DVector<Complex64>)> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (eig_h.eigenvalues[order[end]] - eig_h.eigenvalues[order[start]]).abs()
                < EIGEN_GROUP_TOL
        {
            end += 1;
        }
        let k = end - start;
        let basis = CMatrix::from_fn(n, k, |i, j| eig_h.eigenvectors[(i, order[start + j])]);
        // diagonalize the skew part restricted to this eigenspace
        let m = basis.adjoint() * &s * &basis;
        let sub = m.symmetric_eigen();
        for j in 0..k {
            let c = eig_h.eigenvalues[order[start + j]];
            let sv = sub.eigenvalues[j];
            let mut lambda = Complex64::new(c, sv);
            lambda /= lambda.norm();
            let col = &basis * sub.eigenvectors.column(j);
            pairs.push((lambda, normalize_column_phase(col)));
        }
        start = end;
    }

    pairs.sort_by(|a, b| a.0.arg().partial_cmp(&b.0.arg()).unwrap());
    let v = CMatrix::from_fn(n, n, |i, j| pairs[j].1[i]);
    let eigenvalues: Vec<Complex64> = pairs.into_iter().map(|p| p.0).collect();

    let out = SpectralDecomposition { v, eigenvalues };
    let residual = op_distance(&out.reconstruct(), t);
    if residual > tol {
        return Err(PipelineError::EigenResidual(residual, tol));
    }
    Ok(out)
}

/// Deterministic eigenvector normalization: the largest-magnitude entry is
/// made real positive so repeated runs produce identical matrices.
fn normalize_column_phase(mut col: DVector<Complex64>) -> DVector<Complex64> {
    let mut best = 0;
    for i in 1..col.len() {
        if col[i].norm() > col[best].norm() + 1e-12 {
            best = i;
        }
    }
    let pivot = col[best];
    if pivot.norm() > 0.0 {
        let phase = pivot / pivot.norm();
        col /= phase;
    }
    let norm = col.norm();
    if norm > 0.0 {
        col /= Complex64::new(norm, 0.0);
    }
    col
}

/// A certified approximation `f ≈ Φ Ψ*` by conjugated-diagonal inner pairs.
#[derive(Debug, Clone)]
pub struct MatrixQuotient {
    pub phi: ConjugatedDiagonalInner,
    pub psi: ConjugatedDiagonalInner,
    pub exceptional: ArcSet,
    pub certified_error: f64,
    pub certificate: Certificate,
}

impl MatrixQuotient {
    pub fn dimension(&self) -> usize {
        self.phi.dimension()
    }

    pub fn boundary_eval(&self, theta: f64) -> CMatrix {
        let z = Complex64::from_polar(1.0, theta);
        self.phi.eval(z) * self.psi.eval(z).adjoint()
    }

    pub fn phi_inner(&self) -> MatrixInner {
        MatrixInner::Conjugated(self.phi.clone())
    }

    pub fn psi_inner(&self) -> MatrixInner {
        MatrixInner::Conjugated(self.psi.clone())
    }
}

/// An ordered product of matrix quotients with a combined certificate.
/// `merged` holds a single `(Φ, Ψ)` pair when every factor's inner parts
/// pairwise commute on a sample grid, in which case the chain equals the
/// plain quotient `Φ Ψ*`; in the noncommutative case only the chain form is
/// meaningful and `merged` is `None`.
#[derive(Debug, Clone)]
pub struct QuotientChain {
    pub quotients: Vec<MatrixQuotient>,
    pub exceptional: ArcSet,
    pub certified_error: f64,
    pub certificate: Certificate,
    pub merged: Option<(MatrixInner, MatrixInner)>,
}

impl QuotientChain {
    pub fn dimension(&self) -> usize {
        self.quotients[0].dimension()
    }

    pub fn boundary_eval(&self, theta: f64) -> CMatrix {
        let n = self.dimension();
        let mut acc = identity(n);
        for q in &self.quotients {
            acc *= q.boundary_eval(theta);
        }
        acc
    }

    pub fn total_degree(&self) -> usize {
        self.quotients
            .iter()
            .map(|q| q.phi.total_degree() + q.psi.total_degree())
            .sum()
    }
}

/// Two-valued matrix step target: identity on `e`, `t` on the complement.
pub fn two_valued_step_target(e: &ArcSet, t: &CMatrix) -> Result<StepUnimodular, PipelineError> {
    let n = t.nrows();
    if e.is_empty() {
        return Ok(StepUnimodular::constant(t.clone())?);
    }
    if (e.measure() - TAU).abs() < 1e-12 {
        return Ok(StepUnimodular::constant(identity(n))?);
    }
    let mut bps: Vec<f64> = Vec::new();
    for arc in e.arcs() {
        bps.push(wrap_angle(arc.start));
        bps.push(wrap_angle(arc.end));
    }
    bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let partition = ArcPartition::new(bps)?;
    let values = (0..partition.arc_count())
        .map(|j| {
            if e.contains(partition.arc(j).midpoint()) {
                identity(n)
            } else {
                t.clone()
            }
        })
        .collect();
    Ok(StepUnimodular::new(partition, values)?)
}

/// Approximate the two-valued target `I on e, t elsewhere` by a single
/// conjugated-diagonal quotient: eigendecompose `t`, run scalar synthesis per
/// eigenvalue channel with the full budget (operator-norm error of matrices
/// conjugated by the same unitary is the maximum over channels, not the sum),
/// and reassemble.
pub fn approximate_two_valued(
    e: &ArcSet,
    t: &CMatrix,
    cfg: &SynthesisConfig,
) -> Result<MatrixQuotient, PipelineError> {
    let spectral = unitary_eig(t, 1e-9)?;
    let channels: Vec<QuotientApproximant> = spectral
        .eigenvalues
        .par_iter()
        .enumerate()
        .map(|(index, &lambda)| {
            let target = ScalarTarget::new(e.clone(), lambda)
                .map_err(|err| PipelineError::Channel {
                    index,
                    eigenvalue: lambda,
                    source: Box::new(err),
                })?;
            solver::synthesize_two_valued(&target, cfg).map_err(|err| PipelineError::Channel {
                index,
                eigenvalue: lambda,
                source: Box::new(err),
            })
        })
        .collect::<Result<_, _>>()?;

    let conjugator = spectral.v.adjoint(); // eval is V·diag·V*
    let phi = ConjugatedDiagonalInner::new(
        conjugator.clone(),
        channels.iter().map(|c| c.numerator.clone()).collect(),
    )?;
    let psi = ConjugatedDiagonalInner::new(
        conjugator,
        channels.iter().map(|c| c.denominator.clone()).collect(),
    )?;
    let exceptional = channels
        .iter()
        .fold(ArcSet::empty(), |acc, c| acc.union(&c.exceptional));

    let target = two_valued_step_target(e, t)?;
    let lipschitz = phi.lipschitz_bound() + psi.lipschitz_bound();
    let points = solver::certification_grid_points(lipschitz, cfg.epsilon);
    let pairs = [(phi, psi)];
    let certificate = certify::certify_matrix_chain(
        &target,
        &pairs,
        &exceptional,
        cfg.epsilon,
        cfg.delta,
        points,
        certify::config_hash(cfg),
    )?;
    let [(phi, psi)] = pairs;
    if !certificate.pass {
        return Err(PipelineError::ChainBudget {
            bound: certificate.bound,
            epsilon: cfg.epsilon,
        });
    }
    Ok(MatrixQuotient {
        certified_error: certificate.bound,
        phi,
        psi,
        exceptional,
        certificate,
    })
}

/// Approximate an arbitrary unitary step function by a chain of quotients,
/// one per binary factor, each with budget `(ε/m, δ/m)`; the telescoping
/// bound over unitary factors makes the chain error at most the sum.
pub fn approximate_step(
    f: &StepUnimodular,
    cfg: &SynthesisConfig,
) -> Result<QuotientChain, PipelineError> {
    let n = f.dimension();
    let id = identity(n);
    let factors = f.binary_factorize();
    let quotients: Vec<MatrixQuotient> = if factors.is_empty() {
        // identically the identity
        vec![approximate_two_valued(&ArcSet::full_circle(), &id, cfg)?]
    } else {
        let m = factors.len() as f64;
        let sub_cfg = cfg.with_budget(cfg.epsilon / m, cfg.delta / m);
        factors
            .par_iter()
            .map(|factor| {
                let u = factor
                    .distinct_values()
                    .into_iter()
                    .find(|v| op_distance(v, &id) >= 1e-10)
                    .expect("nontrivial factor has a non-identity value");
                let e = factor
                    .support_of_value(&id)
                    .unwrap_or_else(|_| ArcSet::empty());
                approximate_two_valued(&e, &u, &sub_cfg)
            })
            .collect::<Result<_, _>>()?
    };

    let exceptional = quotients
        .iter()
        .fold(ArcSet::empty(), |acc, q| acc.union(&q.exceptional));
    let pairs: Vec<(ConjugatedDiagonalInner, ConjugatedDiagonalInner)> = quotients
        .iter()
        .map(|q| (q.phi.clone(), q.psi.clone()))
        .collect();
    let lipschitz: f64 = pairs
        .iter()
        .map(|(a, b)| a.lipschitz_bound() + b.lipschitz_bound())
        .sum();
    let points = solver::certification_grid_points(lipschitz, cfg.epsilon);
    let certificate = certify::certify_matrix_chain(
        f,
        &pairs,
        &exceptional,
        cfg.epsilon,
        cfg.delta,
        points,
        certify::config_hash(cfg),
    )?;
    if !certificate.pass {
        return Err(PipelineError::ChainBudget {
            bound: certificate.bound,
            epsilon: cfg.epsilon,
        });
    }
    let merged = merge_if_commuting(&quotients)?;
    Ok(QuotientChain {
        certified_error: certificate.bound,
        quotients,
        exceptional,
        certificate,
        merged,
    })
}

/// A chain collapses to a single quotient `(∏Φ_i)(∏Ψ_i)*` exactly when all
/// inner parts pairwise commute; checked pointwise on a sample grid.
fn merge_if_commuting(
    quotients: &[MatrixQuotient],
) -> Result<Option<(MatrixInner, MatrixInner)>, PipelineError> {
    let parts: Vec<&ConjugatedDiagonalInner> = quotients
        .iter()
        .flat_map(|q| [&q.phi, &q.psi])
        .collect();
    if quotients.len() > 1 {
        for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                for k in 0..16 {
                    let z = Complex64::from_polar(1.0, 0.37 + k as f64 * TAU / 16.0);
                    let a = parts[i].eval(z);
                    let b = parts[j].eval(z);
                    if op_norm(&(&a * &b - &b * &a)) > COMMUTE_TOL {
                        return Ok(None);
                    }
                }
            }
        }
    }
    let mut phi = quotients[0].phi_inner();
    let mut psi = quotients[0].psi_inner();
    for q in &quotients[1..] {
        phi = phi.multiply(q.phi_inner())?;
        psi = psi.multiply(q.psi_inner())?;
    }
    Ok(Some((phi, psi)))
}

/// Outcome of approximating uniformly sampled boundary data: quantization to
/// a step function contributes `< 2·ε_quant` to the reported bound on top of
/// the chain certificate.
#[derive(Debug, Clone)]
pub struct SampledApproximation {
    pub quantized: StepUnimodular,
    pub chain: QuotientChain,
    pub quantization_bound: f64,
    pub total_bound: f64,
}

/// Quantize uniformly sampled unitary values into a step function and
/// approximate the result.
pub fn approximate_sampled(
    samples: &[(f64, CMatrix)],
    epsilon_quant: f64,
    cfg: &SynthesisConfig,
) -> Result<SampledApproximation, PipelineError> {
    if samples.len() < 2 {
        return Err(PipelineError::NonUniformGrid);
    }
    let h = samples[1].0 - samples[0].0;
    if h <= 0.0 {
        return Err(PipelineError::NonUniformGrid);
    }
    for w in samples.windows(2) {
        if ((w[1].0 - w[0].0) - h).abs() > 1e-9 {
            return Err(PipelineError::NonUniformGrid);
        }
    }
    let quantized = crate::model::quantize_range(samples, epsilon_quant)?;
    let chain = approximate_step(&quantized, cfg)?;
    Ok(SampledApproximation {
        quantization_bound: 2.0 * epsilon_quant,
        total_bound: 2.0 * epsilon_quant + chain.certified_error,
        quantized,
        chain,
    })
}

/// Write a contraction as the average of two unitaries: polar-decompose
/// `T = W·P` (unitary completion on the kernel from the SVD bases), lift the
/// singular values to `e^{±i·arccos σ}`, and conjugate back.
pub fn decompose_contraction(t: &CMatrix) -> Result<(CMatrix, CMatrix), PipelineError> {
    let norm = op_norm(t);
    if norm > 1.0 + 1e-12 {
        return Err(PipelineError::NotContraction(norm));
    }
    let n = t.nrows();
    let svd = t.clone().svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    let w = &u * &v_t; // unitary polar factor, completed on the kernel
    let y = v_t.adjoint();
    let rot = |sign: f64| -> CMatrix {
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let theta = svd.singular_values[i].clamp(0.0, 1.0).acos();
                Complex64::from_polar(1.0, sign * theta)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &y * d * y.adjoint()
    };
    Ok((&w * rot(1.0), &w * rot(-1.0)))
}

/// A step function with arbitrary bounded matrix values (not necessarily
/// unitary), the input to the bounded extension.
#[derive(Debug, Clone)]
pub struct BoundedStep {
    partition: ArcPartition,
    values: Vec<CMatrix>,
}

impl BoundedStep {
    pub fn new(partition: ArcPartition, values: Vec<CMatrix>) -> Result<Self, ModelError> {
        if values.len() != partition.arc_count() {
            return Err(ModelError::ValueCountMismatch {
                arcs: partition.arc_count(),
                values: values.len(),
            });
        }
        let n = values[0].nrows();
        if values.iter().any(|v| v.nrows() != n || v.ncols() != n) {
            return Err(ModelError::MixedDimensions);
        }
        Ok(Self { partition, values })
    }

    pub fn partition(&self) -> &ArcPartition {
        &self.partition
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn eval(&self, theta: f64) -> &CMatrix {
        &self.values[self.partition.arc_index(theta)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(op_norm).fold(0.0, f64::max)
    }
}

/// A bounded step function realized as `s·(G₁ + G₂)/2` for two certified
/// unitary chains.
#[derive(Debug, Clone)]
pub struct BoundedApproximation {
    pub scale: f64,
    pub chains: [QuotientChain; 2],
    pub exceptional: ArcSet,
    pub combined_bound: f64,
}

impl BoundedApproximation {
    pub fn boundary_eval(&self, theta: f64) -> CMatrix {
        (self.chains[0].boundary_eval(theta) + self.chains[1].boundary_eval(theta))
            .scale(0.5 * self.scale)
    }
}

/// Approximate a bounded step function: scale to contractions, split each
/// value into an average of two unitaries, and approximate the two unitary
/// step functions with budget `ε/s` each.
pub fn approximate_bounded(
    f: &BoundedStep,
    cfg: &SynthesisConfig,
) -> Result<BoundedApproximation, PipelineError> {
    // the zero function is still expressible: scale 1 keeps the unitary
    // split ±i·W meaningful and the two chains cancel in the average
    let sup = f.sup_norm();
    let scale = if sup < 1e-12 { 1.0 } else { sup };
    let mut firsts = Vec::with_capacity(f.values.len());
    let mut seconds = Vec::with_capacity(f.values.len());
    for v in &f.values {
        let (u1, u2) = decompose_contraction(&v.scale(1.0 / scale))?;
        firsts.push(u1);
        seconds.push(u2);
    }
    let g1 = StepUnimodular::new(f.partition.clone(), firsts)?;
    let g2 = StepUnimodular::new(f.partition.clone(), seconds)?;
    let per_chain = cfg.with_budget((cfg.epsilon / scale).min(1.9), cfg.delta / 2.0);
    let c1 = approximate_step(&g1, &per_chain)?;
    let c2 = approximate_step(&g2, &per_chain)?;
    let exceptional = c1.exceptional.union(&c2.exceptional);
    let combined_bound = scale * 0.5 * (c1.certified_error + c2.certified_error);
    Ok(BoundedApproximation {
        scale,
        chains: [c1, c2],
        exceptional,
        combined_bound,
    })
}

/// Split a total error budget across stages by positive weights summing to 1.
pub fn error_budget(total: f64, weights: &[f64]) -> Result<Vec<f64>, PipelineError> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w <= 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(PipelineError::BadWeights(sum));
    }
    Ok(weights.iter().map(|w| w * total).collect())
}
