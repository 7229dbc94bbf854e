//! Problem-file ingestion, synthesis orchestration, artifact emission, and
//! verification / plot-data export for the command-line front end.
//!
//! A problem is a JSON document selecting one of six target kinds (scalar or
//! matrix, two-valued / step / sampled / bounded). Synthesis writes two
//! artifacts into the output directory — `approximant.json` (every zero,
//! constant and conjugator, serialized losslessly) and `certificate.json` —
//! plus a one-line summary on standard output. All file writes go through a
//! temp file in the target directory followed by an atomic rename, so a
//! failed run never leaves a partial artifact behind.

use crate::blaschke::FiniteBlaschke;
use crate::certify::{self, Certificate};
use crate::linalg::{op_norm, unitarity_defect, CMatrix};
use crate::model::{Arc, ArcPartition, ArcSet, StepUnimodular};
use crate::pipeline::{
    self, BoundedStep, MatrixQuotient, PipelineError, QuotientChain, SampledApproximation,
};
use crate::potapov::ConjugatedDiagonalInner;
use crate::solver::{self, ScalarTarget, SolverError, SynthesisConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

/// Errors carry the process exit code demanded by their phase: 1 for
/// ingestion, 2 for synthesis, 3 for certification/verification.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("synthesis failed: {0}")]
    Synthesis(String),
    #[error("{0}")]
    Certification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Synthesis(_) => 2,
            CliError::Certification(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    ScalarTwoValued,
    ScalarStep,
    MatrixTwoValued,
    MatrixStep,
    MatrixSampled,
    BoundedStep,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArcSpec {
    pub start: f64,
    pub end: f64,
}

/// Tuning block of a problem file; every field has the solver default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemConfig {
    pub max_degree: usize,
    pub grid_density: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub margin: f64,
    /// Quantization tolerance for `matrix_sampled` problems; contributes
    /// `2·epsilon_quant` to the reported bound. Defaults to `epsilon / 4`.
    pub epsilon_quant: Option<f64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let d = SynthesisConfig::new(1.0, 1.0);
        ProblemConfig {
            max_degree: d.max_degree,
            grid_density: d.grid_density,
            max_iterations: d.max_iterations,
            seed: d.seed,
            margin: d.margin,
            epsilon_quant: None,
        }
    }
}

/// On-disk problem description. Matrices are flat row-major lists of
/// `[re, im]` pairs of length `dimension²`; scalars are 1×1 matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub kind: ProblemKind,
    pub dimension: usize,
    #[serde(default)]
    pub arcs: Vec<ArcSpec>,
    pub values: Vec<Vec<[f64; 2]>>,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub config: ProblemConfig,
}

const UNITARY_LOAD_TOL: f64 = 1e-9;

impl ProblemFile {
    pub fn synthesis_config(&self) -> SynthesisConfig {
        let mut cfg = SynthesisConfig::new(self.epsilon, self.delta);
        cfg.max_degree = self.config.max_degree;
        cfg.grid_density = self.config.grid_density;
        cfg.max_iterations = self.config.max_iterations;
        cfg.seed = self.config.seed;
        cfg.margin = self.config.margin;
        cfg
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.dimension == 0 {
            return Err(CliError::Parse("dimension must be at least 1".into()));
        }
        if matches!(self.kind, ProblemKind::ScalarTwoValued | ProblemKind::ScalarStep)
            && self.dimension != 1
        {
            return Err(CliError::Parse(format!(
                "scalar problems need dimension 1, got {}",
                self.dimension
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(CliError::Parse(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0) {
            return Err(CliError::Parse(format!("delta must be positive, got {}", self.delta)));
        }
        if self.values.is_empty() {
            return Err(CliError::Parse("values must be non-empty".into()));
        }
        let n = self.dimension;
        for (i, flat) in self.values.iter().enumerate() {
            if flat.len() != n * n {
                return Err(CliError::Parse(format!(
                    "value {i} has {} entries, expected {}",
                    flat.len(),
                    n * n
                )));
            }
            if self.kind != ProblemKind::BoundedStep {
                let m = matrix_from_flat(flat, n);
                let defect = unitarity_defect(&m);
                if defect > UNITARY_LOAD_TOL {
                    return Err(CliError::Parse(format!(
                        "value {i} is not unitary (defect {defect:.3e})"
                    )));
                }
            }
        }
        match self.kind {
            ProblemKind::ScalarTwoValued | ProblemKind::MatrixTwoValued => {
                if self.values.len() != 1 {
                    return Err(CliError::Parse(format!(
                        "two-valued problems take exactly one off-value, got {}",
                        self.values.len()
                    )));
                }
            }
            ProblemKind::ScalarStep | ProblemKind::MatrixStep | ProblemKind::BoundedStep => {
                if self.arcs.is_empty() {
                    return Err(CliError::Parse("step problems need a non-empty arc list".into()));
                }
                if self.values.len() != self.arcs.len() {
                    return Err(CliError::Parse(format!(
                        "{} arcs but {} values",
                        self.arcs.len(),
                        self.values.len()
                    )));
                }
            }
            ProblemKind::MatrixSampled => {
                if !self.arcs.is_empty() {
                    return Err(CliError::Parse(
                        "sampled problems take values on an implicit uniform grid; arcs must be empty"
                            .into(),
                    ));
                }
                if self.values.len() < 2 {
                    return Err(CliError::Parse("sampled problems need at least 2 samples".into()));
                }
            }
        }
        Ok(())
    }

    pub fn matrix_value(&self, i: usize) -> CMatrix {
        matrix_from_flat(&self.values[i], self.dimension)
    }

    fn scalar_value(&self, i: usize) -> Complex64 {
        let [re, im] = self.values[i][0];
        Complex64::new(re, im)
    }

    fn arc_set(&self) -> Result<ArcSet, CliError> {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc::new(a.start, a.end))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(ArcSet::from_arcs(arcs))
    }

    /// Interpret `arcs` as a partition of the circle and return it together
    /// with the value index attached to each partition arc.
    fn partition_with_values(&self) -> Result<(ArcPartition, Vec<usize>), CliError> {
        let total: f64 = self.arcs.iter().map(|a| wrap_len(a.start, a.end)).sum();
        if (total - TAU).abs() > 1e-9 {
            return Err(CliError::Parse(format!(
                "step arcs must tile the circle; lengths sum to {total}, expected {TAU}"
            )));
        }
        let mut bps: Vec<f64> = self.arcs.iter().map(|a| wrap(a.start)).collect();
        bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let partition = ArcPartition::new(bps).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut order = Vec::with_capacity(partition.arc_count());
        for j in 0..partition.arc_count() {
            let mid = partition.arc(j).midpoint();
            let idx = self
                .arcs
                .iter()
                .position(|a| Arc::new(a.start, a.end).map(|w| w.contains(mid)).unwrap_or(false))
                .ok_or_else(|| {
                    CliError::Parse(format!("arcs leave a gap around angle {mid:.6}"))
                })?;
            order.push(idx);
        }
        Ok((partition, order))
    }

    fn step_target(&self) -> Result<StepUnimodular, CliError> {
        let (partition, order) = self.partition_with_values()?;
        let values = order.iter().map(|&i| self.matrix_value(i)).collect();
        StepUnimodular::new(partition, values).map_err(|e| CliError::Parse(e.to_string()))
    }

    fn bounded_target(&self) -> Result<BoundedStep, CliError> {
        let (partition, order) = self.partition_with_values()?;
        let values = order.iter().map(|&i| self.matrix_value(i)).collect();
        BoundedStep::new(partition, values).map_err(|e| CliError::Parse(e.to_string()))
    }

    fn scalar_two_valued_target(&self) -> Result<ScalarTarget, CliError> {
        ScalarTarget::new(self.arc_set()?, self.scalar_value(0))
            .map_err(|e| CliError::Parse(e.to_string()))
    }

    fn samples(&self) -> Vec<(f64, CMatrix)> {
        let m = self.values.len();
        (0..m)
            .map(|k| (k as f64 * TAU / m as f64, self.matrix_value(k)))
            .collect()
    }

    fn epsilon_quant(&self) -> f64 {
        self.config.epsilon_quant.unwrap_or(self.epsilon / 4.0)
    }
}

fn wrap(theta: f64) -> f64 {
    crate::blaschke::wrap_angle(theta)
}

fn wrap_len(start: f64, end: f64) -> f64 {
    let mut d = wrap(end) - wrap(start);
    if d <= 0.0 {
        d += TAU;
    }
    d
}

fn matrix_from_flat(flat: &[[f64; 2]], n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = flat[i * n + j];
        Complex64::new(re, im)
    })
}

fn matrix_to_flat(m: &CMatrix) -> Vec<[f64; 2]> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

pub fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let problem: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    problem.validate()?;
    Ok(problem)
}

// ---------------------------------------------------------------------------
// Approximant artifact
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlaschkeRepr {
    pub zeros: Vec<[f64; 2]>,
    pub constant: [f64; 2],
}

impl From<&FiniteBlaschke> for BlaschkeRepr {
    fn from(b: &FiniteBlaschke) -> Self {
        BlaschkeRepr {
            zeros: b.zeros().iter().map(|z| [z.re, z.im]).collect(),
            constant: [b.constant().re, b.constant().im],
        }
    }
}

/// One conjugated-diagonal inner function `V*·diag(B_i)·V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerRepr {
    pub conjugator: Vec<[f64; 2]>,
    pub diagonal: Vec<BlaschkeRepr>,
}

impl From<&ConjugatedDiagonalInner> for InnerRepr {
    fn from(inner: &ConjugatedDiagonalInner) -> Self {
        InnerRepr {
            conjugator: matrix_to_flat(inner.conjugator()),
            diagonal: inner.diagonal().iter().map(BlaschkeRepr::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientRepr {
    pub phi: InnerRepr,
    pub psi: InnerRepr,
}

/// On-disk approximant: one chain of quotients for unitary targets, two
/// chains (averaged and rescaled) for bounded targets, with one certificate
/// per chain. Floats round-trip exactly through the JSON encoding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproximantFile {
    pub kind: ProblemKind,
    pub dimension: usize,
    pub scale: f64,
    pub chains: Vec<Vec<QuotientRepr>>,
    pub certificates: Vec<Certificate>,
    pub quantization_bound: f64,
    pub total_bound: f64,
}

impl BlaschkeRepr {
    fn build(&self) -> Result<FiniteBlaschke, CliError> {
        let zeros = self.zeros.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        FiniteBlaschke::new(zeros, Complex64::new(self.constant[0], self.constant[1]))
            .map_err(|e| CliError::Parse(e.to_string()))
    }
}

impl InnerRepr {
    fn build(&self, n: usize) -> Result<ConjugatedDiagonalInner, CliError> {
        if self.conjugator.len() != n * n || self.diagonal.len() != n {
            return Err(CliError::Parse("inner factor has inconsistent dimensions".into()));
        }
        let v = matrix_from_flat(&self.conjugator, n);
        let diag = self.diagonal.iter().map(BlaschkeRepr::build).collect::<Result<_, _>>()?;
        ConjugatedDiagonalInner::new(v, diag).map_err(|e| CliError::Parse(e.to_string()))
    }
}

/// A reconstructed chain, ready for evaluation and re-certification.
pub struct BuiltChain {
    pub pairs: Vec<(ConjugatedDiagonalInner, ConjugatedDiagonalInner)>,
}

impl BuiltChain {
    pub fn eval(&self, theta: f64) -> CMatrix {
        let z = Complex64::from_polar(1.0, theta);
        let n = self.pairs[0].0.dimension();
        let mut acc = CMatrix::identity(n, n);
        for (phi, psi) in &self.pairs {
            acc = acc * phi.eval(z) * psi.eval(z).adjoint();
        }
        acc
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.pairs
            .iter()
            .map(|(phi, psi)| phi.lipschitz_bound() + psi.lipschitz_bound())
            .sum()
    }
}

impl ApproximantFile {
    pub fn build_chains(&self) -> Result<Vec<BuiltChain>, CliError> {
        if self.chains.is_empty() || self.chains.len() != self.certificates.len() {
            return Err(CliError::Parse(
                "approximant needs one certificate per chain".into(),
            ));
        }
        self.chains
            .iter()
            .map(|chain| {
                if chain.is_empty() {
                    return Err(CliError::Parse("empty quotient chain".into()));
                }
                let pairs = chain
                    .iter()
                    .map(|q| Ok((q.phi.build(self.dimension)?, q.psi.build(self.dimension)?)))
                    .collect::<Result<_, CliError>>()?;
                Ok(BuiltChain { pairs })
            })
            .collect()
    }

    /// Boundary value of the full approximant: the single chain for unitary
    /// kinds, the rescaled average of the two chains for bounded targets.
    pub fn eval(chains: &[BuiltChain], scale: f64, theta: f64) -> CMatrix {
        if chains.len() == 1 {
            chains[0].eval(theta)
        } else {
            let sum = chains.iter().map(|c| c.eval(theta)).reduce(|a, b| a + b).unwrap();
            sum.scale(scale / chains.len() as f64)
        }
    }

    /// Per-quotient degrees `phi + psi`, across all chains in order.
    pub fn degrees(&self) -> Vec<usize> {
        self.chains
            .iter()
            .flat_map(|chain| {
                chain.iter().map(|q| {
                    let d = |inner: &InnerRepr| -> usize {
                        inner.diagonal.iter().map(|b| b.zeros.len()).sum()
                    };
                    d(&q.phi) + d(&q.psi)
                })
            })
            .collect()
    }

    pub fn exceptional_set(&self) -> ArcSet {
        let arcs = self
            .certificates
            .iter()
            .flat_map(|c| c.exceptional.iter())
            .filter_map(|a| Arc::new(a.start, a.end).ok())
            .collect();
        ArcSet::from_arcs(arcs)
    }

    pub fn bound(&self) -> f64 {
        self.total_bound
    }

    pub fn measure(&self) -> f64 {
        self.exceptional_set().measure()
    }
}

fn quotient_repr(q: &MatrixQuotient) -> QuotientRepr {
    QuotientRepr {
        phi: InnerRepr::from(&q.phi),
        psi: InnerRepr::from(&q.psi),
    }
}

fn chain_repr(chain: &QuotientChain) -> Vec<QuotientRepr> {
    chain.quotients.iter().map(quotient_repr).collect()
}

fn scalar_inner(b: &FiniteBlaschke) -> InnerRepr {
    InnerRepr {
        conjugator: vec![[1.0, 0.0]],
        diagonal: vec![BlaschkeRepr::from(b)],
    }
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

fn map_solver(e: SolverError) -> CliError {
    match e {
        SolverError::BudgetExhausted { bound, epsilon, .. } => CliError::Certification(format!(
            "FAIL bound={bound} epsilon={epsilon}: synthesized quotient misses the error budget"
        )),
        other => CliError::Synthesis(other.to_string()),
    }
}

fn map_pipeline(e: PipelineError) -> CliError {
    match e {
        PipelineError::ChainBudget { bound, epsilon } => CliError::Certification(format!(
            "FAIL bound={bound} epsilon={epsilon}: chain misses the error budget"
        )),
        PipelineError::Channel { ref source, .. }
            if matches!(**source, SolverError::BudgetExhausted { .. }) =>
        {
            CliError::Certification(format!("FAIL {e}"))
        }
        other => CliError::Synthesis(other.to_string()),
    }
}

/// Run synthesis for a parsed problem and package the result as an artifact.
pub fn synthesize_problem(problem: &ProblemFile) -> Result<ApproximantFile, CliError> {
    let cfg = problem.synthesis_config();
    match problem.kind {
        ProblemKind::ScalarTwoValued => {
            let target = problem.scalar_two_valued_target()?;
            let q = solver::synthesize_two_valued(&target, &cfg).map_err(map_solver)?;
            Ok(ApproximantFile {
                kind: problem.kind,
                dimension: 1,
                scale: 1.0,
                chains: vec![vec![QuotientRepr {
                    phi: scalar_inner(&q.numerator),
                    psi: scalar_inner(&q.denominator),
                }]],
                total_bound: q.certified_error,
                certificates: vec![q.certificate],
                quantization_bound: 0.0,
            })
        }
        ProblemKind::ScalarStep => {
            let target = problem.step_target()?;
            let q = solver::synthesize_step_scalar(&target, &cfg).map_err(map_solver)?;
            Ok(ApproximantFile {
                kind: problem.kind,
                dimension: 1,
                scale: 1.0,
                chains: vec![vec![QuotientRepr {
                    phi: scalar_inner(&q.numerator),
                    psi: scalar_inner(&q.denominator),
                }]],
                total_bound: q.certified_error,
                certificates: vec![q.certificate],
                quantization_bound: 0.0,
            })
        }
        ProblemKind::MatrixTwoValued => {
            let e = problem.arc_set()?;
            let t = problem.matrix_value(0);
            let q = pipeline::approximate_two_valued(&e, &t, &cfg).map_err(map_pipeline)?;
            Ok(ApproximantFile {
                kind: problem.kind,
                dimension: problem.dimension,
                scale: 1.0,
                chains: vec![vec![quotient_repr(&q)]],
                total_bound: q.certified_error,
                certificates: vec![q.certificate],
                quantization_bound: 0.0,
            })
        }
        ProblemKind::MatrixStep => {
            let target = problem.step_target()?;
            let chain = pipeline::approximate_step(&target, &cfg).map_err(map_pipeline)?;
            Ok(ApproximantFile {
                kind: problem.kind,
                dimension: problem.dimension,
                scale: 1.0,
                chains: vec![chain_repr(&chain)],
                total_bound: chain.certified_error,
                certificates: vec![chain.certificate],
                quantization_bound: 0.0,
            })
        }
        ProblemKind::MatrixSampled => {
            let samples = problem.samples();
            let SampledApproximation {
                chain,
                quantization_bound,
                total_bound,
                ..
            } = pipeline::approximate_sampled(&samples, problem.epsilon_quant(), &cfg)
                .map_err(map_pipeline)?;
            Ok(ApproximantFile {
                kind: problem.kind,
                dimension: problem.dimension,
                scale: 1.0,
                chains: vec![chain_repr(&chain)],
                certificates: vec![chain.certificate],
                quantization_bound,
                total_bound,
            })
        }
        ProblemKind::BoundedStep => {
            let target = problem.bounded_target()?;
            let approx = pipeline::approximate_bounded(&target, &cfg).map_err(map_pipeline)?;
            let [c1, c2] = approx.chains;
            Ok(ApproximantFile {
                kind: problem.kind,
                dimension: problem.dimension,
                scale: approx.scale,
                chains: vec![chain_repr(&c1), chain_repr(&c2)],
                certificates: vec![c1.certificate, c2.certificate],
                quantization_bound: 0.0,
                total_bound: approx.combined_bound,
            })
        }
    }
}

/// Certificate health notes that `--strict` escalates to failures: passing
/// but with less than 10% of headroom left in either budget.
pub fn certificate_warnings(approx: &ApproximantFile, problem: &ProblemFile) -> Vec<String> {
    let mut warnings = Vec::new();
    if approx.total_bound > 0.9 * problem.epsilon {
        warnings.push(format!(
            "bound {} uses more than 90% of epsilon {}",
            approx.total_bound, problem.epsilon
        ));
    }
    let measure = approx.measure();
    if measure > 0.9 * problem.delta {
        warnings.push(format!(
            "exceptional measure {} uses more than 90% of delta {}",
            measure, problem.delta
        ));
    }
    warnings
}

fn summary_line(status: &str, approx: &ApproximantFile) -> String {
    let degrees: Vec<String> = approx.degrees().iter().map(|d| d.to_string()).collect();
    format!(
        "{status} bound={} measure={} degrees={}",
        approx.bound(),
        approx.measure(),
        degrees.join(",")
    )
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let io = |e: std::io::Error| CliError::Parse(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// `synthesize <problem.json> -o <dir>`: run synthesis, write
/// `approximant.json` and `certificate.json` into `out_dir`, return the
/// summary line. With `strict`, certificate warnings turn a PASS into a
/// failure after the artifacts are written.
pub fn run_synthesize(
    problem_path: &Path,
    out_dir: &Path,
    strict: bool,
) -> Result<String, CliError> {
    let problem = load_problem(problem_path)?;
    let approx = synthesize_problem(&problem)?;

    let approx_json = serde_json::to_string_pretty(&approx)
        .map_err(|e| CliError::Synthesis(e.to_string()))?;
    let cert_json = serde_json::to_string_pretty(&approx.certificates)
        .map_err(|e| CliError::Synthesis(e.to_string()))?;
    write_atomic(&out_dir.join("approximant.json"), &approx_json)?;
    write_atomic(&out_dir.join("certificate.json"), &cert_json)?;

    let warnings = certificate_warnings(&approx, &problem);
    if strict && !warnings.is_empty() {
        return Err(CliError::Certification(format!(
            "{} strict: {}",
            summary_line("FAIL", &approx),
            warnings.join("; ")
        )));
    }
    Ok(summary_line("PASS", &approx))
}

/// The step function each chain of an approximant is certified against.
fn chain_targets(problem: &ProblemFile) -> Result<Vec<StepUnimodular>, CliError> {
    match problem.kind {
        ProblemKind::ScalarTwoValued => Ok(vec![problem
            .scalar_two_valued_target()?
            .as_step()
            .map_err(|e| CliError::Parse(e.to_string()))?]),
        ProblemKind::ScalarStep | ProblemKind::MatrixStep => Ok(vec![problem.step_target()?]),
        ProblemKind::MatrixTwoValued => {
            let e = problem.arc_set()?;
            let t = problem.matrix_value(0);
            let target = pipeline::two_valued_step_target(&e, &t)
                .map_err(|err| CliError::Parse(err.to_string()))?;
            Ok(vec![target])
        }
        ProblemKind::MatrixSampled => {
            let quantized = crate::model::quantize_range(&problem.samples(), problem.epsilon_quant())
                .map_err(|e| CliError::Parse(e.to_string()))?;
            Ok(vec![quantized])
        }
        ProblemKind::BoundedStep => {
            let target = problem.bounded_target()?;
            let sup = target.sup_norm();
            let scale = if sup < 1e-12 { 1.0 } else { sup };
            let mut firsts = Vec::new();
            let mut seconds = Vec::new();
            for v in target.values() {
                let (u1, u2) = pipeline::decompose_contraction(&v.scale(1.0 / scale))
                    .map_err(|e| CliError::Parse(e.to_string()))?;
                firsts.push(u1);
                seconds.push(u2);
            }
            let g1 = StepUnimodular::new(target.partition().clone(), firsts)
                .map_err(|e| CliError::Parse(e.to_string()))?;
            let g2 = StepUnimodular::new(target.partition().clone(), seconds)
                .map_err(|e| CliError::Parse(e.to_string()))?;
            Ok(vec![g1, g2])
        }
    }
}

pub fn load_approximant(path: &Path) -> Result<ApproximantFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// `verify <approx.json> <problem.json>`: rebuild every chain, re-derive each
/// certificate's bound on a twice-finer grid with fresh constants, and accept
/// only if all recorded certificates pass and the rechecks agree.
pub fn run_verify(approx_path: &Path, problem_path: &Path) -> Result<String, CliError> {
    let approx = load_approximant(approx_path)?;
    let problem = load_problem(problem_path)?;
    if approx.kind != problem.kind || approx.dimension != problem.dimension {
        return Err(CliError::Parse(
            "approximant does not belong to this problem (kind or dimension mismatch)".into(),
        ));
    }
    let chains = approx.build_chains()?;
    let targets = chain_targets(&problem)?;
    if targets.len() != chains.len() {
        return Err(CliError::Parse(format!(
            "expected {} chains for this problem kind, found {}",
            targets.len(),
            chains.len()
        )));
    }
    for (i, ((chain, target), cert)) in chains
        .iter()
        .zip(targets.iter())
        .zip(approx.certificates.iter())
        .enumerate()
    {
        if !cert.pass {
            return Err(CliError::Certification(format!(
                "FAIL chain {i}: recorded certificate did not pass"
            )));
        }
        let exceptional = ArcSet::from_arcs(
            cert.exceptional
                .iter()
                .filter_map(|a| Arc::new(a.start, a.end).ok())
                .collect(),
        );
        let error_at = |theta: f64| op_norm(&(chain.eval(theta) - target.eval(theta)));
        let ok = certify::independent_recheck(cert, error_at, chain.lipschitz_bound(), &exceptional);
        if !ok {
            return Err(CliError::Certification(format!(
                "FAIL chain {i}: independent recheck exceeded the recorded bound"
            )));
        }
    }
    Ok(summary_line("PASS", &approx))
}

/// `plot-data <approx.json> <problem.json> -n <grid>`: CSV with columns
/// theta, target_re, target_im, approx_re, approx_im, pointwise_error,
/// in_exceptional. For matrix targets the re/im columns report the (0,0)
/// entry; pointwise_error is always the operator norm of the difference.
pub fn run_plotdata(
    approx_path: &Path,
    problem_path: &Path,
    grid: usize,
) -> Result<String, CliError> {
    if grid < 2 {
        return Err(CliError::Parse(format!("grid must have at least 2 points, got {grid}")));
    }
    let approx = load_approximant(approx_path)?;
    let problem = load_problem(problem_path)?;
    let chains = approx.build_chains()?;
    let exceptional = approx.exceptional_set();

    enum Target {
        Step(StepUnimodular),
        Bounded(BoundedStep),
    }
    let target = match problem.kind {
        ProblemKind::BoundedStep => Target::Bounded(problem.bounded_target()?),
        ProblemKind::MatrixSampled => Target::Step(
            crate::model::quantize_range(&problem.samples(), problem.epsilon_quant())
                .map_err(|e| CliError::Parse(e.to_string()))?,
        ),
        _ => Target::Step(chain_targets(&problem)?.remove(0)),
    };

    let mut out = String::new();
    out.push_str("theta,target_re,target_im,approx_re,approx_im,pointwise_error,in_exceptional\n");
    for k in 0..grid {
        let theta = k as f64 * TAU / grid as f64;
        let t = match &target {
            Target::Step(s) => s.eval(theta).clone(),
            Target::Bounded(b) => b.eval(theta).clone(),
        };
        let a = ApproximantFile::eval(&chains, approx.scale, theta);
        let err = op_norm(&(&a - &t));
        let flag = i32::from(exceptional.contains(theta));
        writeln!(
            out,
            "{theta},{},{},{},{},{err},{flag}",
            t[(0, 0)].re,
            t[(0, 0)].im,
            a[(0, 0)].re,
            a[(0, 0)].im,
        )
        .expect("string write");
    }
    Ok(out)
}
