//! Matrix-valued inner functions: Blaschke-Potapov products, conjugated
//! diagonal inner functions, canonical-form conversion and innerness checks.

use crate::blaschke::{wrap_signed, FiniteBlaschke};
use crate::linalg::{op_norm, unitarity_defect, CMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

pub const PROJECTION_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PotapovError {
    #[error("matrix is not a Hermitian projection (defect {0})")]
    NotProjection(f64),
    #[error("matrix is not unitary (defect {0})")]
    NotUnitary(f64),
    #[error("zero {0} is not in the open unit disc")]
    ZeroOutOfDisc(Complex64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("grid too coarse for winding: phase step {0} at index {1}")]
    GridTooCoarse(f64, usize),
    #[error(transparent)]
    Blaschke(#[from] crate::blaschke::BlaschkeError),
}

/// One Blaschke-Potapov factor `b_α(z)·P + (I - P)` with `P` a Hermitian
/// projection.
#[derive(Debug, Clone)]
pub struct PotapovFactor {
    alpha: Complex64,
    projection: CMatrix,
}

impl PotapovFactor {
    /// Validate the projection, re-projecting (Hermitian symmetrization plus
    /// eigenvalue rounding to {0, 1}) when drift exceeds the tolerance.
    pub fn new(alpha: Complex64, projection: CMatrix) -> Result<Self, PotapovError> {
        if alpha.norm() >= 1.0 {
            return Err(PotapovError::ZeroOutOfDisc(alpha));
        }
        let defect = projection_defect(&projection);
        let projection = if defect <= PROJECTION_TOL {
            projection
        } else {
            let repaired = reproject(&projection)?;
            let d = projection_defect(&repaired);
            if d > PROJECTION_TOL {
                return Err(PotapovError::NotProjection(d));
            }
            repaired
        };
        Ok(Self { alpha, projection })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn projection(&self) -> &CMatrix {
        &self.projection
    }

    pub fn rank(&self) -> usize {
        self.projection
            .diagonal()
            .iter()
            .map(|c| c.re)
            .sum::<f64>()
            .round() as usize
    }

    pub fn dimension(&self) -> usize {
        self.projection.nrows()
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let n = self.dimension();
        let b = crate::blaschke::factor_eval(self.alpha, z).expect("alpha validated");
        let id = CMatrix::identity(n, n);
        &id + (&self.projection * (b - Complex64::new(1.0, 0.0)))
    }
}

fn projection_defect(p: &CMatrix) -> f64 {
    let herm = op_norm(&(p - p.adjoint()));
    let idem = op_norm(&(p * p - p));
    herm.max(idem)
}

fn reproject(p: &CMatrix) -> Result<CMatrix, PotapovError> {
    let herm = (p + p.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let n = p.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        if (lam - 1.0).abs() > 0.25 && lam.abs() > 0.25 {
            return Err(PotapovError::NotProjection(
                (lam - lam.round()).abs(),
            ));
        }
        if lam.round() == 1.0 {
            let v = eig.eigenvectors.column(k);
            out += v * v.adjoint();
        }
    }
    Ok(out)
}

/// `U · ∏_m (b_{α_m}(z)·P_m + (I - P_m))`, factors applied in listed order.
#[derive(Debug, Clone)]
pub struct PotapovProduct {
    unitary: CMatrix,
    factors: Vec<PotapovFactor>,
}

impl PotapovProduct {
    pub fn new(unitary: CMatrix, factors: Vec<PotapovFactor>) -> Result<Self, PotapovError> {
        let d = unitarity_defect(&unitary);
        if d > UNITARY_TOL {
            return Err(PotapovError::NotUnitary(d));
        }
        let n = unitary.nrows();
        for f in &factors {
            if f.dimension() != n {
                return Err(PotapovError::DimensionMismatch(n, f.dimension()));
            }
        }
        Ok(Self { unitary, factors })
    }

    pub fn constant(unitary: CMatrix) -> Result<Self, PotapovError> {
        Self::new(unitary, Vec::new())
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn factors(&self) -> &[PotapovFactor] {
        &self.factors
    }

    pub fn dimension(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let mut acc = self.unitary.clone();
        for f in &self.factors {
            acc = acc * f.eval(z);
        }
        acc
    }

    /// Sum of factor ranks; equals the winding number of the determinant.
    pub fn total_rank(&self) -> usize {
        self.factors.iter().map(PotapovFactor::rank).sum()
    }
}

/// `V* · diag(B_1(z), …, B_N(z)) · V` with scalar finite Blaschke products on
/// the diagonal.
#[derive(Debug, Clone)]
pub struct ConjugatedDiagonalInner {
    v: CMatrix,
    diagonal: Vec<FiniteBlaschke>,
}

impl ConjugatedDiagonalInner {
    pub fn new(v: CMatrix, diagonal: Vec<FiniteBlaschke>) -> Result<Self, PotapovError> {
        let d = unitarity_defect(&v);
        if d > UNITARY_TOL {
            return Err(PotapovError::NotUnitary(d));
        }
        if v.nrows() != diagonal.len() {
            return Err(PotapovError::DimensionMismatch(v.nrows(), diagonal.len()));
        }
        Ok(Self { v, diagonal })
    }

    pub fn conjugator(&self) -> &CMatrix {
        &self.v
    }

    pub fn diagonal(&self) -> &[FiniteBlaschke] {
        &self.diagonal
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let n = self.dimension();
        let diag = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i].eval(z)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        self.v.adjoint() * diag * &self.v
    }

    pub fn total_degree(&self) -> usize {
        self.diagonal.iter().map(FiniteBlaschke::degree).sum()
    }

    /// Bound on `‖d/dθ Φ(e^{iθ})‖`: the worst diagonal channel.
    pub fn lipschitz_bound(&self) -> f64 {
        self.diagonal
            .iter()
            .map(FiniteBlaschke::lipschitz_bound)
            .fold(0.0, f64::max)
    }

    /// Expand into a Blaschke-Potapov product. Diagonal entries are expanded
    /// left to right, entry index outer, zero index inner; the diagonal
    /// constants are absorbed into the leading unitary.
    pub fn to_potapov_form(&self) -> Result<PotapovProduct, PotapovError> {
        let n = self.dimension();
        let diag_c = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i].constant()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let unitary = self.v.adjoint() * diag_c * &self.v;
        let mut factors = Vec::new();
        for (i, b) in self.diagonal.iter().enumerate() {
            // coordinate projection e_i e_i* conjugated by V
            let col = self.v.row(i).adjoint();
            let proj = &col * col.adjoint();
            for &alpha in b.zeros() {
                factors.push(PotapovFactor::new(alpha, proj.clone())?);
            }
        }
        PotapovProduct::new(unitary, factors)
    }
}

/// A matrix-valued inner function in any of the supported forms.
#[derive(Debug, Clone)]
pub enum MatrixInner {
    Potapov(PotapovProduct),
    Conjugated(ConjugatedDiagonalInner),
    Product(Vec<MatrixInner>),
}

/// Innerness report: boundary unitarity defect and interior norm excess.
#[derive(Debug, Clone)]
pub struct InnerReport {
    pub boundary_defect: f64,
    pub interior_excess: f64,
    pub tol: f64,
    pub pass: bool,
}

impl MatrixInner {
    pub fn dimension(&self) -> usize {
        match self {
            MatrixInner::Potapov(p) => p.dimension(),
            MatrixInner::Conjugated(c) => c.dimension(),
            MatrixInner::Product(fs) => fs[0].dimension(),
        }
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        match self {
            MatrixInner::Potapov(p) => p.eval(z),
            MatrixInner::Conjugated(c) => c.eval(z),
            MatrixInner::Product(fs) => {
                let mut acc = fs[0].eval(z);
                for f in &fs[1..] {
                    acc = acc * f.eval(z);
                }
                acc
            }
        }
    }

    pub fn boundary_eval(&self, theta: f64) -> CMatrix {
        self.eval(Complex64::from_polar(1.0, theta))
    }

    /// Pointwise product `z ↦ Φ₁(z)·Φ₂(z)`; a product of inner functions is
    /// inner.
    pub fn multiply(self, other: MatrixInner) -> Result<MatrixInner, PotapovError> {
        if self.dimension() != other.dimension() {
            return Err(PotapovError::DimensionMismatch(
                self.dimension(),
                other.dimension(),
            ));
        }
        let mut parts = match self {
            MatrixInner::Product(fs) => fs,
            f => vec![f],
        };
        match other {
            MatrixInner::Product(fs) => parts.extend(fs),
            f => parts.push(f),
        }
        Ok(MatrixInner::Product(parts))
    }

    /// Winding number of `θ ↦ det Φ(e^{iθ})` accumulated over the grid.
    pub fn determinant_winding(&self, grid: &[f64]) -> Result<i64, PotapovError> {
        let mut total = 0.0;
        let mut prev = self.boundary_eval(grid[0]).determinant().arg();
        for k in 1..=grid.len() {
            let theta = if k < grid.len() {
                grid[k]
            } else {
                grid[0] + std::f64::consts::TAU
            };
            let cur = self.boundary_eval(theta).determinant().arg();
            let step = wrap_signed(cur - prev);
            if step.abs() >= PI * 0.999 {
                return Err(PotapovError::GridTooCoarse(step, k));
            }
            total += step;
            prev = cur;
        }
        Ok((total / std::f64::consts::TAU).round() as i64)
    }

    /// Expected determinant winding from the structure: Σ rank(P_m) for a
    /// Potapov product, Σ degrees for a conjugated diagonal.
    pub fn structural_winding(&self) -> usize {
        match self {
            MatrixInner::Potapov(p) => p.total_rank(),
            MatrixInner::Conjugated(c) => c.total_degree(),
            MatrixInner::Product(fs) => fs.iter().map(MatrixInner::structural_winding).sum(),
        }
    }

    /// Check two-sided innerness: unitary on the boundary grid, contractive
    /// at the interior samples.
    pub fn check_inner(
        &self,
        boundary_grid: &[f64],
        interior_samples: &[Complex64],
        tol: f64,
    ) -> InnerReport {
        let boundary_defect = boundary_grid
            .iter()
            .map(|&t| unitarity_defect(&self.boundary_eval(t)))
            .fold(0.0, f64::max);
        let interior_excess = interior_samples
            .iter()
            .map(|&z| (op_norm(&self.eval(z)) - 1.0).max(0.0))
            .fold(0.0, f64::max);
        InnerReport {
            boundary_defect,
            interior_excess,
            tol,
            pass: boundary_defect <= tol && interior_excess <= tol,
        }
    }
}
