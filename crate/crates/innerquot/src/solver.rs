//! Synthesis of scalar Blaschke-product quotients approximating two-valued
//! (and, by composition, arbitrary step) unimodular targets on the circle.
//!
//! The boundary argument of a finite Blaschke product is an increasing
//! function climbing `2π` per zero, each climb concentrated near the zero's
//! angle at a scale set by its distance to the circle. The quotient's
//! boundary argument is the difference of the numerator and denominator
//! lifts, so synthesis is an argument-matching problem: place zeros so that
//! the difference tracks the target's piecewise-constant argument outside
//! small windows around its jumps.
//!
//! The initial layout distributes zeros at the quantiles of a smoothed
//! target lift: a flat carrier shared by both sides, extra density stacked
//! into each jump window, and the jump mass itself routed to the numerator
//! (positive jumps) or denominator (negative jumps). A monotone coordinate
//! search over each zero's radius and angle then minimizes the maximum
//! wrapped argument error on a grid, escalating the degree with additional
//! carrier pairs when progress stalls.

use crate::blaschke::{step_lift, wrap_angle, wrap_signed, FiniteBlaschke};
use crate::certify::{self, Certificate};
use crate::model::{Arc, ArcPartition, ArcSet, ModelError, StepUnimodular};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("epsilon must lie in (0, 2), got {0}")]
    BadEpsilon(f64),
    #[error("delta must be positive, got {0}")]
    BadDelta(f64),
    #[error("off-arc value must be unimodular, |alpha| = {0}")]
    AlphaNotUnimodular(f64),
    #[error(
        "arc of length {len} is too short to certify a plateau: need at least \
         4x the exceptional half-width {half_width}"
    )]
    ArcTooShort { len: f64, half_width: f64 },
    #[error("synthesis budget exhausted; best certified bound {bound} (target epsilon {epsilon})")]
    BudgetExhausted {
        bound: f64,
        epsilon: f64,
        best: Box<QuotientApproximant>,
    },
    #[error(transparent)]
    Certify(#[from] certify::CertifyError),
    #[error(transparent)]
    Blaschke(#[from] crate::blaschke::BlaschkeError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Tuning knobs for synthesis. Serialized into certificate hashes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Target sup-norm error outside the exceptional set.
    pub epsilon: f64,
    /// Maximum total measure of the exceptional set.
    pub delta: f64,
    /// Cap on the degree of each of the numerator and denominator.
    pub max_degree: usize,
    /// Grid points used by the optimizer's objective.
    pub grid_density: usize,
    /// Coordinate-search sweep budget.
    pub max_iterations: usize,
    /// Reserved for randomized variants; synthesis itself is deterministic.
    pub seed: u64,
    /// Minimum distance of any zero from the unit circle.
    pub margin: f64,
}

impl SynthesisConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            max_degree: 320,
            grid_density: 8192,
            max_iterations: 60,
            seed: 0,
            margin: 1e-6,
        }
    }

    pub(crate) fn with_budget(&self, epsilon: f64, delta: f64) -> Self {
        let mut c = self.clone();
        c.epsilon = epsilon;
        c.delta = delta;
        c
    }
}

/// A two-valued scalar target: 1 on the arcs of `plateau`, `off_value` on the
/// complement. Jump representatives are taken in `(-π, π]` with winding zero.
#[derive(Debug, Clone)]
pub struct ScalarTarget {
    plateau: ArcSet,
    off_value: Complex64,
}

impl ScalarTarget {
    pub fn new(plateau: ArcSet, off_value: Complex64) -> Result<Self, SolverError> {
        let n = off_value.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(SolverError::AlphaNotUnimodular(n));
        }
        Ok(Self { plateau, off_value })
    }

    pub fn plateau(&self) -> &ArcSet {
        &self.plateau
    }

    pub fn off_value(&self) -> Complex64 {
        self.off_value
    }

    pub fn value_at(&self, theta: f64) -> Complex64 {
        if self.plateau.contains(theta) {
            Complex64::new(1.0, 0.0)
        } else {
            self.off_value
        }
    }

    fn is_trivial(&self) -> bool {
        (self.off_value - Complex64::new(1.0, 0.0)).norm() < 1e-12
            || (self.plateau.measure() - TAU).abs() < 1e-12
    }

    /// Jumps `(angle, size)` crossing counterclockwise, minimal-magnitude
    /// representatives summing to zero around the circle.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        if self.is_trivial() || self.plateau.is_empty() {
            return Vec::new();
        }
        let a = self.off_value.arg();
        let mut out = Vec::new();
        for arc in self.plateau.arcs() {
            out.push((wrap_angle(arc.start), -a)); // entering the 1-plateau
            out.push((wrap_angle(arc.end), a)); // leaving it
        }
        out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        out
    }

    /// The target as a scalar step function (for certification).
    pub fn as_step(&self) -> Result<StepUnimodular, SolverError> {
        if self.plateau.is_empty() {
            return Ok(StepUnimodular::scalar(
                ArcPartition::new(vec![0.0])?,
                vec![self.off_value],
            )?);
        }
        if self.is_trivial() && (self.plateau.measure() - TAU).abs() < 1e-12 {
            return Ok(StepUnimodular::scalar(
                ArcPartition::new(vec![0.0])?,
                vec![Complex64::new(1.0, 0.0)],
            )?);
        }
        let mut bps: Vec<f64> = Vec::new();
        for arc in self.plateau.arcs() {
            bps.push(wrap_angle(arc.start));
            bps.push(wrap_angle(arc.end));
        }
        bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let partition = ArcPartition::new(bps)?;
        let values = (0..partition.arc_count())
            .map(|j| {
                let mid = partition.arc(j).midpoint();
                self.value_at(mid)
            })
            .collect();
        Ok(StepUnimodular::scalar(partition, values)?)
    }
}

/// A certified quotient of finite Blaschke products.
#[derive(Debug, Clone)]
pub struct QuotientApproximant {
    pub numerator: FiniteBlaschke,
    pub denominator: FiniteBlaschke,
    pub exceptional: ArcSet,
    pub certified_error: f64,
    pub certificate: Certificate,
}

/// Zero layout manipulated by the optimizer: polar coordinates per side plus
/// a global phase on the numerator constant.
#[derive(Debug, Clone)]
pub struct ZeroLayout {
    pub numerator: Vec<(f64, f64)>, // (radius, angle)
    pub denominator: Vec<(f64, f64)>,
    pub phase: f64,
}

impl ZeroLayout {
    pub fn degree(&self) -> usize {
        self.numerator.len().max(self.denominator.len())
    }

    pub fn build(
        &self,
        margin: f64,
    ) -> Result<(FiniteBlaschke, FiniteBlaschke), crate::blaschke::BlaschkeError> {
        // layout radii are floored at `margin` exactly; validate half a notch
        // inside so float rounding in the polar conversion cannot reject them
        let margin = margin * 0.5;
        let num = FiniteBlaschke::with_margin(
            self.numerator
                .iter()
                .map(|&(r, a)| Complex64::from_polar(r, a))
                .collect(),
            Complex64::from_polar(1.0, self.phase),
            margin,
        )?;
        let den = FiniteBlaschke::with_margin(
            self.denominator
                .iter()
                .map(|&(r, a)| Complex64::from_polar(r, a))
                .collect(),
            Complex64::new(1.0, 0.0),
            margin,
        )?;
        Ok((num, den))
    }
}

/// Piecewise-constant lift of the target argument sampled on a grid. Jumps
/// take their `(-π, π]` representatives; the lift is flat between them, so
/// the total increase over the circle is zero.
pub fn target_argument_trace(target: &ScalarTarget, grid: &[f64]) -> crate::blaschke::ArgumentTrace {
    let jumps = target.jumps();
    let values = grid
        .iter()
        .map(|&t| {
            let t = wrap_angle(t);
            let base = if grid.is_empty() {
                0.0
            } else {
                target.value_at(wrap_angle(grid[0])).arg()
            };
            let start = wrap_angle(grid[0]);
            let passed: f64 = jumps
                .iter()
                .filter(|&&(b, _)| {
                    // jumps in (start, t] going counterclockwise from start
                    let rel = wrap_angle(b - start);
                    rel > 0.0 && rel <= wrap_angle(t - start)
                })
                .map(|&(_, w)| w)
                .sum();
            base + passed
        })
        .collect();
    crate::blaschke::ArgumentTrace {
        grid: grid.to_vec(),
        values,
    }
}

// ---------------------------------------------------------------------------
// initial layout
// ---------------------------------------------------------------------------

/// One smoothed step in the lift specification.
#[derive(Debug, Clone, Copy)]
struct LiftStep {
    angle: f64,
    /// rise per full circle, in units of 2π (one zero = 1.0)
    weight: f64,
    radius: f64,
}

/// Increasing lift `G(θ) = slope·θ + Σ weight·step(θ - angle)` in zero units.
#[derive(Debug, Clone)]
struct LiftSpec {
    slope: f64,
    steps: Vec<LiftStep>,
}

impl LiftSpec {
    fn value(&self, theta: f64) -> f64 {
        let mut v = self.slope * theta;
        for s in &self.steps {
            v += s.weight * step_lift(s.radius, theta - s.angle) / TAU;
        }
        v
    }

    fn derivative(&self, theta: f64) -> f64 {
        let mut v = self.slope;
        for s in &self.steps {
            v += s.weight * crate::blaschke::poisson_kernel(s.radius, theta - s.angle) / TAU;
        }
        v
    }

    fn rise(&self) -> f64 {
        self.value(TAU) - self.value(0.0)
    }

    /// Solve `G(θ) = level` by bisection on `[0, 2π]`.
    fn quantile(&self, level: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = TAU;
        let g0 = self.value(0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.value(mid) - g0 < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Zeros at the quantiles of the lift: angle where the lift crosses each
    /// half-integer level, radius from the local quantile spacing.
    fn place_zeros(&self, min_width: f64) -> Vec<(f64, f64)> {
        let count = self.rise().round() as usize;
        (0..count)
            .map(|k| {
                let angle = self.quantile(k as f64 + 0.5);
                let spacing = 1.0 / self.derivative(angle);
                let width = spacing.clamp(min_width, 0.35);
                (1.0 - width, wrap_angle(angle))
            })
            .collect()
    }
}

/// Deterministic warm start: flat carrier on both sides, congestion stacks
/// at every jump window on both sides, and each jump's mass routed to the
/// numerator (positive) or denominator (negative) as a sharp step.
pub fn initialize_zero_layout(target: &ScalarTarget, cfg: &SynthesisConfig) -> ZeroLayout {
    let jumps = target.jumps();
    if jumps.is_empty() {
        return ZeroLayout {
            numerator: Vec::new(),
            denominator: Vec::new(),
            phase: 0.0,
        };
    }
    let half_width = exceptional_half_width(target, cfg);

    // carrier sized so every plateau holds several carrier zeros
    let shortest = target
        .plateau
        .arcs()
        .iter()
        .chain(target.plateau.complement().arcs())
        .map(Arc::length)
        .fold(TAU, f64::min);
    let carrier = (16.0f64).max((10.0 * PI / shortest).ceil()) as usize;

    // congestion cascade: density stacked at each breakpoint with kernel
    // widths shrinking geometrically toward the jump, identical on both sides
    // so it cancels in the quotient. The displacement carrying the jump is
    // then borne by zeros whose kernels narrow with their distance to the
    // breakpoint, which keeps the tail leaked across the window small.
    // ratio-2 levels with weight 3 give quantile spacing ~ x/2 at distance x
    // from the breakpoint, so transition kernels fit inside the window
    let cascade_weight = 3.0;
    let mut cascade_widths = Vec::new();
    let mut w = (half_width / 3.0).max(cfg.margin);
    while w < shortest / 4.0 {
        cascade_widths.push(w);
        w *= 2.0;
    }
    if cascade_widths.is_empty() {
        cascade_widths.push((half_width / 3.0).max(cfg.margin));
    }
    // jump steps: sharp enough that the quantile shift completes well inside
    // the window
    let max_jump = jumps.iter().map(|&(_, w)| w.abs()).fold(0.0, f64::max);
    let sharp_width =
        (cfg.epsilon * PI * half_width / (20.0 * (1.0 + max_jump))).max(cfg.margin);
    let sharp_radius = 1.0 - sharp_width.min(half_width / 6.0);

    let positive_mass: f64 = jumps.iter().map(|&(_, w)| w.max(0.0)).sum::<f64>() / TAU;
    let congestion_mass = cascade_weight * cascade_widths.len() as f64 * jumps.len() as f64;
    // fractional slope padding both sides up to an integer total rise
    let raw_rise = carrier as f64 + congestion_mass + positive_mass;
    let pad = raw_rise.ceil() - raw_rise;
    let slope = (carrier as f64 + pad) / TAU;

    let mut num_steps = Vec::new();
    let mut den_steps = Vec::new();
    for &(beta, w) in &jumps {
        for &cw in &cascade_widths {
            let step = LiftStep {
                angle: beta,
                weight: cascade_weight,
                radius: 1.0 - cw,
            };
            num_steps.push(step);
            den_steps.push(step);
        }
        let step = LiftStep {
            angle: beta,
            weight: w.abs() / TAU,
            radius: sharp_radius,
        };
        if w > 0.0 {
            num_steps.push(step);
        } else {
            den_steps.push(step);
        }
    }
    let num_spec = LiftSpec {
        slope,
        steps: num_steps,
    };
    let den_spec = LiftSpec {
        slope,
        steps: den_steps,
    };
    let min_width = min_zero_width(target, cfg);
    ZeroLayout {
        numerator: num_spec.place_zeros(min_width),
        denominator: den_spec.place_zeros(min_width),
        phase: 0.0,
    }
}

/// Objective grid sized so the narrowest useful kernels (a small fraction of
/// the exceptional window) are still resolved by several grid points.
fn objective_grid_size(target: &ScalarTarget, cfg: &SynthesisConfig) -> usize {
    let hw = exceptional_half_width(target, cfg);
    cfg.grid_density.max((24.0 * TAU / hw).ceil() as usize)
}

/// Zeros closer to the circle than a few objective-grid spacings would have
/// their argument climb invisible to the optimizer (and an outsized Lipschitz
/// bound), so radii are floored at this width throughout.
fn min_zero_width(target: &ScalarTarget, cfg: &SynthesisConfig) -> f64 {
    (4.0 * TAU / objective_grid_size(target, cfg) as f64).max(cfg.margin)
}

fn exceptional_half_width(target: &ScalarTarget, cfg: &SynthesisConfig) -> f64 {
    let breakpoints = target.jumps().len().max(1);
    // shaved slightly so the total measure stays strictly below delta
    0.995 * cfg.delta / (2.0 * breakpoints as f64)
}

fn exceptional_set(target: &ScalarTarget, cfg: &SynthesisConfig) -> ArcSet {
    let half = exceptional_half_width(target, cfg);
    ArcSet::from_arcs(
        target
            .jumps()
            .iter()
            .map(|&(b, _)| Arc::new(b - half, b + half).expect("positive width"))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// refinement
// ---------------------------------------------------------------------------

/// Optimizer state: cached per-zero boundary argument contributions on the
/// objective grid, so a single-zero move is an O(grid) update.
struct Objective {
    grid: Vec<f64>,
    kept: Vec<bool>,
    target_arg: Vec<f64>,
    /// +1 contributions for numerator zeros, -1 for denominator zeros
    total: Vec<f64>,
    phase: f64,
}

impl Objective {
    fn new(target: &ScalarTarget, layout: &ZeroLayout, cfg: &SynthesisConfig) -> Self {
        let n = objective_grid_size(target, cfg);
        let exceptional = exceptional_set(target, cfg);
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * TAU / n as f64).collect();
        let kept: Vec<bool> = grid.iter().map(|&t| !exceptional.contains(t)).collect();
        let target_arg: Vec<f64> = grid.iter().map(|&t| target.value_at(t).arg()).collect();
        let mut obj = Self {
            grid,
            kept,
            target_arg,
            total: vec![0.0; n],
            phase: layout.phase,
        };
        for &(r, a) in &layout.numerator {
            obj.apply_zero(r, a, 1.0);
        }
        for &(r, a) in &layout.denominator {
            obj.apply_zero(r, a, -1.0);
        }
        obj
    }

    fn apply_zero(&mut self, radius: f64, angle: f64, sign: f64) {
        let alpha = Complex64::from_polar(radius, angle);
        for (i, &t) in self.grid.iter().enumerate() {
            let z = Complex64::from_polar(1.0, t);
            let b = (z - alpha) / (Complex64::new(1.0, 0.0) - alpha.conj() * z);
            self.total[i] += sign * b.arg();
        }
    }

    fn residual(&self, i: usize) -> f64 {
        wrap_signed(self.total[i] + self.phase - self.target_arg[i])
    }

    fn max_error(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.grid.len() {
            if self.kept[i] {
                m = m.max(self.residual(i).abs());
            }
        }
        m
    }

    fn worst_kept_angle(&self) -> f64 {
        let mut best = (0.0f64, 0.0f64);
        for i in 0..self.grid.len() {
            if self.kept[i] {
                let e = self.residual(i).abs();
                if e > best.0 {
                    best = (e, self.grid[i]);
                }
            }
        }
        best.1
    }

    /// Recenter the phase: minimax-optimal shift for fixed zeros.
    fn recenter_phase(&mut self) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.grid.len() {
            if self.kept[i] {
                let r = self.residual(i);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        if lo.is_finite() && hi.is_finite() {
            self.phase -= 0.5 * (lo + hi);
        }
    }
}

/// Monotone coordinate search over every zero's radius and angle (radius
/// before angle, zero index order, numerator before denominator). Only
/// improving steps are accepted; steps shrink when a sweep stalls and a
/// carrier pair is added when stalled above half the argument budget.
pub fn refine_zero_layout(
    layout: &ZeroLayout,
    target: &ScalarTarget,
    cfg: &SynthesisConfig,
) -> ZeroLayout {
    let mut layout = layout.clone();
    if layout.numerator.is_empty() && layout.denominator.is_empty() {
        return layout;
    }
    let mut obj = Objective::new(target, &layout, cfg);
    obj.recenter_phase();
    // argument budget corresponding to the value-space epsilon
    let arg_goal = 2.0 * (cfg.epsilon.min(1.9) / 2.0).asin() * 0.8;

    let mut radius_factor = 1.6f64;
    let mut angle_step = 0.25 * TAU / layout.degree().max(1) as f64;
    let min_width = min_zero_width(target, cfg);

    let mut best = obj.max_error();
    // escalation may end net-worse, so the overall best state is snapshotted
    let mut best_seen = best;
    let mut best_layout = layout.clone();
    best_layout.phase = obj.phase;
    for _sweep in 0..cfg.max_iterations {
        if best < arg_goal {
            break;
        }
        let mut improved = false;
        for side in 0..2 {
            let count = if side == 0 {
                layout.numerator.len()
            } else {
                layout.denominator.len()
            };
            let sign = if side == 0 { 1.0 } else { -1.0 };
            for idx in 0..count {
                let (r0, a0) = if side == 0 {
                    layout.numerator[idx]
                } else {
                    layout.denominator[idx]
                };
                let mut cur = (r0, a0);
                // radius before angle
                let width0 = 1.0 - cur.0;
                let radius_cands = [
                    1.0 - (width0 * radius_factor).min(0.9),
                    1.0 - (width0 / radius_factor).max(min_width),
                ];
                for &rc in &radius_cands {
                    if (rc - cur.0).abs() < 1e-15 {
                        continue;
                    }
                    let saved_phase = obj.phase;
                    obj.apply_zero(cur.0, cur.1, -sign);
                    obj.apply_zero(rc, cur.1, sign);
                    obj.recenter_phase();
                    let e = obj.max_error();
                    if e < best {
                        best = e;
                        cur.0 = rc;
                        improved = true;
                    } else {
                        obj.apply_zero(rc, cur.1, -sign);
                        obj.apply_zero(cur.0, cur.1, sign);
                        obj.phase = saved_phase;
                    }
                }
                for da in [angle_step, -angle_step] {
                    let ac = cur.1 + da;
                    let saved_phase = obj.phase;
                    obj.apply_zero(cur.0, cur.1, -sign);
                    obj.apply_zero(cur.0, ac, sign);
                    obj.recenter_phase();
                    let e = obj.max_error();
                    if e < best {
                        best = e;
                        cur.1 = ac;
                        improved = true;
                    } else {
                        obj.apply_zero(cur.0, ac, -sign);
                        obj.apply_zero(cur.0, cur.1, sign);
                        obj.phase = saved_phase;
                    }
                }
                if side == 0 {
                    layout.numerator[idx] = cur;
                } else {
                    layout.denominator[idx] = cur;
                }
            }
        }
        if best < best_seen {
            best_seen = best;
            best_layout = layout.clone();
            best_layout.phase = obj.phase;
        }
        if !improved {
            radius_factor = 1.0 + (radius_factor - 1.0) * 0.5;
            angle_step *= 0.5;
            let stalled = radius_factor < 1.02 && angle_step < 1e-4;
            if stalled {
                if best > arg_goal / 2.0 && layout.degree() + 1 <= cfg.max_degree {
                    // escalate: add a cancelling carrier pair at the worst
                    // error location and restart the step schedule
                    let at = obj.worst_kept_angle();
                    let width = (TAU / (layout.degree() + 1) as f64).min(0.3);
                    layout.numerator.push((1.0 - width, at));
                    layout.denominator.push((1.0 - width, wrap_angle(at + width)));
                    obj.apply_zero(1.0 - width, at, 1.0);
                    obj.apply_zero(1.0 - width, wrap_angle(at + width), -1.0);
                    obj.recenter_phase();
                    best = obj.max_error();
                    radius_factor = 1.6;
                    angle_step = 0.25 * TAU / layout.degree() as f64;
                } else {
                    break;
                }
            }
        }
    }
    if best < best_seen {
        best_layout = layout;
        best_layout.phase = obj.phase;
    }
    best_layout.phase = wrap_signed(best_layout.phase);
    best_layout
}

// ---------------------------------------------------------------------------
// synthesis entry points
// ---------------------------------------------------------------------------

pub(crate) fn certification_grid_points(lipschitz: f64, epsilon: f64) -> usize {
    // slack L·h/2 at one twentieth of epsilon
    let needed = (TAU * lipschitz * 20.0 / (2.0 * epsilon)).ceil() as usize;
    needed.max(4096)
}

fn certified(
    target: &ScalarTarget,
    num: FiniteBlaschke,
    den: FiniteBlaschke,
    exceptional: ArcSet,
    cfg: &SynthesisConfig,
) -> Result<QuotientApproximant, SolverError> {
    let step = target.as_step()?;
    let lipschitz = num.lipschitz_bound() + den.lipschitz_bound();
    let points = certification_grid_points(lipschitz, cfg.epsilon);
    let certificate = certify::certify_scalar_quotient(
        &step,
        &num,
        &den,
        &exceptional,
        cfg.epsilon,
        cfg.delta,
        points,
        certify::config_hash(cfg),
    )?;
    Ok(QuotientApproximant {
        certified_error: certificate.bound,
        numerator: num,
        denominator: den,
        exceptional,
        certificate,
    })
}

/// Synthesize a certified quotient for a two-valued target: 1 on the plateau
/// arcs, `off_value` elsewhere.
pub fn synthesize_two_valued(
    target: &ScalarTarget,
    cfg: &SynthesisConfig,
) -> Result<QuotientApproximant, SolverError> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 2.0) {
        return Err(SolverError::BadEpsilon(cfg.epsilon));
    }
    if cfg.delta <= 0.0 {
        return Err(SolverError::BadDelta(cfg.delta));
    }

    // exact degenerate cases: constant targets need no zeros and no windows
    if target.is_trivial() {
        return certified(
            target,
            FiniteBlaschke::one(),
            FiniteBlaschke::one(),
            ArcSet::empty(),
            cfg,
        );
    }
    if target.plateau.is_empty() {
        let num = FiniteBlaschke::constant_product(target.off_value)?;
        return certified(target, num, FiniteBlaschke::one(), ArcSet::empty(), cfg);
    }

    let half_width = exceptional_half_width(target, cfg);
    for arc in target
        .plateau
        .arcs()
        .iter()
        .chain(target.plateau.complement().arcs())
    {
        if arc.length() < 4.0 * half_width {
            return Err(SolverError::ArcTooShort {
                len: arc.length(),
                half_width,
            });
        }
    }

    let layout = initialize_zero_layout(target, cfg);
    let layout = refine_zero_layout(&layout, target, cfg);
    let (num, den) = layout.build(cfg.margin)?;
    let exceptional = exceptional_set(target, cfg);
    let result = certified(target, num, den, exceptional, cfg)?;
    if result.certificate.pass {
        Ok(result)
    } else {
        Err(SolverError::BudgetExhausted {
            bound: result.certified_error,
            epsilon: cfg.epsilon,
            best: Box::new(result),
        })
    }
}

/// Synthesize a certified quotient for an arbitrary scalar step target by
/// factoring it into two-valued factors and multiplying the per-factor
/// quotients; per-factor budgets are `ε/m` and `δ/m`.
pub fn synthesize_step_scalar(
    target: &StepUnimodular,
    cfg: &SynthesisConfig,
) -> Result<QuotientApproximant, SolverError> {
    assert!(target.is_scalar(), "scalar synthesis needs 1x1 values");
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 2.0) {
        return Err(SolverError::BadEpsilon(cfg.epsilon));
    }
    let factors = target.binary_factorize();
    if factors.is_empty() {
        // identically 1
        let t = ScalarTarget::new(ArcSet::full_circle(), Complex64::new(1.0, 0.0))?;
        return certified(
            &t,
            FiniteBlaschke::one(),
            FiniteBlaschke::one(),
            ArcSet::empty(),
            cfg,
        );
    }
    let m = factors.len() as f64;
    let mut num = FiniteBlaschke::one();
    let mut den = FiniteBlaschke::one();
    let mut exceptional = ArcSet::empty();
    for factor in &factors {
        let alpha = factor
            .distinct_values()
            .into_iter()
            .map(|v| v[(0, 0)])
            .find(|v| (v - Complex64::new(1.0, 0.0)).norm() >= 1e-12)
            .expect("nontrivial factor has a non-identity value");
        let plateau = match factor
            .support_of_value(&crate::linalg::CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)))
        {
            Ok(set) => set,
            Err(_) => ArcSet::empty(), // factor is constant alpha
        };
        let sub_target = ScalarTarget::new(plateau, alpha)?;
        let sub_cfg = cfg.with_budget(cfg.epsilon / m, cfg.delta / m);
        let part = synthesize_two_valued(&sub_target, &sub_cfg)?;
        num = num.multiply(&part.numerator);
        den = den.multiply(&part.denominator);
        exceptional = exceptional.union(&part.exceptional);
    }

    // certify the combined quotient against the full step target
    let lipschitz = num.lipschitz_bound() + den.lipschitz_bound();
    let points = certification_grid_points(lipschitz, cfg.epsilon);
    let certificate = certify::certify_scalar_quotient(
        target,
        &num,
        &den,
        &exceptional,
        cfg.epsilon,
        cfg.delta,
        points,
        certify::config_hash(cfg),
    )?;
    let result = QuotientApproximant {
        certified_error: certificate.bound,
        numerator: num,
        denominator: den,
        exceptional,
        certificate,
    };
    if result.certificate.pass {
        Ok(result)
    } else {
        Err(SolverError::BudgetExhausted {
            bound: result.certified_error,
            epsilon: cfg.epsilon,
            best: Box::new(result),
        })
    }
}
