//! Step unimodular functions on the circle: arc partitions, arc sets, range
//! quantization and binary factorization.

use crate::blaschke::wrap_angle;
use crate::linalg::{is_unitary, op_distance, CMatrix};
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

/// Matrix values closer than this (operator norm) are treated as equal.
pub const VALUE_MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("breakpoints must be strictly increasing in [0, 2π)")]
    BadBreakpoints,
    #[error("need one value per arc: {arcs} arcs, {values} values")]
    ValueCountMismatch { arcs: usize, values: usize },
    #[error("value {0} is not unitary within {VALUE_MATCH_TOL}")]
    ValueNotUnitary(usize),
    #[error("values have mixed dimensions")]
    MixedDimensions,
    #[error("quantization radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("no samples supplied")]
    EmptySamples,
    #[error("matrix is not a value of the step function")]
    ValueNotFound,
    #[error("arc has non-positive length")]
    EmptyArc,
    #[error("arcs overlap")]
    OverlappingArcs,
}

/// A single arc `[start, end)` traversed counterclockwise. `start ∈ [0, 2π)`
/// and `end ∈ (start, start + 2π]`; `end` may exceed `2π` when the arc wraps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

impl Arc {
    pub fn new(start: f64, end: f64) -> Result<Self, ModelError> {
        let start = wrap_angle(start);
        let mut end = end;
        while end <= start {
            end += TAU;
        }
        if end - start > TAU + 1e-12 {
            return Err(ModelError::EmptyArc);
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = wrap_angle(theta);
        let t = if t < self.start { t + TAU } else { t };
        t < self.end
    }

    pub fn midpoint(&self) -> f64 {
        wrap_angle(0.5 * (self.start + self.end))
    }
}

/// A finite union of pairwise disjoint arcs in canonical sorted form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArcSet {
    arcs: Vec<Arc>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full_circle() -> Self {
        Self {
            arcs: vec![Arc {
                start: 0.0,
                end: TAU,
            }],
        }
    }

    /// Build from arbitrary arcs, merging overlapping or touching ones.
    pub fn from_arcs(arcs: Vec<Arc>) -> Self {
        let mut set = Self { arcs };
        set.canonicalize();
        set
    }

    fn canonicalize(&mut self) {
        if self.arcs.is_empty() {
            return;
        }
        if self.arcs.iter().map(Arc::length).sum::<f64>() >= TAU - 1e-12 {
            *self = Self::full_circle();
            return;
        }
        // split wrapping arcs at 0 so merging is a linear sweep
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for a in &self.arcs {
            if a.end > TAU {
                pieces.push((a.start, TAU));
                pieces.push((0.0, a.end - TAU));
            } else {
                pieces.push((a.start, a.end));
            }
        }
        pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, e) in pieces {
            match merged.last_mut() {
                Some(last) if s <= last.1 + 1e-15 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        // re-join across 0 if both ends touch
        if merged.len() > 1 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if first.0 <= 1e-15 && (last.1 - TAU).abs() <= 1e-15 {
                merged[0] = (last.0, first.1 + TAU);
                merged.pop();
                merged.rotate_left(1);
                merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            }
        }
        self.arcs = merged
            .into_iter()
            .map(|(s, e)| Arc { start: s, end: e })
            .collect();
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Total length; additive over the disjoint arcs.
    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(Arc::length).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut arcs = self.arcs.clone();
        arcs.extend_from_slice(&other.arcs);
        ArcSet::from_arcs(arcs)
    }

    /// Complement within the circle.
    pub fn complement(&self) -> ArcSet {
        if self.arcs.is_empty() {
            return ArcSet::full_circle();
        }
        if (self.measure() - TAU).abs() < 1e-12 {
            return ArcSet::empty();
        }
        let mut arcs = Vec::new();
        let n = self.arcs.len();
        for i in 0..n {
            let gap_start = wrap_angle(self.arcs[i].end);
            let gap_end = self.arcs[(i + 1) % n].start;
            if let Ok(a) = Arc::new(gap_start, gap_end) {
                if a.length() > 1e-14 && a.length() < TAU - 1e-14 {
                    arcs.push(a);
                }
            }
        }
        ArcSet::from_arcs(arcs)
    }
}

/// Strictly increasing breakpoints; arc `j` spans `[θ_j, θ_{j+1})` with
/// wrap-around on the last arc.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPartition {
    breakpoints: Vec<f64>,
}

impl ArcPartition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self, ModelError> {
        if breakpoints.is_empty() {
            return Err(ModelError::BadBreakpoints);
        }
        for w in breakpoints.windows(2) {
            if w[1] <= w[0] {
                return Err(ModelError::BadBreakpoints);
            }
        }
        if breakpoints[0] < 0.0 || *breakpoints.last().unwrap() >= TAU {
            return Err(ModelError::BadBreakpoints);
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn arc_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Index of the arc containing `theta` (left-closed convention).
    pub fn arc_index(&self, theta: f64) -> usize {
        let t = wrap_angle(theta);
        // last breakpoint ≤ t, or the wrapped last arc when t < θ_0
        match self.breakpoints.partition_point(|&b| b <= t) {
            0 => self.breakpoints.len() - 1,
            k => k - 1,
        }
    }

    pub fn arc(&self, j: usize) -> Arc {
        let m = self.breakpoints.len();
        let start = self.breakpoints[j];
        let end = if j + 1 < m {
            self.breakpoints[j + 1]
        } else {
            self.breakpoints[0] + TAU
        };
        if m == 1 {
            Arc {
                start,
                end: start + TAU,
            }
        } else {
            Arc { start, end }
        }
    }
}

/// A unimodular step function: one unitary value per arc of a partition.
#[derive(Debug, Clone)]
pub struct StepUnimodular {
    partition: ArcPartition,
    values: Vec<CMatrix>,
}

impl StepUnimodular {
    pub fn new(partition: ArcPartition, values: Vec<CMatrix>) -> Result<Self, ModelError> {
        if values.len() != partition.arc_count() {
            return Err(ModelError::ValueCountMismatch {
                arcs: partition.arc_count(),
                values: values.len(),
            });
        }
        let n = values[0].nrows();
        for (i, v) in values.iter().enumerate() {
            if v.nrows() != n || v.ncols() != n {
                return Err(ModelError::MixedDimensions);
            }
            if !is_unitary(v, VALUE_MATCH_TOL) {
                return Err(ModelError::ValueNotUnitary(i));
            }
        }
        Ok(Self { partition, values })
    }

    /// Scalar (1×1) step function from unimodular complex values.
    pub fn scalar(partition: ArcPartition, values: Vec<Complex64>) -> Result<Self, ModelError> {
        let mats = values
            .into_iter()
            .map(|c| CMatrix::from_element(1, 1, c))
            .collect();
        Self::new(partition, mats)
    }

    /// Constant function equal to `value` everywhere.
    pub fn constant(value: CMatrix) -> Result<Self, ModelError> {
        Self::new(ArcPartition::new(vec![0.0])?, vec![value])
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

    /// Value of the arc containing `theta`.
    pub fn eval(&self, theta: f64) -> &CMatrix {
        &self.values[self.partition.arc_index(theta)]
    }

    pub fn is_scalar(&self) -> bool {
        self.dimension() == 1
    }

    /// Scalar value at `theta`; only meaningful for 1×1 step functions.
    pub fn eval_scalar(&self, theta: f64) -> Complex64 {
        self.eval(theta)[(0, 0)]
    }

    /// Distinct values in first-appearance order (operator-norm matching).
    pub fn distinct_values(&self) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = Vec::new();
        for v in &self.values {
            if !out.iter().any(|u| op_distance(u, v) < VALUE_MATCH_TOL) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Union of arcs on which the function equals `value`.
    pub fn support_of_value(&self, value: &CMatrix) -> Result<ArcSet, ModelError> {
        let mut arcs = Vec::new();
        for (j, v) in self.values.iter().enumerate() {
            if op_distance(v, value) < VALUE_MATCH_TOL {
                arcs.push(self.partition.arc(j));
            }
        }
        if arcs.is_empty() {
            return Err(ModelError::ValueNotFound);
        }
        Ok(ArcSet::from_arcs(arcs))
    }

    /// Write the step function as an ordered product of factors each taking
    /// at most two values, one of them the identity. Identity-valued factors
    /// are dropped, so a function that is the identity everywhere factors
    /// into the empty product.
    pub fn binary_factorize(&self) -> Vec<StepUnimodular> {
        let n = self.dimension();
        let id = CMatrix::identity(n, n);
        let mut factors = Vec::new();
        for value in self.distinct_values() {
            if op_distance(&value, &id) < VALUE_MATCH_TOL {
                continue;
            }
            let vals: Vec<CMatrix> = self
                .values
                .iter()
                .map(|v| {
                    if op_distance(v, &value) < VALUE_MATCH_TOL {
                        value.clone()
                    } else {
                        id.clone()
                    }
                })
                .collect();
            factors.push(StepUnimodular {
                partition: self.partition.clone(),
                values: vals,
            });
        }
        factors
    }
}

/// Quantize sampled unitary values into a step function taking finitely many
/// values, each drawn from the samples, with sup error below `2·radius`.
///
/// Centers are chosen greedily: scan the samples in the given order and open
/// a new center at the first sample not within `radius` of an existing one.
/// Each sample is then assigned to the first center within `radius`.
pub fn quantize_range(
    samples: &[(f64, CMatrix)],
    radius: f64,
) -> Result<StepUnimodular, ModelError> {
    if radius <= 0.0 {
        return Err(ModelError::BadRadius(radius));
    }
    if samples.is_empty() {
        return Err(ModelError::EmptySamples);
    }
    let mut centers: Vec<CMatrix> = Vec::new();
    for (_, v) in samples {
        if !centers.iter().any(|c| op_distance(c, v) < radius) {
            centers.push(v.clone());
        }
    }
    let assignment: Vec<usize> = samples
        .iter()
        .map(|(_, v)| {
            centers
                .iter()
                .position(|c| op_distance(c, v) < radius)
                .expect("every sample is within radius of some center")
        })
        .collect();

    // arcs from contiguous same-center runs in circular angle order
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[a].0.partial_cmp(&samples[b].0).unwrap());
    let sorted_assign: Vec<usize> = order.iter().map(|&i| assignment[i]).collect();
    let sorted_theta: Vec<f64> = order.iter().map(|&i| wrap_angle(samples[i].0)).collect();

    let k = sorted_assign.len();
    let rot = (0..k)
        .find(|&i| sorted_assign[i] != sorted_assign[(i + k - 1) % k])
        .unwrap_or(0);
    let mut breakpoints = Vec::new();
    let mut run_values = Vec::new();
    let mut i = 0;
    while i < k {
        let idx = (rot + i) % k;
        let c = sorted_assign[idx];
        breakpoints.push(sorted_theta[idx]);
        run_values.push(centers[c].clone());
        let mut j = i + 1;
        while j < k && sorted_assign[(rot + j) % k] == c {
            j += 1;
        }
        i = j;
    }
    // restore increasing breakpoint order (rotation preserved run pairing)
    let mut pairs: Vec<(f64, CMatrix)> = breakpoints.into_iter().zip(run_values).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (bps, vals): (Vec<f64>, Vec<CMatrix>) = pairs.into_iter().unzip();
    StepUnimodular::new(ArcPartition::new(bps)?, vals)
}

/// Total length of an arc set.
pub fn arc_measure(set: &ArcSet) -> f64 {
    set.measure()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::random_unitary;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn scalar(c: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, c)
    }

    #[test]
    fn arc_membership_and_wrap() {
        let a = Arc::new(3.0 * PI / 2.0, PI / 2.0).unwrap();
        assert!(a.contains(0.0));
        assert!(a.contains(6.0));
        assert!(!a.contains(PI));
        assert_abs_diff_eq!(a.length(), PI, epsilon = 1e-15);
    }

    #[test]
    fn arcset_measures() {
        assert_eq!(ArcSet::empty().measure(), 0.0);
        assert_abs_diff_eq!(ArcSet::full_circle().measure(), TAU, epsilon = 1e-15);
        let s = ArcSet::from_arcs(vec![
            Arc::new(0.0, PI / 2.0).unwrap(),
            Arc::new(PI, 3.0 * PI / 2.0).unwrap(),
        ]);
        assert_abs_diff_eq!(s.measure(), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(s.complement().measure(), PI, epsilon = 1e-14);
    }

    #[test]
    fn arcset_union_merges_overlaps() {
        let s = ArcSet::from_arcs(vec![Arc::new(0.0, 1.0).unwrap()]);
        let t = ArcSet::from_arcs(vec![Arc::new(0.5, 1.5).unwrap()]);
        let u = s.union(&t);
        assert_eq!(u.arcs().len(), 1);
        assert_abs_diff_eq!(u.measure(), 1.5, epsilon = 1e-14);
    }

    #[test]
    fn eval_step_left_closed() {
        let p = ArcPartition::new(vec![0.0, PI]).unwrap();
        let i = scalar(Complex64::new(1.0, 0.0));
        let t = scalar(Complex64::new(0.0, 1.0));
        let f = StepUnimodular::new(p, vec![i.clone(), t.clone()]).unwrap();
        assert_eq!(f.eval(PI), &t);
        assert_eq!(f.eval(PI - 1e-9), &i);
        assert_eq!(f.eval(0.0), &i);
        assert_eq!(f.eval(TAU - 1e-9), &t);
    }

    #[test]
    fn constant_step_everywhere() {
        let u = scalar(Complex64::new(0.0, -1.0));
        let f = StepUnimodular::constant(u.clone()).unwrap();
        for i in 0..17 {
            assert_eq!(f.eval(i as f64 * 0.4), &u);
        }
    }

    #[test]
    fn quantize_single_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = random_unitary(&mut rng, 2);
        let samples: Vec<(f64, CMatrix)> = (0..20)
            .map(|i| {
                let mut v = base.clone();
                v[(0, 0)] += Complex64::new(1e-4, 0.0);
                (i as f64 * 0.3, if i % 2 == 0 { base.clone() } else { v })
            })
            .collect();
        // not exactly unitary after the poke; re-use exact base for odd too
        let samples: Vec<(f64, CMatrix)> = samples
            .into_iter()
            .map(|(t, _)| (t, base.clone()))
            .collect();
        let g = quantize_range(&samples, 0.5).unwrap();
        assert_eq!(g.distinct_values().len(), 1);
    }

    #[test]
    fn quantize_separated_values_exact() {
        let one = scalar(Complex64::new(1.0, 0.0));
        let neg = scalar(Complex64::new(-1.0, 0.0));
        let samples = vec![
            (0.1, one.clone()),
            (1.0, one.clone()),
            (3.0, neg.clone()),
            (4.0, neg.clone()),
            (6.0, one.clone()),
        ];
        let g = quantize_range(&samples, 0.5).unwrap();
        assert_eq!(g.distinct_values().len(), 2);
        assert_eq!(g.eval(0.5), &one);
        assert_eq!(g.eval(3.5), &neg);
        assert_eq!(g.eval(6.2), &one);
    }

    /// Brute-force greedy cover oracle, coded independently of quantize_range.
    fn greedy_oracle(samples: &[(f64, CMatrix)], eps: f64) -> (Vec<usize>, Vec<usize>) {
        let mut center_idx: Vec<usize> = Vec::new();
        loop {
            let mut found = None;
            'scan: for (i, (_, v)) in samples.iter().enumerate() {
                for &c in &center_idx {
                    if op_distance(&samples[c].1, v) < eps {
                        continue 'scan;
                    }
                }
                found = Some(i);
                break;
            }
            match found {
                Some(i) => center_idx.push(i),
                None => break,
            }
        }
        let assign = samples
            .iter()
            .map(|(_, v)| {
                center_idx
                    .iter()
                    .position(|&c| op_distance(&samples[c].1, v) < eps)
                    .unwrap()
            })
            .collect();
        (center_idx, assign)
    }

    #[test]
    fn quantize_matches_greedy_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..20 {
            let n = if trial % 2 == 0 { 2 } else { 3 };
            // random walk of unitaries so clusters exist
            let mut cur = random_unitary(&mut rng, n);
            let mut samples = Vec::new();
            for i in 0..200 {
                if rng.gen_bool(0.1) {
                    cur = random_unitary(&mut rng, n);
                }
                samples.push((i as f64 * TAU / 200.0, cur.clone()));
            }
            let eps = 0.3;
            let g = quantize_range(&samples, eps).unwrap();
            let (centers, assign) = greedy_oracle(&samples, eps);
            let center_vals: Vec<&CMatrix> = centers.iter().map(|&i| &samples[i].1).collect();
            assert_eq!(g.distinct_values().len(), center_vals.len());
            let mut sup = 0.0f64;
            for (k, (t, v)) in samples.iter().enumerate() {
                let gv = g.eval(*t);
                assert!(
                    op_distance(gv, center_vals[assign[k]]) < 1e-12,
                    "assignment mismatch at sample {k}"
                );
                sup = sup.max(op_distance(gv, v));
            }
            assert!(sup < 2.0 * eps, "sup error {sup}");
        }
    }

    #[test]
    fn quantize_rejects_bad_inputs() {
        assert!(matches!(
            quantize_range(&[], 0.5),
            Err(ModelError::EmptySamples)
        ));
        let s = vec![(0.0, scalar(Complex64::new(1.0, 0.0)))];
        assert!(matches!(
            quantize_range(&s, 0.0),
            Err(ModelError::BadRadius(_))
        ));
    }

    #[test]
    fn binary_factorize_constant() {
        let u = scalar(Complex64::new(0.0, 1.0));
        let f = StepUnimodular::constant(u.clone()).unwrap();
        let factors = f.binary_factorize();
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0].eval(1.0), &u);
    }

    #[test]
    fn binary_factorize_drops_identity() {
        let p = ArcPartition::new(vec![0.0, PI]).unwrap();
        let f = StepUnimodular::scalar(
            p,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        let factors = f.binary_factorize();
        assert_eq!(factors.len(), 1);
    }

    #[test]
    fn binary_factorize_reconstructs_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let vals: Vec<CMatrix> = (0..4).map(|_| random_unitary(&mut rng, 3)).collect();
            let mut bps: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..TAU)).collect();
            bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            bps.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let p = ArcPartition::new(bps.clone()).unwrap();
            let values: Vec<CMatrix> = (0..bps.len())
                .map(|i| vals[i % vals.len()].clone())
                .collect();
            let g = StepUnimodular::new(p, values).unwrap();
            let factors = g.binary_factorize();
            for i in 0..1000 {
                let t = i as f64 * TAU / 1000.0;
                let mut prod = CMatrix::identity(3, 3);
                for f in &factors {
                    prod = prod * f.eval(t);
                }
                assert!(op_distance(&prod, g.eval(t)) < 1e-14);
            }
        }
    }

    #[test]
    fn support_partition_and_measure() {
        let p = ArcPartition::new(vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]).unwrap();
        let a = scalar(Complex64::new(1.0, 0.0));
        let b = scalar(Complex64::new(0.0, 1.0));
        let f = StepUnimodular::new(p, vec![a.clone(), b.clone(), a.clone(), b.clone()]).unwrap();
        let sa = f.support_of_value(&a).unwrap();
        let sb = f.support_of_value(&b).unwrap();
        assert_abs_diff_eq!(sa.measure(), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(sb.measure(), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(sa.measure() + sb.measure(), TAU, epsilon = 1e-14);
        assert_eq!(sa.arcs().len(), 2);
        assert!(f.support_of_value(&scalar(Complex64::new(-1.0, 0.0))).is_err());
        // grid membership oracle
        let mut count = 0usize;
        for i in 0..1000 {
            if sa.contains(i as f64 * TAU / 1000.0) {
                count += 1;
            }
        }
        assert!((count as f64 * TAU / 1000.0 - sa.measure()).abs() < TAU / 1000.0 * 2.0);
    }

    #[test]
    fn support_constant_is_full_circle() {
        let u = scalar(Complex64::new(0.0, 1.0));
        let f = StepUnimodular::constant(u.clone()).unwrap();
        let s = f.support_of_value(&u).unwrap();
        assert_abs_diff_eq!(s.measure(), TAU, epsilon = 1e-12);
    }
}
