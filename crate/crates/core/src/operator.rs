//! Sparse finite-propagation operators on l2 of a window.
//!
//! Entries are Gaussian rationals, so all *-algebra identities (products,
//! adjoints, commutators, traces, the boundary edge identity) are checked as
//! exact equalities of sparse matrices. Norms are the only approximate
//! quantities: the Hilbert-Schmidt norm is the square root of an exact
//! radicand, and the operator norm comes with a certified upper bound
//! (row/column sums) and a power-iteration lower bound.

use crate::num::{
    abs_sq, abs_upper, conj, format_rat, rat_of_counts, rat_to_f64, scalar_is_zero, scalar_one,
    sha256_hex, Rat, Scalar,
};
use crate::pointset::PointSet;
use crate::space::{BoundaryKind, BoundaryMode, SpaceError, SpaceWindow};
use crate::translations::PartialTranslation;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("operands live on different windows")]
    WindowMismatch,
    #[error("entry ({0},{1}) crosses coarse components (infinite propagation)")]
    StraddlesComponents(u32, u32),
    #[error("set is empty")]
    EmptySet,
    #[error("radius {given} is below the operator propagation {required}")]
    PropagationTooSmall { required: u32, given: u32 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A sparse operator with finite propagation; only nonzero entries are stored.
#[derive(Clone)]
pub struct FinitePropOperator {
    window: Arc<SpaceWindow>,
    entries: BTreeMap<(u32, u32), Scalar>,
    propagation: u32,
}

impl std::fmt::Debug for FinitePropOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FinitePropOperator")
            .field("entries", &self.entries.len())
            .field("propagation", &self.propagation)
            .finish()
    }
}

/// Bounded function on the window acting as a multiplication operator.
#[derive(Clone, Debug)]
pub struct DiagonalFunction {
    window: Arc<SpaceWindow>,
    values: BTreeMap<u32, Scalar>,
}

/// Diagonal 0/1 projection `P_F`.
#[derive(Clone, Debug)]
pub struct Projection {
    window: Arc<SpaceWindow>,
    support: PointSet,
}

impl PartialEq for Projection {
    fn eq(&self, other: &Self) -> bool {
        self.window.window_hash() == other.window.window_hash() && self.support == other.support
    }
}

impl FinitePropOperator {
    /// Builds from raw `(row, col) -> scalar` entries, pruning zeros and
    /// validating that no entry crosses coarse components.
    pub fn from_entries(
        window: Arc<SpaceWindow>,
        raw: impl IntoIterator<Item = ((u32, u32), Scalar)>,
    ) -> Result<Self, OperatorError> {
        let mut entries = BTreeMap::new();
        let mut propagation = 0u32;
        for ((x, y), v) in raw {
            if scalar_is_zero(&v) {
                continue;
            }
            if !window.contains(x) {
                return Err(SpaceError::PointOutOfWindow(x).into());
            }
            if !window.contains(y) {
                return Err(SpaceError::PointOutOfWindow(y).into());
            }
            match window.dist(x, y).value() {
                Some(d) => propagation = propagation.max(d),
                None => return Err(OperatorError::StraddlesComponents(x, y)),
            }
            entries.insert((x, y), v);
        }
        Ok(FinitePropOperator {
            window,
            entries,
            propagation,
        })
    }

    pub fn zero(window: Arc<SpaceWindow>) -> Self {
        FinitePropOperator {
            window,
            entries: BTreeMap::new(),
            propagation: 0,
        }
    }

    pub fn identity(window: Arc<SpaceWindow>) -> Self {
        let entries = (0..window.len() as u32)
            .map(|x| ((x, x), scalar_one()))
            .collect();
        FinitePropOperator {
            window,
            entries,
            propagation: 0,
        }
    }

    /// Matrix unit `e_{xy}`: 1 at row x, column y.
    pub fn matrix_unit(window: Arc<SpaceWindow>, x: u32, y: u32) -> Result<Self, OperatorError> {
        FinitePropOperator::from_entries(window, [((x, y), scalar_one())])
    }

    /// Partial isometry of a partial translation: entry 1 at `(t(x), x)`.
    pub fn from_partial_translation(t: &PartialTranslation) -> Self {
        let entries = t
            .pairs()
            .iter()
            .map(|&(x, y)| ((y, x), scalar_one()))
            .collect();
        FinitePropOperator {
            window: t.window().clone(),
            // Propagation of V_t is exactly the displacement of t.
            propagation: t.displacement(),
            entries,
        }
    }

    pub fn window(&self) -> &Arc<SpaceWindow> {
        &self.window
    }

    pub fn same_window(&self, other: &FinitePropOperator) -> bool {
        self.window.window_hash() == other.window.window_hash()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &Scalar)> {
        self.entries.iter()
    }

    pub fn entry(&self, x: u32, y: u32) -> Option<&Scalar> {
        self.entries.get(&(x, y))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Max `d(x,y)` over stored entries; 0 for diagonal and zero operators.
    pub fn propagation(&self) -> u32 {
        self.propagation
    }

    fn check_same(&self, other: &FinitePropOperator) -> Result<(), OperatorError> {
        if self.same_window(other) {
            Ok(())
        } else {
            Err(OperatorError::WindowMismatch)
        }
    }

    // Fallible arithmetic (window checks) stays as inherent methods rather
    // than the std ops traits.
    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &FinitePropOperator) -> Result<Self, OperatorError> {
        self.check_same(other)?;
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let cell = entries.entry(*k).or_insert_with(crate::num::scalar_zero);
            *cell = cell.clone() + v.clone();
        }
        entries.retain(|_, v| !scalar_is_zero(v));
        Ok(Self::rebuild(self.window.clone(), entries))
    }

    pub fn sub(&self, other: &FinitePropOperator) -> Result<Self, OperatorError> {
        self.add(&other.scalar_mul(&Scalar::new(crate::num::rat(-1, 1), Rat::zero())))
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Self {
        if scalar_is_zero(c) {
            return Self::zero(self.window.clone());
        }
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (*k, v.clone() * c.clone()))
            .collect();
        Self::rebuild(self.window.clone(), entries)
    }

    pub fn mul(&self, other: &FinitePropOperator) -> Result<Self, OperatorError> {
        self.check_same(other)?;
        let mut entries: BTreeMap<(u32, u32), Scalar> = BTreeMap::new();
        for (&(x, y), a) in &self.entries {
            for (&(_, z), b) in other.entries.range((y, 0)..=(y, u32::MAX)) {
                let cell = entries
                    .entry((x, z))
                    .or_insert_with(crate::num::scalar_zero);
                *cell = cell.clone() + a.clone() * b.clone();
            }
        }
        entries.retain(|_, v| !scalar_is_zero(v));
        Ok(Self::rebuild(self.window.clone(), entries))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&(x, y), v)| ((y, x), conj(v)))
            .collect();
        Self::rebuild(self.window.clone(), entries)
    }

    fn rebuild(window: Arc<SpaceWindow>, entries: BTreeMap<(u32, u32), Scalar>) -> Self {
        let propagation = entries
            .keys()
            .map(|&(x, y)| {
                window
                    .dist(x, y)
                    .value()
                    .expect("entries stay in components")
            })
            .max()
            .unwrap_or(0);
        FinitePropOperator {
            window,
            entries,
            propagation,
        }
    }

    /// Exact `sum |entry|^2`, the squared Hilbert-Schmidt norm.
    pub fn hs_norm_sq(&self) -> Rat {
        self.entries.values().map(abs_sq).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        rat_to_f64(&self.hs_norm_sq()).sqrt()
    }

    /// Certified operator norm bounds.
    ///
    /// Upper: `sqrt(max_row_sum * max_col_sum)` over `|re|+|im|` entry bounds,
    /// computed exactly before one final rounding step. Lower: best Rayleigh
    /// quotient seen during seeded power iteration on `T*T`.
    pub fn op_norm_est(&self) -> OpNormBounds {
        if self.entries.is_empty() {
            return OpNormBounds {
                lower: 0.0,
                upper: 0.0,
            };
        }
        let mut row: BTreeMap<u32, Rat> = BTreeMap::new();
        let mut col: BTreeMap<u32, Rat> = BTreeMap::new();
        for (&(x, y), v) in &self.entries {
            let b = abs_upper(v);
            *row.entry(x).or_insert_with(Rat::zero) += b.clone();
            *col.entry(y).or_insert_with(Rat::zero) += b;
        }
        let max_row = row.values().max().cloned().unwrap_or_else(Rat::zero);
        let max_col = col.values().max().cloned().unwrap_or_else(Rat::zero);
        let upper = rat_to_f64(&(max_row * max_col)).sqrt() * (1.0 + 1e-12);

        // Power iteration in f64; every Rayleigh quotient is a valid lower
        // bound for the norm up to rounding, slightly deflated to stay safe.
        let n = self.window.len();
        let dense: Vec<(u32, u32, f64, f64)> = self
            .entries
            .iter()
            .map(|(&(x, y), v)| {
                let (re, im) = crate::num::scalar_to_f64(v);
                (x, y, re, im)
            })
            .collect();
        let apply = |v: &[(f64, f64)], adj: bool| -> Vec<(f64, f64)> {
            let mut out = vec![(0.0, 0.0); n];
            for &(x, y, re, im) in &dense {
                let (tr, ti, src, dst) = if adj { (re, -im, x, y) } else { (re, im, y, x) };
                let (vr, vi) = v[src as usize];
                out[dst as usize].0 += tr * vr - ti * vi;
                out[dst as usize].1 += tr * vi + ti * vr;
            }
            out
        };
        let norm =
            |v: &[(f64, f64)]| -> f64 { v.iter().map(|&(r, i)| r * r + i * i).sum::<f64>().sqrt() };
        let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
        let mut v: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut best = 0.0f64;
        let mut prev = 0.0f64;
        for _ in 0..200 {
            let nv = norm(&v);
            if nv < 1e-300 {
                break;
            }
            let tv = apply(&v, false);
            let sigma = norm(&tv) / nv;
            best = best.max(sigma);
            if (sigma - prev).abs() <= 1e-12 * sigma.max(1.0) {
                break;
            }
            prev = sigma;
            v = apply(&tv, true);
        }
        let lower = (best * (1.0 - 1e-10)).min(upper);
        OpNormBounds { lower, upper }
    }

    /// Diagonal part as a function (the conditional expectation onto diagonals).
    pub fn conditional_expectation(&self) -> DiagonalFunction {
        let values = self
            .entries
            .iter()
            .filter(|(&(x, y), _)| x == y)
            .map(|(&(x, _), v)| (x, v.clone()))
            .collect();
        DiagonalFunction {
            window: self.window.clone(),
            values,
        }
    }

    /// `(1/|X|) sum_x T_xx`, exactly.
    pub fn normalized_trace(&self) -> Scalar {
        let mut tr = crate::num::scalar_zero();
        for (&(x, y), v) in &self.entries {
            if x == y {
                tr += v.clone();
            }
        }
        let inv = Scalar::new(rat_of_counts(1, self.window.len()), Rat::zero());
        tr * inv
    }

    /// Exactly checks `trace(T) = trace(E(T))`.
    pub fn trace_factorization_check(&self) -> bool {
        let lhs = self.normalized_trace();
        let rhs = self
            .conditional_expectation()
            .as_operator()
            .normalized_trace();
        lhs == rhs
    }

    /// Sparse CSV `x,y,re,im` with exact `num/den` scalars.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,re,im\n");
        for (&(x, y), v) in &self.entries {
            out.push_str(&format!(
                "{x},{y},{},{}\n",
                format_rat(&v.re),
                format_rat(&v.im)
            ));
        }
        out
    }

    /// Header describing an exported operator.
    pub fn export_header(&self) -> OperatorHeader {
        OperatorHeader {
            window_hash: self.window.window_hash().to_string(),
            propagation: self.propagation,
            entries: self.entries.len(),
            content_hash: sha256_hex(self.to_csv().as_bytes()),
        }
    }

    /// Transport form for embedding in reports.
    pub fn to_data(&self) -> SparseOperatorData {
        SparseOperatorData {
            window_hash: self.window.window_hash().to_string(),
            entries: self
                .entries
                .iter()
                .map(|(&(x, y), v)| (x, y, format_rat(&v.re), format_rat(&v.im)))
                .collect(),
        }
    }

    pub fn from_data(
        window: Arc<SpaceWindow>,
        data: &SparseOperatorData,
    ) -> Result<Self, OperatorError> {
        if window.window_hash() != data.window_hash {
            return Err(OperatorError::WindowMismatch);
        }
        let mut raw = Vec::with_capacity(data.entries.len());
        for (x, y, re, im) in &data.entries {
            let re =
                crate::num::parse_rat(re).map_err(|e| SpaceError::InvalidMetric(e.to_string()))?;
            let im =
                crate::num::parse_rat(im).map_err(|e| SpaceError::InvalidMetric(e.to_string()))?;
            raw.push(((*x, *y), Scalar::new(re, im)));
        }
        FinitePropOperator::from_entries(window, raw)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OpNormBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorHeader {
    pub window_hash: String,
    pub propagation: u32,
    pub entries: usize,
    pub content_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseOperatorData {
    pub window_hash: String,
    pub entries: Vec<(u32, u32, String, String)>,
}

impl DiagonalFunction {
    pub fn new(
        window: Arc<SpaceWindow>,
        values: impl IntoIterator<Item = (u32, Scalar)>,
    ) -> Result<Self, OperatorError> {
        let mut map = BTreeMap::new();
        for (x, v) in values {
            if !window.contains(x) {
                return Err(SpaceError::PointOutOfWindow(x).into());
            }
            if !scalar_is_zero(&v) {
                map.insert(x, v);
            }
        }
        Ok(DiagonalFunction {
            window,
            values: map,
        })
    }

    pub fn one(window: Arc<SpaceWindow>) -> Self {
        let values = (0..window.len() as u32)
            .map(|x| (x, scalar_one()))
            .collect();
        DiagonalFunction { window, values }
    }

    pub fn window(&self) -> &Arc<SpaceWindow> {
        &self.window
    }

    pub fn value(&self, x: u32) -> Scalar {
        self.values
            .get(&x)
            .cloned()
            .unwrap_or_else(crate::num::scalar_zero)
    }

    pub fn values(&self) -> impl Iterator<Item = (&u32, &Scalar)> {
        self.values.iter()
    }

    pub fn support(&self) -> PointSet {
        self.values.keys().copied().collect()
    }

    /// `max_x |f(x)|` as a float from the exact maximal radicand.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .values()
            .map(abs_sq)
            .max()
            .map(|m| rat_to_f64(&m).sqrt())
            .unwrap_or(0.0)
    }

    pub fn as_operator(&self) -> FinitePropOperator {
        let entries = self
            .values
            .iter()
            .map(|(&x, v)| ((x, x), v.clone()))
            .collect();
        FinitePropOperator {
            window: self.window.clone(),
            entries,
            propagation: 0,
        }
    }
}

impl Projection {
    pub fn new(window: Arc<SpaceWindow>, support: PointSet) -> Result<Self, OperatorError> {
        window.check_set(&support)?;
        Ok(Projection { window, support })
    }

    pub fn support(&self) -> &PointSet {
        &self.support
    }

    pub fn window(&self) -> &Arc<SpaceWindow> {
        &self.window
    }

    pub fn rank(&self) -> usize {
        self.support.len()
    }

    /// `sqrt(|F|)`.
    pub fn hs_norm(&self) -> f64 {
        (self.support.len() as f64).sqrt()
    }

    /// Join of two diagonal projections: union of supports.
    pub fn join(&self, other: &Projection) -> Result<Projection, OperatorError> {
        if self.window.window_hash() != other.window.window_hash() {
            return Err(OperatorError::WindowMismatch);
        }
        Ok(Projection {
            window: self.window.clone(),
            support: self.support.union(&other.support),
        })
    }

    pub fn leq(&self, other: &Projection) -> bool {
        self.support.is_subset_of(&other.support)
    }

    pub fn as_operator(&self) -> FinitePropOperator {
        let entries = self
            .support
            .iter()
            .map(|x| ((x, x), scalar_one()))
            .collect();
        FinitePropOperator {
            window: self.window.clone(),
            entries,
            propagation: 0,
        }
    }
}

/// `[T, P_F] = T P_F - P_F T`, exactly.
pub fn commutator(t: &FinitePropOperator, p: &Projection) -> FinitePropOperator {
    // Diagonal projection commutator needs no general multiply:
    // entry (x,y) becomes T_xy (1_F(y) - 1_F(x)).
    let f = &p.support;
    let entries = t
        .entries
        .iter()
        .filter_map(|(&(x, y), v)| {
            let sign = (f.contains(y) as i64) - (f.contains(x) as i64);
            match sign {
                0 => None,
                1 => Some(((x, y), v.clone())),
                _ => Some(((x, y), v.clone() * crate::num::scalar(-1, 1))),
            }
        })
        .collect();
    FinitePropOperator::rebuild(t.window.clone(), entries)
}

/// Exactly verifies the boundary edge identity
/// `[T, P_F] = P_out T P_in - P_in T P_out` at radius `r >= p(T)`.
pub fn edge_identity_check(
    t: &FinitePropOperator,
    f: &PointSet,
    r: u32,
    mode: BoundaryMode,
) -> Result<bool, OperatorError> {
    if r < t.propagation() {
        return Err(OperatorError::PropagationTooSmall {
            required: t.propagation(),
            given: r,
        });
    }
    let w = &t.window;
    let outer = w.boundary(f, r, BoundaryKind::Outer, mode)?;
    let inner = w.boundary(f, r, BoundaryKind::Inner, mode)?;
    let p_out = Projection::new(w.clone(), outer)?.as_operator();
    let p_in = Projection::new(w.clone(), inner)?.as_operator();
    let p_f = Projection::new(w.clone(), f.clone())?;
    let lhs = commutator(t, &p_f);
    let rhs = p_out.mul(t)?.mul(&p_in)?.sub(&p_in.mul(t)?.mul(&p_out)?)?;
    Ok(lhs.entries == rhs.entries)
}

/// Exact squared commutator ratio `(|[T,P_F]|_2 / |P_F|_2)^2`.
pub fn commutator_ratio_sq(t: &FinitePropOperator, f: &PointSet) -> Result<Rat, OperatorError> {
    if f.is_empty() {
        return Err(OperatorError::EmptySet);
    }
    let p = Projection::new(t.window.clone(), f.clone())?;
    Ok(commutator(t, &p).hs_norm_sq() / rat_of_counts(f.len(), 1))
}

/// `|[T, P_F]|_2 / |P_F|_2`.
pub fn commutator_ratio(t: &FinitePropOperator, f: &PointSet) -> Result<f64, OperatorError> {
    Ok(rat_to_f64(&commutator_ratio_sq(t, f)?).sqrt())
}

/// `2 * opnorm_upper(T) * sqrt(|boundary_R F| / |F|)`: the certified bound the
/// commutator ratio of a propagation-R operator must satisfy on a Folner set.
pub fn folner_bound(
    t: &FinitePropOperator,
    f: &PointSet,
    r: u32,
    mode: BoundaryMode,
) -> Result<f64, OperatorError> {
    if f.is_empty() {
        return Err(OperatorError::EmptySet);
    }
    let b = t.window.boundary(f, r, BoundaryKind::TwoSided, mode)?;
    let ratio = rat_of_counts(b.len(), f.len());
    Ok(2.0 * t.op_norm_est().upper * rat_to_f64(&ratio).sqrt())
}

/// Upper bound `sum_i |f_i|_inf` for the operator assembled as
/// `sum_i V_{t_i} f_i`, together with the assembled operator.
pub fn pt_norm_upper(
    decomp: &[(PartialTranslation, DiagonalFunction)],
) -> Result<(f64, FinitePropOperator), OperatorError> {
    let Some((t0, _)) = decomp.first() else {
        return Err(OperatorError::EmptySet);
    };
    let w = t0.window().clone();
    let mut value = 0.0f64;
    let mut assembled = FinitePropOperator::zero(w.clone());
    for (t, f) in decomp {
        if t.window().window_hash() != w.window_hash()
            || f.window().window_hash() != w.window_hash()
        {
            return Err(OperatorError::WindowMismatch);
        }
        value += f.sup_norm();
        let vt = FinitePropOperator::from_partial_translation(t);
        assembled = assembled.add(&vt.mul(&f.as_operator())?)?;
    }
    Ok((value, assembled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, scalar};
    use crate::space::{build_window, SpaceDescriptor};

    fn path(n: u32) -> Arc<SpaceWindow> {
        Arc::new(build_window(&SpaceDescriptor::grid1d(n)).unwrap())
    }

    fn shift(w: &Arc<SpaceWindow>, lo: u32, hi: u32, by: u32) -> PartialTranslation {
        PartialTranslation::new(w.clone(), (lo..hi).map(|x| (x, x + by)).collect()).unwrap()
    }

    #[test]
    fn partial_isometry_projections() {
        let w = path(12);
        let t = shift(&w, 2, 7, 3);
        let v = FinitePropOperator::from_partial_translation(&t);
        assert_eq!(v.propagation(), 3);
        let dom = Projection::new(w.clone(), t.dom()).unwrap().as_operator();
        let ran = Projection::new(w.clone(), t.ran()).unwrap().as_operator();
        assert_eq!(v.adjoint().mul(&v).unwrap().entries, dom.entries);
        assert_eq!(v.mul(&v.adjoint()).unwrap().entries, ran.entries);
    }

    #[test]
    fn v_map_is_functorial() {
        let w = path(15);
        let t = shift(&w, 0, 8, 2);
        let s = shift(&w, 1, 9, 1);
        let vt = FinitePropOperator::from_partial_translation(&t);
        let vs = FinitePropOperator::from_partial_translation(&s);
        let composed = FinitePropOperator::from_partial_translation(&t.compose(&s).unwrap());
        assert_eq!(vt.mul(&vs).unwrap().entries, composed.entries);
        let vt_inv = FinitePropOperator::from_partial_translation(&t.invert());
        assert_eq!(vt.adjoint().entries, vt_inv.entries);
    }

    #[test]
    fn empty_translation_gives_zero_operator() {
        let w = path(5);
        let v = FinitePropOperator::from_partial_translation(&PartialTranslation::empty(w));
        assert!(v.is_zero());
        assert_eq!(v.propagation(), 0);
    }

    #[test]
    fn identity_is_neutral() {
        let w = path(8);
        let t = shift(&w, 0, 5, 1);
        let v = FinitePropOperator::from_partial_translation(&t);
        let one = FinitePropOperator::identity(w);
        assert_eq!(v.mul(&one).unwrap().entries, v.entries);
        assert_eq!(one.mul(&v).unwrap().entries, v.entries);
    }

    #[test]
    fn adjoint_reverses_products() {
        let w = path(10);
        let a = FinitePropOperator::from_entries(
            w.clone(),
            [
                ((0, 1), scalar(1, 2)),
                ((1, 3), Scalar::new(rat(1, 3), rat(2, 5))),
                ((4, 4), scalar(-2, 1)),
            ],
        )
        .unwrap();
        let b = FinitePropOperator::from_entries(
            w.clone(),
            [
                ((1, 0), scalar(3, 1)),
                ((3, 4), Scalar::new(rat(0, 1), rat(1, 1))),
            ],
        )
        .unwrap();
        let lhs = a.mul(&b).unwrap().adjoint();
        let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
        assert_eq!(lhs.entries, rhs.entries);
        assert_eq!(a.adjoint().adjoint().entries, a.entries);
    }

    #[test]
    fn propagation_subadditive() {
        let w = path(20);
        let t = shift(&w, 0, 10, 2);
        let s = shift(&w, 2, 12, 3);
        let vt = FinitePropOperator::from_partial_translation(&t);
        let vs = FinitePropOperator::from_partial_translation(&s);
        let prod = vt.mul(&vs).unwrap();
        assert!(prod.propagation() <= t.displacement() + s.displacement());
        let sum = vt.add(&vs).unwrap();
        assert!(sum.propagation() <= t.displacement().max(s.displacement()));
    }

    #[test]
    fn window_mismatch_rejected() {
        let a = FinitePropOperator::identity(path(5));
        let b = FinitePropOperator::identity(path(6));
        assert!(matches!(a.mul(&b), Err(OperatorError::WindowMismatch)));
        assert!(matches!(a.add(&b), Err(OperatorError::WindowMismatch)));
    }

    #[test]
    fn hs_norm_of_projection_and_isometry() {
        let w = path(9);
        let f = PointSet::range(2, 7);
        let p = Projection::new(w.clone(), f.clone()).unwrap();
        assert_eq!(p.as_operator().hs_norm_sq(), rat(5, 1));
        let t = shift(&w, 0, 6, 1);
        let v = FinitePropOperator::from_partial_translation(&t);
        assert_eq!(v.hs_norm_sq(), rat(6, 1));
        let bounds = v.op_norm_est();
        assert!((bounds.upper - 1.0).abs() < 1e-9);
        assert!((bounds.lower - 1.0).abs() < 1e-9);
        assert!(bounds.lower <= bounds.upper);
    }

    #[test]
    fn zero_operator_norms() {
        let v = FinitePropOperator::zero(path(4));
        assert!(v.hs_norm_sq().is_zero());
        let b = v.op_norm_est();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn diagonal_commutes_with_projections() {
        let w = path(10);
        let f = DiagonalFunction::new(w.clone(), (0..10).map(|x| (x, scalar(x as i64 % 3, 2))))
            .unwrap();
        let p = Projection::new(w.clone(), PointSet::range(3, 8)).unwrap();
        let c = commutator(&f.as_operator(), &p);
        assert!(c.is_zero());
    }

    #[test]
    fn edge_identity_for_shift_on_interval() {
        let w = path(40);
        let t = shift(&w, 0, 39, 1);
        let v = FinitePropOperator::from_partial_translation(&t);
        let f = PointSet::range(10, 25);
        assert!(edge_identity_check(&v, &f, 1, BoundaryMode::WindowRelative).unwrap());
        assert!(edge_identity_check(&v, &f, 3, BoundaryMode::WindowRelative).unwrap());
        assert!(edge_identity_check(&v, &f, 1, BoundaryMode::Ambient).unwrap());
        assert!(matches!(
            edge_identity_check(&v, &f, 0, BoundaryMode::WindowRelative),
            Err(OperatorError::PropagationTooSmall { .. })
        ));
    }

    #[test]
    fn edge_identity_trivial_cases() {
        let w = path(20);
        let f = PointSet::range(5, 15);
        let diag = DiagonalFunction::new(w.clone(), [(3, scalar(7, 2)), (6, scalar(1, 3))])
            .unwrap()
            .as_operator();
        assert!(edge_identity_check(&diag, &f, 0, BoundaryMode::WindowRelative).unwrap());
        // Whole component: empty boundary, zero commutator.
        let boxed = Arc::new(
            build_window(&SpaceDescriptor::BoxSpace {
                components: vec![
                    SpaceDescriptor::CyclicQuotient { n: 4 },
                    SpaceDescriptor::CyclicQuotient { n: 5 },
                ],
                separation: vec![],
            })
            .unwrap(),
        );
        let comp = boxed.components()[0].clone();
        let t =
            PartialTranslation::new(boxed.clone(), vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let v = FinitePropOperator::from_partial_translation(&t);
        let p = Projection::new(boxed.clone(), comp.clone()).unwrap();
        assert!(commutator(&v, &p).is_zero());
        assert!(edge_identity_check(&v, &comp, 2, BoundaryMode::WindowRelative).unwrap());
    }

    #[test]
    fn commutator_ratio_shift_formula() {
        // Interior interval of length m: exactly two unit entries survive,
        // so the squared ratio is 2/m.
        let w = path(60);
        let t = shift(&w, 0, 59, 1);
        let v = FinitePropOperator::from_partial_translation(&t);
        for m in [10usize, 25] {
            let f = PointSet::range(20, 20 + m as u32);
            assert_eq!(
                commutator_ratio_sq(&v, &f).unwrap(),
                rat(2, m as i64),
                "m={m}"
            );
            let bound = folner_bound(&v, &f, 1, BoundaryMode::Ambient).unwrap();
            let ratio = commutator_ratio(&v, &f).unwrap();
            assert!(ratio <= bound + 1e-9);
            // 2 * 1 * sqrt(4/m) vs sqrt(2/m).
            assert!((bound - 2.0 * (4.0 / m as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_of_fixed_point_free_translation_vanishes() {
        let w = path(30);
        let t = shift(&w, 0, 20, 1);
        let v = FinitePropOperator::from_partial_translation(&t);
        assert!(crate::num::scalar_is_zero(&v.normalized_trace()));
        assert!(v.trace_factorization_check());
    }

    #[test]
    fn trace_counts_fixed_points() {
        let w = path(10);
        let t = PartialTranslation::new(w.clone(), vec![(0, 0), (1, 1), (2, 3), (3, 2), (7, 7)])
            .unwrap();
        let v = FinitePropOperator::from_partial_translation(&t);
        assert_eq!(v.normalized_trace(), Scalar::new(rat(3, 10), Rat::zero()));
    }

    #[test]
    fn conditional_expectation_is_diagonal_extraction() {
        let w = path(6);
        let a = FinitePropOperator::from_entries(
            w.clone(),
            [
                ((0, 0), scalar(1, 2)),
                ((0, 1), scalar(5, 1)),
                ((3, 3), Scalar::new(rat(0, 1), rat(2, 7))),
            ],
        )
        .unwrap();
        let e = a.conditional_expectation();
        assert_eq!(e.value(0), scalar(1, 2));
        assert_eq!(e.value(1), crate::num::scalar_zero());
        assert_eq!(e.value(3), Scalar::new(rat(0, 1), rat(2, 7)));
        assert!(a.trace_factorization_check());
    }

    #[test]
    fn pt_norm_upper_bounds_assembled_norm() {
        let w = path(16);
        let t1 = shift(&w, 0, 10, 1);
        let t2 = shift(&w, 2, 12, 2);
        let f1 = DiagonalFunction::new(w.clone(), (0..16).map(|x| (x, scalar(1, 2)))).unwrap();
        let f2 = DiagonalFunction::new(w.clone(), (0..16).map(|x| (x, scalar(-1, 3)))).unwrap();
        let (value, assembled) = pt_norm_upper(&[(t1, f1), (t2, f2)]).unwrap();
        assert!((value - (0.5 + 1.0 / 3.0)).abs() < 1e-12);
        assert!(assembled.op_norm_est().upper <= value + 1e-9);

        let w2 = path(7);
        let id = PartialTranslation::identity_on(w2.clone(), &PointSet::full(7));
        let one = DiagonalFunction::one(w2.clone());
        let (v, op) = pt_norm_upper(&[(id, one)]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(op.entries, FinitePropOperator::identity(w2).entries);
    }

    #[test]
    fn csv_export_round_trips() {
        let w = path(6);
        let a = FinitePropOperator::from_entries(
            w.clone(),
            [
                ((0, 1), scalar(1, 3)),
                ((2, 2), Scalar::new(rat(-1, 2), rat(5, 4))),
            ],
        )
        .unwrap();
        let csv = a.to_csv();
        assert!(csv.contains("0,1,1/3,0/1"));
        assert!(csv.contains("2,2,-1/2,5/4"));
        let data = a.to_data();
        let back = FinitePropOperator::from_data(w, &data).unwrap();
        assert_eq!(back.entries, a.entries);
        let header = a.export_header();
        assert_eq!(header.propagation, 1);
        assert_eq!(header.entries, 2);
    }

    #[test]
    fn projection_order_and_join() {
        let w = path(10);
        let p = Projection::new(w.clone(), PointSet::range(2, 5)).unwrap();
        let q = Projection::new(w.clone(), PointSet::range(3, 7)).unwrap();
        assert!(!p.leq(&q) && !q.leq(&p));
        let j = p.join(&q).unwrap();
        assert!(p.leq(&j) && q.leq(&j));
        assert_eq!(j.rank(), 5);
        let other = Projection::new(path(4), PointSet::singleton(0)).unwrap();
        assert!(p.join(&other).is_err());
    }

    #[test]
    fn one_diagonal_is_the_identity() {
        let w = path(5);
        let one = DiagonalFunction::one(w.clone());
        assert_eq!(one.support(), PointSet::full(5));
        assert_eq!(
            one.as_operator().entries,
            FinitePropOperator::identity(w).entries
        );
    }

    #[test]
    fn straddling_entries_rejected() {
        let boxed = Arc::new(
            build_window(&SpaceDescriptor::BoxSpace {
                components: vec![
                    SpaceDescriptor::CyclicQuotient { n: 3 },
                    SpaceDescriptor::CyclicQuotient { n: 3 },
                ],
                separation: vec![],
            })
            .unwrap(),
        );
        assert!(matches!(
            FinitePropOperator::from_entries(boxed, [((0, 4), scalar(1, 1))]),
            Err(OperatorError::StraddlesComponents(0, 4))
        ));
    }
}
