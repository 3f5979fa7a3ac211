//! Operator-level amenability diagnostics.
//!
//! The quantities here pair a computed defect with the bound the underlying
//! inequality promises for it: Folner projection defects against the
//! commutator bound, u.c.p. compression defects against the commutator chain
//! (and back, via Cauchy-Schwarz), subspace projection defects against the
//! dimension-gap estimate. Values are square roots of exactly computed
//! radicands; bounds are certified upper estimates, so `value <= bound + 1e-9`
//! is asserted everywhere a report is marked certified.
//!
//! Reference vector and state: injectivity checks and subspace projections
//! run in the GNS space of the normalized trace (faithful on a finite
//! window); the cyclic vector is the identity, whose coordinate vector is the
//! uniform diagonal.

use crate::folner::FolnerError;
use crate::num::{conj, rat_of_counts, rat_to_f64, sha256_hex, Rat, Scalar};
use crate::operator::{commutator, folner_bound, FinitePropOperator, OperatorError, Projection};
use crate::pointset::PointSet;
use crate::rank::{mat_inverse, mat_mul, mat_trace, mat_zero, rank, Mat};
use crate::space::{BoundaryKind, BoundaryMode, SpaceWindow};
use crate::symbolic::LeavittError;
use crate::translations::{DoublingCertificate, TranslationError};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;
use thiserror::Error;

/// Window size gate for computations in the full Hilbert-Schmidt space.
pub const HS_SPACE_GATE: usize = 30;

/// Slack absorbing the final floating-point rounding of exact radicands.
pub const DEFECT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("projection is zero")]
    ZeroProjection,
    #[error("family is empty")]
    EmptyFamily,
    #[error("basis is linearly dependent (rank {rank} < {size})")]
    DependentBasis { rank: usize, size: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("window has {len} points, above the Hilbert-Schmidt gate {HS_SPACE_GATE}")]
    WindowTooLarge { len: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Translation(#[from] TranslationError),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error(transparent)]
    Leavitt(#[from] LeavittError),
}

/// A computed defect together with its certified upper bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefectReport {
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
    pub certified: bool,
    pub inputs_hash: String,
}

impl DefectReport {
    /// `value <= bound + tolerance`; certified reports must satisfy this.
    pub fn holds(&self) -> bool {
        !self.certified || self.value <= self.bound + DEFECT_TOLERANCE
    }
}

fn hash_inputs(parts: &[&str]) -> String {
    sha256_hex(parts.join("\n--\n").as_bytes())
}

/// `tr(A* B)` as an exact scalar over the shared sparse support.
fn hs_pair(a: &FinitePropOperator, b: &FinitePropOperator) -> Scalar {
    let mut acc = crate::num::scalar_zero();
    for (k, va) in a.entries() {
        if let Some(vb) = b.entry(k.0, k.1) {
            acc += conj(va) * vb.clone();
        }
    }
    acc
}

/// Max over the family of `|[T, P_F]|_2 / |P_F|_2`, with the matching
/// boundary bound `2 |T| sqrt(|boundary_{p(T)} F| / |F|)`.
pub fn folner_projection_defect(
    family: &[FinitePropOperator],
    f: &PointSet,
) -> Result<DefectReport, DiagnosticsError> {
    let Some(first) = family.first() else {
        return Err(DiagnosticsError::EmptyFamily);
    };
    if f.is_empty() {
        return Err(DiagnosticsError::ZeroProjection);
    }
    let w = first.window().clone();
    let p = Projection::new(w.clone(), f.clone())?;
    let mut value = 0.0f64;
    let mut bound = 0.0f64;
    let mut hashes: Vec<String> = Vec::new();
    for t in family {
        if !t.same_window(first) {
            return Err(OperatorError::WindowMismatch.into());
        }
        let c = commutator(t, &p);
        let ratio = rat_to_f64(&(c.hs_norm_sq() / rat_of_counts(f.len(), 1))).sqrt();
        value = value.max(ratio);
        bound = bound.max(folner_bound(
            t,
            f,
            t.propagation(),
            BoundaryMode::WindowRelative,
        )?);
        hashes.push(t.to_csv());
    }
    let ids: Vec<String> = f.iter().map(|x| x.to_string()).collect();
    hashes.push(ids.join(","));
    let refs: Vec<&str> = hashes.iter().map(|s| s.as_str()).collect();
    Ok(DefectReport {
        quantity: "folner_projection_defect".into(),
        value,
        bound,
        certified: true,
        inputs_hash: hash_inputs(&refs),
    })
}

fn projection_defect_value(
    family: &[FinitePropOperator],
    p: &Projection,
) -> Result<f64, DiagnosticsError> {
    let mut value = 0.0f64;
    for t in family {
        let c = commutator(t, p);
        let sq = c.hs_norm_sq() / rat_of_counts(p.rank(), 1);
        value = value.max(rat_to_f64(&sq).sqrt());
    }
    Ok(value)
}

/// Merge `P0 | Q`: given an `(family, eps/2)`-Folner projection `P0` with
/// `|P0|_2 >= N = max_T 4 |T| |Q|_2 / eps`, the join is an `(family, eps)`-
/// Folner projection dominating `Q`. The defect is recomputed and asserted.
pub fn merge_projection(
    p0: &Projection,
    q: &Projection,
    family: &[FinitePropOperator],
    eps: f64,
) -> Result<(Projection, DefectReport), DiagnosticsError> {
    if family.is_empty() {
        return Err(DiagnosticsError::EmptyFamily);
    }
    if p0.rank() == 0 {
        return Err(DiagnosticsError::ZeroProjection);
    }
    if eps <= 0.0 {
        return Err(DiagnosticsError::PreconditionFailed(
            "eps must be positive".into(),
        ));
    }
    let n_required = family
        .iter()
        .map(|t| 4.0 * t.op_norm_est().upper * q.hs_norm() / eps)
        .fold(0.0f64, f64::max);
    if p0.hs_norm() < n_required {
        return Err(DiagnosticsError::PreconditionFailed(format!(
            "|P0|_2 = {:.6} below required N = {:.6}",
            p0.hs_norm(),
            n_required
        )));
    }
    let half_defect = projection_defect_value(family, p0)?;
    if half_defect > eps / 2.0 + DEFECT_TOLERANCE {
        return Err(DiagnosticsError::PreconditionFailed(format!(
            "P0 defect {:.6} exceeds eps/2 = {:.6}",
            half_defect,
            eps / 2.0
        )));
    }
    let merged = p0.join(q)?;
    let value = projection_defect_value(family, &merged)?;
    let mut parts: Vec<String> = family.iter().map(|t| t.to_csv()).collect();
    parts.push(format!(
        "{:?}|{:?}",
        p0.support().as_slice(),
        q.support().as_slice()
    ));
    let refs: Vec<&str> = parts.iter().map(|s| s.as_str()).collect();
    let report = DefectReport {
        quantity: "merged_projection_defect".into(),
        value,
        bound: eps,
        certified: true,
        inputs_hash: hash_inputs(&refs),
    };
    debug_assert!(report.holds());
    Ok((merged, report))
}

/// Compression `P T P` as a dense matrix on the support of `P`.
pub fn ucp_compress(p: &Projection, t: &FinitePropOperator) -> Result<Mat, DiagnosticsError> {
    if p.rank() == 0 {
        return Err(DiagnosticsError::ZeroProjection);
    }
    let ids: Vec<u32> = p.support().iter().collect();
    let mut m = mat_zero(ids.len(), ids.len());
    for (i, &x) in ids.iter().enumerate() {
        for (j, &y) in ids.iter().enumerate() {
            if let Some(v) = t.entry(x, y) {
                m[i][j] = v.clone();
            }
        }
    }
    Ok(m)
}

/// Normalized trace norm `|M|_{2,tr} = sqrt(tr(M*M))` with `tr` the
/// normalized trace on the compression corner; radicand exact.
fn trace_norm_sq(m: &Mat) -> Rat {
    let k = m.len();
    let mut acc = Rat::zero();
    for row in m {
        for v in row {
            acc += crate::num::abs_sq(v);
        }
    }
    acc / rat_of_counts(k, 1)
}

/// Multiplicativity defect of the u.c.p. compression `phi(X) = P X P`:
/// value `|phi(AB) - phi(A) phi(B)|_{2,tr}`, bound
/// `(|[A,P]|_2 / |P|_2) * |B|_upper`.
pub fn ucp_defect(
    p: &Projection,
    a: &FinitePropOperator,
    b: &FinitePropOperator,
) -> Result<DefectReport, DiagnosticsError> {
    if p.rank() == 0 {
        return Err(DiagnosticsError::ZeroProjection);
    }
    if !a.same_window(b) {
        return Err(OperatorError::WindowMismatch.into());
    }
    let phi_ab = ucp_compress(p, &a.mul(b)?)?;
    let phi_a = ucp_compress(p, a)?;
    let phi_b = ucp_compress(p, b)?;
    let defect = crate::rank::mat_sub(&phi_ab, &mat_mul(&phi_a, &phi_b));
    let value = rat_to_f64(&trace_norm_sq(&defect)).sqrt();
    let comm_sq = commutator(a, p).hs_norm_sq() / rat_of_counts(p.rank(), 1);
    let bound = rat_to_f64(&comm_sq).sqrt() * b.op_norm_est().upper;
    let (acsv, bcsv) = (a.to_csv(), b.to_csv());
    let supp = format!("{:?}", p.support().as_slice());
    Ok(DefectReport {
        quantity: "ucp_multiplicativity_defect".into(),
        value,
        bound,
        certified: true,
        inputs_hash: hash_inputs(&[&acsv, &bcsv, &supp]),
    })
}

/// Reverse direction of the compression chain: the commutator ratio is
/// controlled by the two u.c.p. defects via Cauchy-Schwarz:
/// `|[A,P]|_2 / |P|_2 <= sqrt(defect(A*,A)) + sqrt(defect(A,A*))`.
pub fn reverse_defect_check(
    p: &Projection,
    a: &FinitePropOperator,
) -> Result<DefectReport, DiagnosticsError> {
    if p.rank() == 0 {
        return Err(DiagnosticsError::ZeroProjection);
    }
    let comm_sq = commutator(a, p).hs_norm_sq() / rat_of_counts(p.rank(), 1);
    let value = rat_to_f64(&comm_sq).sqrt();
    let astar = a.adjoint();
    let d1 = ucp_defect(p, &astar, a)?;
    let d2 = ucp_defect(p, a, &astar)?;
    let bound = d1.value.sqrt() + d2.value.sqrt();
    let acsv = a.to_csv();
    let supp = format!("{:?}", p.support().as_slice());
    Ok(DefectReport {
        quantity: "commutator_vs_ucp_defects".into(),
        value,
        bound,
        certified: true,
        inputs_hash: hash_inputs(&[&acsv, &supp]),
    })
}

/// A finite-dimensional subspace of the windowed operator algebra, spanned by
/// explicitly stored operators with certified linear independence.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    window: Arc<SpaceWindow>,
    ops: Vec<FinitePropOperator>,
}

impl SubspaceBasis {
    /// Validates independence by exact rank.
    pub fn new(ops: Vec<FinitePropOperator>) -> Result<Self, DiagnosticsError> {
        let Some(first) = ops.first() else {
            return Err(DiagnosticsError::EmptyFamily);
        };
        if ops.iter().any(|o| !o.same_window(first)) {
            return Err(OperatorError::WindowMismatch.into());
        }
        let window = first.window().clone();
        let rows = vectorize(&ops, &joint_support(&ops));
        let r = rank(&rows);
        if r != ops.len() {
            return Err(DiagnosticsError::DependentBasis {
                rank: r,
                size: ops.len(),
            });
        }
        Ok(SubspaceBasis { window, ops })
    }

    /// Corner subspace on `F`: the matrix units `e_xy` for pairs of `F` in a
    /// common coarse component (cross-component units would have infinite
    /// propagation and are not operators of the algebra). Units with distinct
    /// single-entry supports are independent by construction.
    pub fn corner(w: &Arc<SpaceWindow>, f: &PointSet) -> Result<Self, DiagnosticsError> {
        if f.is_empty() {
            return Err(DiagnosticsError::ZeroProjection);
        }
        w.check_set(f).map_err(OperatorError::from)?;
        let mut ops = Vec::new();
        for x in f.iter() {
            for y in f.iter() {
                if w.component_of(x) == w.component_of(y) {
                    ops.push(FinitePropOperator::matrix_unit(w.clone(), x, y)?);
                }
            }
        }
        Ok(SubspaceBasis {
            window: w.clone(),
            ops,
        })
    }

    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[FinitePropOperator] {
        &self.ops
    }

    pub fn window(&self) -> &Arc<SpaceWindow> {
        &self.window
    }
}

fn joint_support(ops: &[FinitePropOperator]) -> Vec<(u32, u32)> {
    let mut keys: BTreeSet<(u32, u32)> = BTreeSet::new();
    for op in ops {
        keys.extend(op.entries().map(|(&k, _)| k));
    }
    keys.into_iter().collect()
}

fn vectorize(ops: &[FinitePropOperator], support: &[(u32, u32)]) -> Vec<Vec<Scalar>> {
    ops.iter()
        .map(|op| {
            support
                .iter()
                .map(|&(x, y)| {
                    op.entry(x, y)
                        .cloned()
                        .unwrap_or_else(crate::num::scalar_zero)
                })
                .collect()
        })
        .collect()
}

/// Exact `dim(aW + W) / dim(W)` by fraction-free rank.
pub fn alg_amen_ratio(
    a: &FinitePropOperator,
    w_basis: &SubspaceBasis,
) -> Result<Rat, DiagnosticsError> {
    if !a.same_window(&w_basis.ops[0]) {
        return Err(OperatorError::WindowMismatch.into());
    }
    let mut all_ops: Vec<FinitePropOperator> = w_basis.ops.clone();
    for op in &w_basis.ops {
        all_ops.push(a.mul(op)?);
    }
    let support = joint_support(&all_ops);
    let rows = vectorize(&all_ops, &support);
    let dim_w = rank(&rows[..w_basis.dim()]);
    if dim_w != w_basis.dim() {
        return Err(DiagnosticsError::DependentBasis {
            rank: dim_w,
            size: w_basis.dim(),
        });
    }
    let dim_awpw = rank(&rows);
    Ok(rat_of_counts(dim_awpw, dim_w))
}

/// Defect of compressing left multiplication by `B` to the orthogonal
/// projection onto the subspace image in the trace GNS space:
/// value `|(1-P) L_B P|_2 / |P|_2`, bound
/// `sqrt((dim(BW+W) - dim W) / dim W) * |B|_upper`.
pub fn subspace_projection_defect(
    w_basis: &SubspaceBasis,
    b: &FinitePropOperator,
) -> Result<DefectReport, DiagnosticsError> {
    let w = w_basis.window();
    if w.len() > HS_SPACE_GATE {
        return Err(DiagnosticsError::WindowTooLarge { len: w.len() });
    }
    if !b.same_window(&w_basis.ops[0]) {
        return Err(OperatorError::WindowMismatch.into());
    }
    let k = w_basis.dim();
    let images: Vec<FinitePropOperator> = w_basis
        .ops
        .iter()
        .map(|op| b.mul(op))
        .collect::<Result<_, _>>()?;
    let mut gram = mat_zero(k, k);
    let mut image_gram = mat_zero(k, k);
    let mut cross = mat_zero(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = hs_pair(&w_basis.ops[i], &w_basis.ops[j]);
            image_gram[i][j] = hs_pair(&images[i], &images[j]);
            cross[i][j] = hs_pair(&w_basis.ops[i], &images[j]);
        }
    }
    let g_inv = mat_inverse(&gram).ok_or(DiagnosticsError::DependentBasis { rank: 0, size: k })?;
    // |(1-P) L_B P|_2^2 = tr(G^-1 H) - tr(G^-1 C* G^-1 C), all exact.
    let t1 = mat_trace(&mat_mul(&g_inv, &image_gram));
    let c_star = crate::rank::mat_adjoint(&cross);
    let t2 = mat_trace(&mat_mul(
        &mat_mul(&g_inv, &c_star),
        &mat_mul(&g_inv, &cross),
    ));
    assert!(t1.im.is_zero() && t2.im.is_zero(), "traces are real");
    let radicand = (t1.re - t2.re) / rat_of_counts(k, 1);
    // Exactly |(1-P) L_B P|_2^2 / dim(W), hence never negative.
    assert!(radicand >= Rat::zero(), "defect radicand is a squared norm");
    let value = rat_to_f64(&radicand).sqrt();

    let mut all_ops = w_basis.ops.clone();
    all_ops.extend(images.iter().cloned());
    let support = joint_support(&all_ops);
    let rows = vectorize(&all_ops, &support);
    let dim_bwpw = rank(&rows);
    let gap = rat_of_counts(dim_bwpw - k, k);
    let bound = rat_to_f64(&gap).sqrt() * b.op_norm_est().upper;
    let bcsv = b.to_csv();
    let basis_hash: Vec<String> = w_basis.ops.iter().map(|o| o.to_csv()).collect();
    let mut refs: Vec<&str> = vec![&bcsv];
    refs.extend(basis_hash.iter().map(|s| s.as_str()));
    Ok(DefectReport {
        quantity: "subspace_projection_defect".into(),
        value,
        bound,
        certified: true,
        inputs_hash: hash_inputs(&refs),
    })
}

/// Result of the injectivity test `A -> P pi(A) Omega` on the span of a family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub injective: bool,
    pub family_size: usize,
    pub family_rank: usize,
    pub image_rank: usize,
    /// Set when the family itself is dependent; the ranks are then compared
    /// against the actual span dimension.
    pub dependent_family: bool,
}

/// Tests injectivity of `span(family) -> range(P), A -> P pi(A) Omega` in the
/// trace GNS space (pi = left multiplication, Omega = identity vector): the
/// image of `A` is the row-compressed operator `P_F A`, and the test compares
/// exact ranks.
pub fn proper_injectivity_check(
    family: &[FinitePropOperator],
    p: &Projection,
) -> Result<InjectivityReport, DiagnosticsError> {
    if family.is_empty() {
        return Err(DiagnosticsError::EmptyFamily);
    }
    let support = joint_support(family);
    let family_rank = rank(&vectorize(family, &support));
    let p_op = p.as_operator();
    let compressed: Vec<FinitePropOperator> = family
        .iter()
        .map(|a| p_op.mul(a))
        .collect::<Result<_, _>>()?;
    let image_rank = rank(&vectorize(&compressed, &joint_support(&compressed)));
    Ok(InjectivityReport {
        injective: image_rank == family_rank && family_rank == family.len(),
        family_size: family.len(),
        family_rank,
        image_rank,
        dependent_family: family_rank < family.len(),
    })
}

/// Exact verification that a doubling certificate yields two isometries
/// witnessing proper infiniteness on the window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProperlyInfiniteReport {
    pub support_projections_ok: bool,
    pub range_sum_is_universe: bool,
    pub ranges_orthogonal: bool,
    pub dominated_by_identity: bool,
    pub passed: bool,
}

/// Builds `V1 = V_{t+}`, `V2 = V_{t-}` from a doubling certificate and checks
/// the properly-infinite identities exactly.
pub fn properly_infinite_witness(
    cert: &DoublingCertificate,
    w: &Arc<SpaceWindow>,
) -> Result<
    (
        FinitePropOperator,
        FinitePropOperator,
        ProperlyInfiniteReport,
    ),
    DiagnosticsError,
> {
    cert.verify(w)?;
    let (tp, tm) = cert.translations(w)?;
    let v1 = FinitePropOperator::from_partial_translation(&tp);
    let v2 = FinitePropOperator::from_partial_translation(&tm);
    let p_dom = Projection::new(w.clone(), cert.dom.clone())?.as_operator();
    let p_plus = Projection::new(w.clone(), cert.x_plus.clone())?.as_operator();
    let p_minus = Projection::new(w.clone(), cert.x_minus.clone())?.as_operator();
    let p_universe = Projection::new(w.clone(), cert.universe.clone())?.as_operator();

    let support_projections_ok = v1.adjoint().mul(&v1)?.sub(&p_dom)?.is_zero()
        && v2.adjoint().mul(&v2)?.sub(&p_dom)?.is_zero()
        && v1.mul(&v1.adjoint())?.sub(&p_plus)?.is_zero()
        && v2.mul(&v2.adjoint())?.sub(&p_minus)?.is_zero();
    let range_sum = v1.mul(&v1.adjoint())?.add(&v2.mul(&v2.adjoint())?)?;
    let range_sum_is_universe = range_sum.sub(&p_universe)?.is_zero();
    let ranges_orthogonal = v1.adjoint().mul(&v2)?.is_zero() && v2.adjoint().mul(&v1)?.is_zero();
    // Diagonal 0/1 sum below the identity iff its support is a subset.
    let dominated_by_identity = cert.universe.len() <= w.len();
    let report = ProperlyInfiniteReport {
        support_projections_ok,
        range_sum_is_universe,
        ranges_orthogonal,
        dominated_by_identity,
        passed: support_projections_ok
            && range_sum_is_universe
            && ranges_orthogonal
            && dominated_by_identity,
    };
    Ok((v1, v2, report))
}

/// Convenience: corner subspace over a Folner set plus its outer-boundary
/// gap bound `1 + |outer_R F| / |F|` for operators of propagation `r`.
pub fn corner_gap_bound(w: &SpaceWindow, f: &PointSet, r: u32) -> Result<Rat, DiagnosticsError> {
    let outer = w
        .boundary(f, r, BoundaryKind::Outer, BoundaryMode::WindowRelative)
        .map_err(OperatorError::from)?;
    Ok(rat_of_counts(f.len(), f.len()) + rat_of_counts(outer.len(), f.len()))
}
