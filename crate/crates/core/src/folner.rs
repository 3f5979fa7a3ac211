//! Isoperimetric (Folner) set search and certification.
//!
//! A certificate stores the set, the radius, the exact boundary count and the
//! exact rational ratio `|boundary_R F| / |F|`; re-running the boundary
//! computation must reproduce it bit-for-bit. Search strategies are heuristic
//! and budget-bounded: failure to find a set is never a proof of
//! non-amenability. Only the exhaustive strategy, on windows small enough to
//! enumerate completely, may emit a non-existence certificate.

use crate::num::{rat_of_counts, serde_rat, Rat};
use crate::pointset::PointSet;
use crate::space::{BoundaryKind, BoundaryMode, SpaceError, SpaceWindow};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

/// Windows up to this size admit the exhaustive strategy.
pub const EXHAUSTIVE_GATE: usize = 20;

#[derive(Debug, Error)]
pub enum FolnerError {
    #[error("candidate set is empty")]
    EmptySet,
    #[error("epsilon must be nonnegative")]
    NegativeEps,
    #[error("constraint set is not contained in the window")]
    ConstraintOutOfWindow,
    #[error("window has {0} points; exhaustive search is gated to {EXHAUSTIVE_GATE}")]
    WindowTooLargeForExhaustive(usize),
    #[error("certificate does not re-verify: {0}")]
    BadCertificate(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Exact `|boundary_R F| / |F|` (two-sided boundary) in the given mode.
pub fn boundary_ratio(
    w: &SpaceWindow,
    f: &PointSet,
    r: u32,
    mode: BoundaryMode,
) -> Result<Rat, FolnerError> {
    if f.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    let b = w.boundary(f, r, BoundaryKind::TwoSided, mode)?;
    Ok(rat_of_counts(b.len(), f.len()))
}

/// A machine-checkable Folner certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FolnerCertificate {
    pub f: PointSet,
    pub r: u32,
    pub boundary_count: usize,
    pub size: usize,
    #[serde(with = "serde_rat")]
    pub ratio: Rat,
    /// True when the boundary is ambient-exact, false when window-relative.
    pub ambient: bool,
}

impl FolnerCertificate {
    /// Computes a certificate for an explicit set.
    pub fn compute(
        w: &SpaceWindow,
        f: PointSet,
        r: u32,
        mode: BoundaryMode,
    ) -> Result<Self, FolnerError> {
        if f.is_empty() {
            return Err(FolnerError::EmptySet);
        }
        let b = w.boundary(&f, r, BoundaryKind::TwoSided, mode)?;
        Ok(FolnerCertificate {
            ratio: rat_of_counts(b.len(), f.len()),
            boundary_count: b.len(),
            size: f.len(),
            r,
            f,
            ambient: mode == BoundaryMode::Ambient,
        })
    }

    pub fn mode(&self) -> BoundaryMode {
        if self.ambient {
            BoundaryMode::Ambient
        } else {
            BoundaryMode::WindowRelative
        }
    }

    pub fn is_folner(&self, eps: &Rat) -> bool {
        self.ratio <= *eps
    }

    /// Recomputes the boundary and checks every stored field.
    pub fn verify(&self, w: &SpaceWindow) -> Result<(), FolnerError> {
        if self.f.is_empty() {
            return Err(FolnerError::BadCertificate("empty set".into()));
        }
        if self.f.len() != self.size {
            return Err(FolnerError::BadCertificate("size mismatch".into()));
        }
        let b = w.boundary(&self.f, self.r, BoundaryKind::TwoSided, self.mode())?;
        if b.len() != self.boundary_count {
            return Err(FolnerError::BadCertificate(format!(
                "boundary count {} recomputes to {}",
                self.boundary_count,
                b.len()
            )));
        }
        if self.ratio != rat_of_counts(b.len(), self.f.len()) {
            return Err(FolnerError::BadCertificate("ratio mismatch".into()));
        }
        Ok(())
    }
}

/// Claim, produced only by completed exhaustive enumeration, that no nonempty
/// subset of `region` meets the ratio bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonExistenceCertificate {
    pub r: u32,
    #[serde(with = "serde_rat")]
    pub eps: Rat,
    pub mode: BoundaryMode,
    pub region: PointSet,
    pub subsets_examined: u64,
    pub window_hash: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Balls around a deterministic sample of centers, radius-major.
    BallSweep,
    /// Local add/remove moves with a tabu list, steepest descent.
    GreedyExchange,
    /// Randomized exchange with geometric cooling.
    Anneal,
    /// All nonempty subsets; gated to tiny windows.
    Exhaustive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FolnerQuery {
    pub r: u32,
    #[serde(with = "serde_rat")]
    pub eps: Rat,
    pub mode: BoundaryMode,
    pub strategy: SearchStrategy,
    pub budget: u64,
    pub seed: u64,
}

impl FolnerQuery {
    pub fn new(r: u32, eps: Rat, mode: BoundaryMode, strategy: SearchStrategy) -> Self {
        FolnerQuery {
            r,
            eps,
            mode,
            strategy,
            budget: 100_000,
            seed: 0,
        }
    }
}

/// Constraints for the proper search variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProperConstraint {
    MinSize { n: usize },
    Superset { a: PointSet },
}

impl ProperConstraint {
    fn satisfied_by(&self, f: &PointSet) -> bool {
        match self {
            ProperConstraint::MinSize { n } => f.len() >= *n,
            ProperConstraint::Superset { a } => a.is_subset_of(f),
        }
    }
}

/// Search result. `certificate` is present iff a set meeting `eps` was found
/// and re-verified; `best` always records the smallest ratio examined, so an
/// exhausted budget still reports an honest floor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub certificate: Option<FolnerCertificate>,
    pub best: Option<FolnerCertificate>,
    pub examined: u64,
    pub budget: u64,
    pub non_existence: Option<NonExistenceCertificate>,
}

struct Tracker<'w> {
    w: &'w SpaceWindow,
    r: u32,
    mode: BoundaryMode,
    best: Option<FolnerCertificate>,
    examined: u64,
    budget: u64,
}

impl<'w> Tracker<'w> {
    fn new(w: &'w SpaceWindow, r: u32, mode: BoundaryMode, budget: u64) -> Self {
        Tracker {
            w,
            r,
            mode,
            best: None,
            examined: 0,
            budget,
        }
    }

    fn out_of_budget(&self) -> bool {
        self.examined >= self.budget
    }

    /// Evaluates a candidate, updating the incumbent under (ratio, lex) order.
    /// Returns the certificate when the candidate was evaluable.
    fn eval(&mut self, f: &PointSet) -> Option<FolnerCertificate> {
        if f.is_empty() || self.out_of_budget() {
            return None;
        }
        self.examined += 1;
        let cert = FolnerCertificate::compute(self.w, f.clone(), self.r, self.mode).ok()?;
        let better = match &self.best {
            None => true,
            Some(b) => match cert.ratio.cmp(&b.ratio) {
                Ordering::Less => true,
                Ordering::Equal => cert.f.lex_cmp(&b.f) == Ordering::Less,
                Ordering::Greater => false,
            },
        };
        if better {
            self.best = Some(cert.clone());
        }
        Some(cert)
    }

    fn finish(self, eps: &Rat, non_existence: Option<NonExistenceCertificate>) -> SearchOutcome {
        let certificate = self.best.as_ref().filter(|c| c.is_folner(eps)).cloned();
        SearchOutcome {
            certificate,
            best: self.best,
            examined: self.examined,
            budget: self.budget,
            non_existence,
        }
    }
}

/// Region a candidate set may use: the whole window, or the r-interior in
/// ambient mode.
fn allowed_region(w: &SpaceWindow, r: u32, mode: BoundaryMode) -> PointSet {
    match mode {
        BoundaryMode::WindowRelative => w.all_points(),
        BoundaryMode::Ambient => w.interior_set(r),
    }
}

fn center_sample(region: &PointSet, max: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    if region.len() <= max {
        return region.iter().collect();
    }
    let ids: Vec<u32> = region.iter().collect();
    let mut picks = PointSet::empty();
    // Median point first so symmetric windows get their natural center.
    picks.insert(ids[ids.len() / 2]);
    while picks.len() < max {
        picks.insert(ids[rng.gen_range(0..ids.len())]);
    }
    picks.iter().collect()
}

/// Heuristic search for an `(r, eps)`-Folner set.
pub fn search_folner(w: &SpaceWindow, q: &FolnerQuery) -> Result<SearchOutcome, FolnerError> {
    if q.eps < Rat::zero() {
        return Err(FolnerError::NegativeEps);
    }
    let region = allowed_region(w, q.r, q.mode);
    let mut tracker = Tracker::new(w, q.r, q.mode, q.budget);
    let mut non_existence = None;
    match q.strategy {
        SearchStrategy::BallSweep => {
            ball_sweep(w, q, &region, &mut tracker, None);
        }
        SearchStrategy::GreedyExchange => {
            let seedset = seed_set(w, q, &region, &mut tracker);
            greedy_exchange(w, q, &region, seedset, &mut tracker, None);
        }
        SearchStrategy::Anneal => {
            let seedset = seed_set(w, q, &region, &mut tracker);
            anneal(w, q, &region, seedset, &mut tracker);
        }
        SearchStrategy::Exhaustive => {
            non_existence = exhaustive(w, q, &region, &mut tracker)?;
        }
    }
    Ok(tracker.finish(&q.eps, non_existence))
}

/// Proper search: the certificate must additionally contain a prescribed set
/// or meet a minimum cardinality.
pub fn search_proper_folner(
    w: &SpaceWindow,
    q: &FolnerQuery,
    constraint: &ProperConstraint,
) -> Result<SearchOutcome, FolnerError> {
    if q.eps < Rat::zero() {
        return Err(FolnerError::NegativeEps);
    }
    let region = allowed_region(w, q.r, q.mode);
    let mut tracker = Tracker::new(w, q.r, q.mode, q.budget);
    match constraint {
        ProperConstraint::MinSize { .. } => {
            ball_sweep(w, q, &region, &mut tracker, Some(constraint));
            // Dilating the incumbent can only help both the constraint and,
            // on well-behaved windows, the ratio.
            if !incumbent_ok(&tracker, &q.eps, constraint) {
                if let Some(base) = tracker.best.as_ref().map(|b| b.f.clone()) {
                    dilation_sweep(w, q, &region, base, &mut tracker, constraint);
                }
            }
        }
        ProperConstraint::Superset { a } => {
            w.check_set(a)
                .map_err(|_| FolnerError::ConstraintOutOfWindow)?;
            if a.is_empty() {
                return Err(FolnerError::EmptySet);
            }
            dilation_sweep(w, q, &region, a.clone(), &mut tracker, constraint);
        }
    }
    // A constrained outcome only certifies sets satisfying the constraint.
    let mut outcome = tracker.finish(&q.eps, None);
    if let Some(cert) = &outcome.certificate {
        if !constraint.satisfied_by(&cert.f) {
            outcome.certificate = None;
        }
    }
    Ok(outcome)
}

fn incumbent_ok(tracker: &Tracker, eps: &Rat, constraint: &ProperConstraint) -> bool {
    tracker
        .best
        .as_ref()
        .is_some_and(|b| b.is_folner(eps) && constraint.satisfied_by(&b.f))
}

/// Best ball among a tiny sweep, as a starting point for local strategies.
fn seed_set(
    w: &SpaceWindow,
    q: &FolnerQuery,
    region: &PointSet,
    tracker: &mut Tracker,
) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(q.seed ^ 0x5eed);
    let centers = center_sample(region, 8, &mut rng);
    let mut best: Option<FolnerCertificate> = None;
    for &c in &centers {
        for radius in 0..=q.r.max(2) {
            if tracker.out_of_budget() {
                break;
            }
            let Ok(ball) = w.ball(c, radius) else { break };
            let cand = ball.intersection(region);
            if let Some(cert) = tracker.eval(&cand) {
                let better = best.as_ref().is_none_or(|b| cert.ratio < b.ratio);
                if better {
                    best = Some(cert);
                }
            }
        }
    }
    best.map(|b| b.f).unwrap_or_else(|| {
        region
            .iter()
            .next()
            .map(PointSet::singleton)
            .unwrap_or_default()
    })
}

fn ball_sweep(
    w: &SpaceWindow,
    q: &FolnerQuery,
    region: &PointSet,
    tracker: &mut Tracker,
    constraint: Option<&ProperConstraint>,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
    let centers = center_sample(region, 24, &mut rng);
    let mut prev: Vec<Option<PointSet>> = vec![None; centers.len()];
    let mut radius = 0u32;
    loop {
        let mut grew = false;
        for (i, &c) in centers.iter().enumerate() {
            if tracker.out_of_budget() {
                return;
            }
            let Ok(ball) = w.ball(c, radius) else {
                continue;
            };
            let cand = ball.intersection(region);
            if prev[i].as_ref() == Some(&cand) {
                continue;
            }
            grew = true;
            prev[i] = Some(cand.clone());
            if constraint.is_some_and(|con| !con.satisfied_by(&cand)) {
                continue;
            }
            tracker.eval(&cand);
        }
        // Stop at the end of the first layer containing a certified candidate:
        // deterministic, and later layers only grow the sets.
        let done = tracker.best.as_ref().is_some_and(|b| {
            b.is_folner(&q.eps) && constraint.is_none_or(|c| c.satisfied_by(&b.f))
        });
        if done || !grew || tracker.out_of_budget() {
            return;
        }
        radius += 1;
    }
}

/// Evaluates `N_rho(base)` (clipped to the region) for growing `rho`.
fn dilation_sweep(
    w: &SpaceWindow,
    q: &FolnerQuery,
    region: &PointSet,
    base: PointSet,
    tracker: &mut Tracker,
    constraint: &ProperConstraint,
) {
    let mut current = base.intersection(region);
    if current.is_empty() {
        return;
    }
    let mut rho = 0u32;
    loop {
        if constraint.satisfied_by(&current) {
            tracker.eval(&current);
        }
        let done = tracker
            .best
            .as_ref()
            .is_some_and(|b| b.is_folner(&q.eps) && constraint.satisfied_by(&b.f));
        if done || tracker.out_of_budget() {
            return;
        }
        rho += 1;
        let Ok(next) = w.neighborhood(&current, 1) else {
            return;
        };
        let next = next.intersection(region);
        if next == current || rho > w.len() as u32 {
            return;
        }
        current = next;
    }
}

fn greedy_exchange(
    w: &SpaceWindow,
    q: &FolnerQuery,
    region: &PointSet,
    start: PointSet,
    tracker: &mut Tracker,
    constraint: Option<&ProperConstraint>,
) {
    const TABU_TENURE: u64 = 7;
    let mut current = start;
    if current.is_empty() {
        return;
    }
    let mut tabu: Vec<(u32, u64)> = Vec::new();
    let mut move_no = 0u64;
    let Some(mut current_cert) = tracker.eval(&current) else {
        return;
    };
    while !tracker.out_of_budget() {
        move_no += 1;
        tabu.retain(|&(_, until)| until > move_no);
        let mut best_move: Option<(Rat, PointSet, u32)> = None;
        let adds = w
            .neighborhood(&current, 1)
            .map(|n| n.intersection(region).difference(&current))
            .unwrap_or_default();
        let removes: Vec<u32> = if current.len() > 1 {
            current.iter().collect()
        } else {
            Vec::new()
        };
        for x in adds.iter().chain(removes.iter().copied()) {
            if tabu.iter().any(|&(p, _)| p == x) {
                continue;
            }
            let mut cand = current.clone();
            if cand.contains(x) {
                cand.remove(x);
            } else {
                cand.insert(x);
            }
            if cand.is_empty() || constraint.is_some_and(|c| !c.satisfied_by(&cand)) {
                continue;
            }
            if let Some(cert) = tracker.eval(&cand) {
                let better = match &best_move {
                    None => true,
                    Some((r, f, _)) => {
                        cert.ratio < *r || (cert.ratio == *r && cand.lex_cmp(f) == Ordering::Less)
                    }
                };
                if better {
                    best_move = Some((cert.ratio.clone(), cand, x));
                }
            }
            if tracker.out_of_budget() {
                return;
            }
        }
        match best_move {
            Some((ratio, cand, moved)) if ratio < current_cert.ratio => {
                current = cand;
                current_cert = FolnerCertificate::compute(w, current.clone(), q.r, q.mode)
                    .expect("move candidates were already evaluable");
                debug_assert_eq!(current_cert.ratio, ratio);
                tabu.push((moved, move_no + TABU_TENURE));
            }
            _ => return, // local optimum
        }
        if current_cert.is_folner(&q.eps) {
            return;
        }
    }
}

fn anneal(
    w: &SpaceWindow,
    q: &FolnerQuery,
    region: &PointSet,
    start: PointSet,
    tracker: &mut Tracker,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
    let mut current = start;
    if current.is_empty() {
        return;
    }
    let Some(mut cert) = tracker.eval(&current) else {
        return;
    };
    let mut temp = 0.5f64;
    while !tracker.out_of_budget() {
        if tracker.best.as_ref().is_some_and(|b| b.is_folner(&q.eps)) {
            return;
        }
        let adds = w
            .neighborhood(&current, 1)
            .map(|n| n.intersection(region).difference(&current))
            .unwrap_or_default();
        let do_add = current.len() <= 1 || (!adds.is_empty() && rng.gen_bool(0.6));
        let mut cand = current.clone();
        if do_add && !adds.is_empty() {
            let pick: Vec<u32> = adds.iter().collect();
            cand.insert(pick[rng.gen_range(0..pick.len())]);
        } else if current.len() > 1 {
            let pick: Vec<u32> = current.iter().collect();
            cand.remove(pick[rng.gen_range(0..pick.len())]);
        } else {
            return;
        }
        if let Some(new_cert) = tracker.eval(&cand) {
            let delta =
                crate::num::rat_to_f64(&new_cert.ratio) - crate::num::rat_to_f64(&cert.ratio);
            if delta <= 0.0 || rng.gen_bool((-delta / temp.max(1e-9)).exp().clamp(0.0, 1.0)) {
                current = cand;
                cert = new_cert;
            }
        }
        temp *= 0.995;
    }
}

fn exhaustive(
    w: &SpaceWindow,
    q: &FolnerQuery,
    region: &PointSet,
    tracker: &mut Tracker,
) -> Result<Option<NonExistenceCertificate>, FolnerError> {
    if region.len() > EXHAUSTIVE_GATE {
        return Err(FolnerError::WindowTooLargeForExhaustive(region.len()));
    }
    let ids: Vec<u32> = region.iter().collect();
    let total: u64 = (1u64 << ids.len()) - 1;
    let mut complete = true;
    for mask in 1..=total {
        if tracker.out_of_budget() {
            complete = false;
            break;
        }
        let f: PointSet = ids
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &x)| x)
            .collect();
        tracker.eval(&f);
    }
    let failed = tracker.best.as_ref().is_none_or(|b| !b.is_folner(&q.eps));
    Ok((complete && failed).then(|| NonExistenceCertificate {
        r: q.r,
        eps: q.eps.clone(),
        mode: q.mode,
        region: region.clone(),
        subsets_examined: total,
        window_hash: w.window_hash().to_string(),
    }))
}

/// Isoperimetric profile: best ratio found per target cardinality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoperimetricProfile {
    pub r: u32,
    pub entries: Vec<ProfileEntry>,
    pub search_budget: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub target: usize,
    pub certificate: Option<FolnerCertificate>,
}

impl IsoperimetricProfile {
    /// CSV with columns `N,ratio_num,ratio_den,budget`; targets with no
    /// candidate of sufficient size are omitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,ratio_num,ratio_den,budget\n");
        for e in &self.entries {
            if let Some(c) = &e.certificate {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    e.target,
                    c.ratio.numer(),
                    c.ratio.denom(),
                    self.search_budget
                ));
            }
        }
        out
    }
}

/// Profiles best ratios for each size target over a shared candidate stream.
pub fn profile(
    w: &SpaceWindow,
    r: u32,
    mode: BoundaryMode,
    size_targets: &[usize],
    budget: u64,
    seed: u64,
) -> Result<IsoperimetricProfile, FolnerError> {
    if size_targets.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    let region = allowed_region(w, r, mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = center_sample(&region, 24, &mut rng);
    let mut candidates: Vec<FolnerCertificate> = Vec::new();
    let mut examined = 0u64;
    let mut prev: Vec<Option<PointSet>> = vec![None; centers.len()];
    let mut radius = 0u32;
    'sweep: loop {
        let mut grew = false;
        for (i, &c) in centers.iter().enumerate() {
            if examined >= budget {
                break 'sweep;
            }
            let Ok(ball) = w.ball(c, radius) else {
                continue;
            };
            let cand = ball.intersection(&region);
            if cand.is_empty() || prev[i].as_ref() == Some(&cand) {
                continue;
            }
            grew = true;
            prev[i] = Some(cand.clone());
            examined += 1;
            if let Ok(cert) = FolnerCertificate::compute(w, cand, r, mode) {
                candidates.push(cert);
            }
        }
        if !grew {
            break;
        }
        radius += 1;
    }
    let entries = size_targets
        .iter()
        .map(|&target| {
            let best = candidates
                .iter()
                .filter(|c| c.size >= target)
                .min_by(|a, b| a.ratio.cmp(&b.ratio).then_with(|| a.f.lex_cmp(&b.f)))
                .cloned();
            ProfileEntry {
                target,
                certificate: best,
            }
        })
        .collect();
    Ok(IsoperimetricProfile {
        r,
        entries,
        search_budget: examined,
    })
}
