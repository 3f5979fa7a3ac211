//! Partial translations and the windowed doubling dichotomy.
//!
//! A partial translation is an injective map between subsets of one window
//! whose displacement `sup d(x, t(x))` is finite. This module provides the
//! composition algebra, doubling certificates found by max-flow (with exact
//! Hall deficiency witnesses in the negative case), the windowed Tarski
//! dichotomy driver, greedy three-coloring of fixed-point-free translations,
//! and approximate invariant-mean defects.

use crate::flow::FlowNetwork;
use crate::folner::{search_folner, FolnerError, FolnerQuery, SearchOutcome};
use crate::num::{rat_of_counts, Rat};
use crate::pointset::PointSet;
use crate::space::{SpaceError, SpaceWindow};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TranslationError {
    #[error("operands live on different windows")]
    WindowMismatch,
    #[error("map is not injective (target {0} repeated)")]
    NotInjective(u32),
    #[error("domain point {0} repeated")]
    DomainRepeated(u32),
    #[error("pair ({0}, {1}) crosses coarse components (infinite displacement)")]
    InfiniteDisplacement(u32, u32),
    #[error("translation has fixed points: {0:?}")]
    FixedPointPresent(Vec<u32>),
    #[error("mean reference set is empty")]
    EmptySet,
    #[error("set is not contained in dom(t)")]
    NotInDomain,
    #[error("invalid doubling certificate: {0}")]
    InvalidCertificate(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Folner(#[from] FolnerError),
}

/// A finitely supported bijection between two subsets of a window, with
/// finite displacement.
#[derive(Clone)]
pub struct PartialTranslation {
    window: Arc<SpaceWindow>,
    /// Sorted by domain point; both projections are duplicate-free.
    pairs: Vec<(u32, u32)>,
    displacement: u32,
}

impl std::fmt::Debug for PartialTranslation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartialTranslation")
            .field("pairs", &self.pairs.len())
            .field("displacement", &self.displacement)
            .finish()
    }
}

impl PartialTranslation {
    pub fn new(
        window: Arc<SpaceWindow>,
        mut pairs: Vec<(u32, u32)>,
    ) -> Result<Self, TranslationError> {
        pairs.sort_unstable();
        let mut displacement = 0u32;
        for win in pairs.windows(2) {
            if win[0].0 == win[1].0 {
                return Err(TranslationError::DomainRepeated(win[0].0));
            }
        }
        let mut targets: Vec<u32> = pairs.iter().map(|&(_, y)| y).collect();
        targets.sort_unstable();
        for win in targets.windows(2) {
            if win[0] == win[1] {
                return Err(TranslationError::NotInjective(win[0]));
            }
        }
        for &(x, y) in &pairs {
            if !window.contains(x) {
                return Err(SpaceError::PointOutOfWindow(x).into());
            }
            if !window.contains(y) {
                return Err(SpaceError::PointOutOfWindow(y).into());
            }
            match window.dist(x, y).value() {
                Some(d) => displacement = displacement.max(d),
                None => return Err(TranslationError::InfiniteDisplacement(x, y)),
            }
        }
        Ok(PartialTranslation {
            window,
            pairs,
            displacement,
        })
    }

    pub fn empty(window: Arc<SpaceWindow>) -> Self {
        PartialTranslation {
            window,
            pairs: Vec::new(),
            displacement: 0,
        }
    }

    pub fn identity_on(window: Arc<SpaceWindow>, set: &PointSet) -> Self {
        PartialTranslation {
            window,
            pairs: set.iter().map(|x| (x, x)).collect(),
            displacement: 0,
        }
    }

    pub fn window(&self) -> &Arc<SpaceWindow> {
        &self.window
    }

    pub fn same_window(&self, other: &PartialTranslation) -> bool {
        self.window.window_hash() == other.window.window_hash()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `sup_x d(x, t(x))`; 0 for the empty translation.
    pub fn displacement(&self) -> u32 {
        self.displacement
    }

    pub fn dom(&self) -> PointSet {
        self.pairs.iter().map(|&(x, _)| x).collect()
    }

    pub fn ran(&self) -> PointSet {
        self.pairs.iter().map(|&(_, y)| y).collect()
    }

    pub fn apply(&self, x: u32) -> Option<u32> {
        self.pairs
            .binary_search_by_key(&x, |&(d, _)| d)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn preimage(&self, y: u32) -> Option<u32> {
        self.pairs.iter().find(|&&(_, t)| t == y).map(|&(x, _)| x)
    }

    /// Pointwise image of a set.
    pub fn image_of(&self, set: &PointSet) -> PointSet {
        set.iter().filter_map(|x| self.apply(x)).collect()
    }

    /// `self` after `other`: x -> self(other(x)), on the composable part.
    pub fn compose(&self, other: &PartialTranslation) -> Result<Self, TranslationError> {
        if !self.same_window(other) {
            return Err(TranslationError::WindowMismatch);
        }
        let pairs = other
            .pairs
            .iter()
            .filter_map(|&(x, mid)| self.apply(mid).map(|y| (x, y)))
            .collect();
        // Composition of injective maps is injective; displacement is
        // recomputed (it can only undershoot the sum of the two bounds).
        PartialTranslation::new(self.window.clone(), pairs)
    }

    pub fn invert(&self) -> Self {
        let mut pairs: Vec<(u32, u32)> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        pairs.sort_unstable();
        PartialTranslation {
            window: self.window.clone(),
            pairs,
            displacement: self.displacement,
        }
    }

    pub fn restrict(&self, dom: &PointSet) -> Self {
        PartialTranslation {
            window: self.window.clone(),
            pairs: self
                .pairs
                .iter()
                .copied()
                .filter(|&(x, _)| dom.contains(x))
                .collect(),
            displacement: self
                .pairs
                .iter()
                .filter(|&&(x, _)| dom.contains(x))
                .map(|&(x, y)| self.window.dist(x, y).value().unwrap_or(0))
                .max()
                .unwrap_or(0),
        }
    }

    pub fn fixed_points(&self) -> Vec<u32> {
        self.pairs
            .iter()
            .filter(|&&(x, y)| x == y)
            .map(|&(x, _)| x)
            .collect()
    }

    /// CSV pair list `x,tx`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,tx\n");
        for &(x, y) in &self.pairs {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}

/// Certificate that a carrier set can be mapped two-to-one into its
/// R-neighborhood by two injections with disjoint ranges.
///
/// `universe` is the stated carrier of the partition: `x_plus` and `x_minus`
/// partition it, and the two translations map `dom` onto the respective halves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingCertificate {
    pub window_hash: String,
    pub dom: PointSet,
    pub universe: PointSet,
    pub x_plus: PointSet,
    pub x_minus: PointSet,
    pub t_plus: Vec<(u32, u32)>,
    pub t_minus: Vec<(u32, u32)>,
    pub displacement_bound: u32,
}

impl DoublingCertificate {
    /// Reconstructs the two partial translations over `w`, validating them.
    pub fn translations(
        &self,
        w: &Arc<SpaceWindow>,
    ) -> Result<(PartialTranslation, PartialTranslation), TranslationError> {
        let tp = PartialTranslation::new(w.clone(), self.t_plus.clone())?;
        let tm = PartialTranslation::new(w.clone(), self.t_minus.clone())?;
        Ok((tp, tm))
    }

    /// Full pair-by-pair re-verification against a window.
    pub fn verify(&self, w: &Arc<SpaceWindow>) -> Result<(), TranslationError> {
        let bad = |m: &str| TranslationError::InvalidCertificate(m.to_string());
        if w.window_hash() != self.window_hash {
            return Err(bad("window hash mismatch"));
        }
        let (tp, tm) = self.translations(w)?;
        if tp.displacement() > self.displacement_bound
            || tm.displacement() > self.displacement_bound
        {
            return Err(bad("displacement exceeds stated bound"));
        }
        if tp.dom() != self.dom || tm.dom() != self.dom {
            return Err(bad("domains differ from stated carrier"));
        }
        if tp.ran() != self.x_plus || tm.ran() != self.x_minus {
            return Err(bad("ranges differ from stated halves"));
        }
        if !self.x_plus.is_disjoint_from(&self.x_minus) {
            return Err(bad("halves overlap"));
        }
        if self.x_plus.union(&self.x_minus) != self.universe {
            return Err(bad("halves do not partition the universe"));
        }
        let collar = w.neighborhood(&self.dom, self.displacement_bound)?;
        if !self.universe.is_subset_of(&collar) {
            return Err(bad("universe leaves the carrier collar"));
        }
        Ok(())
    }
}

/// Exact witness that doubling is impossible at the given radius:
/// a subset `s` of the carrier with `|N_R(s)| < 2|s|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyWitness {
    pub r: u32,
    pub s: PointSet,
    pub neighborhood_size: usize,
    pub max_flow: u64,
    pub needed: u64,
}

impl DeficiencyWitness {
    pub fn verify(&self, w: &SpaceWindow) -> Result<(), TranslationError> {
        let n = w.neighborhood(&self.s, self.r)?;
        if n.len() != self.neighborhood_size {
            return Err(TranslationError::InvalidCertificate(
                "neighborhood size mismatch".into(),
            ));
        }
        if n.len() >= 2 * self.s.len() {
            return Err(TranslationError::InvalidCertificate(
                "claimed violator satisfies Hall".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum DoublingOutcome {
    Present(DoublingCertificate),
    Absent(DeficiencyWitness),
}

/// Searches for a doubling of `carrier` into its R-collar by max-flow.
///
/// The network routes two units from every carrier point to distinct targets
/// at distance <= r; value `2|carrier|` yields the two injections, anything
/// less yields the residual-cut Hall violator.
pub fn doubling_search(
    w: &Arc<SpaceWindow>,
    carrier: &PointSet,
    r: u32,
) -> Result<DoublingOutcome, TranslationError> {
    w.check_set(carrier)?;
    if carrier.is_empty() {
        return Err(TranslationError::EmptySet);
    }
    let targets = w.neighborhood(carrier, r)?;
    let carrier_ids: Vec<u32> = carrier.iter().collect();
    let target_ids: Vec<u32> = targets.iter().collect();
    let nc = carrier_ids.len();
    let nt = target_ids.len();
    let source = 0u32;
    let sink = (1 + nc + nt) as u32;
    let mut net = FlowNetwork::new(nc + nt + 2);
    let mut source_edges = Vec::with_capacity(nc);
    let mut middle_edges: Vec<(u32, u32, u32)> = Vec::new(); // (edge, carrier, target)
    for (i, &x) in carrier_ids.iter().enumerate() {
        source_edges.push(net.add_edge(source, (1 + i) as u32, 2));
        let reach = w.ball(x, r)?;
        for y in reach.iter() {
            // Targets are exactly N_r(carrier), so every reachable y has an index.
            let j = target_ids.binary_search(&y).expect("target indexed");
            // Capacity 3 keeps middle edges strictly out of every min cut.
            let e = net.add_edge((1 + i) as u32, (1 + nc + j) as u32, 3);
            middle_edges.push((e, x, y));
        }
    }
    for j in 0..nt {
        net.add_edge((1 + nc + j) as u32, sink, 1);
    }
    let needed = 2 * nc as u64;
    let flow = net.max_flow(source, sink);
    if flow == needed {
        let mut per_carrier: Vec<Vec<u32>> = vec![Vec::new(); nc];
        for &(e, x, y) in &middle_edges {
            if net.flow_on(e) > 0 {
                let i = carrier_ids.binary_search(&x).expect("carrier indexed");
                per_carrier[i].push(y);
            }
        }
        let mut t_plus = Vec::with_capacity(nc);
        let mut t_minus = Vec::with_capacity(nc);
        for (i, mut ys) in per_carrier.into_iter().enumerate() {
            ys.sort_unstable();
            assert_eq!(ys.len(), 2, "saturated carrier point has two targets");
            t_plus.push((carrier_ids[i], ys[0]));
            t_minus.push((carrier_ids[i], ys[1]));
        }
        let tp = PartialTranslation::new(w.clone(), t_plus)?;
        let tm = PartialTranslation::new(w.clone(), t_minus)?;
        let cert = DoublingCertificate {
            window_hash: w.window_hash().to_string(),
            dom: carrier.clone(),
            universe: tp.ran().union(&tm.ran()),
            x_plus: tp.ran(),
            x_minus: tm.ran(),
            t_plus: tp.pairs().to_vec(),
            t_minus: tm.pairs().to_vec(),
            displacement_bound: r,
        };
        cert.verify(w)?;
        Ok(DoublingOutcome::Present(cert))
    } else {
        let reach = net.residual_reachable(source);
        let s: PointSet = carrier_ids
            .iter()
            .enumerate()
            .filter(|(i, _)| reach[1 + i])
            .map(|(_, &x)| x)
            .collect();
        let witness = DeficiencyWitness {
            r,
            neighborhood_size: w.neighborhood(&s, r)?.len(),
            s,
            max_flow: flow,
            needed,
        };
        witness.verify(w)?;
        Ok(DoublingOutcome::Absent(witness))
    }
}

/// Which arm of the dichotomy to try first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TarskiPolicy {
    #[default]
    FolnerFirst,
    DoublingFirst,
    Both,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TarskiReport {
    pub folner: Option<SearchOutcome>,
    pub doubling: Option<DoublingOutcome>,
}

/// Windowed Tarski dichotomy: run the Folner arm and the doubling arm under
/// the given policy. This is a diagnostic, not a proof about the ambient space.
pub fn windowed_tarski(
    w: &Arc<SpaceWindow>,
    carrier: &PointSet,
    query: &FolnerQuery,
    policy: TarskiPolicy,
) -> Result<TarskiReport, TranslationError> {
    let run_folner = |report: &mut TarskiReport| -> Result<bool, TranslationError> {
        let out = search_folner(w, query)?;
        let hit = out.certificate.is_some();
        report.folner = Some(out);
        Ok(hit)
    };
    let run_doubling = |report: &mut TarskiReport| -> Result<bool, TranslationError> {
        let out = doubling_search(w, carrier, query.r)?;
        let hit = matches!(out, DoublingOutcome::Present(_));
        report.doubling = Some(out);
        Ok(hit)
    };
    let mut report = TarskiReport {
        folner: None,
        doubling: None,
    };
    match policy {
        TarskiPolicy::FolnerFirst => {
            if !run_folner(&mut report)? {
                run_doubling(&mut report)?;
            }
        }
        TarskiPolicy::DoublingFirst => {
            if !run_doubling(&mut report)? {
                run_folner(&mut report)?;
            }
        }
        TarskiPolicy::Both => {
            run_folner(&mut report)?;
            run_doubling(&mut report)?;
        }
    }
    Ok(report)
}

/// Decomposition of a fixed-point-free partial translation into three parts,
/// each with disjoint domain and range.
#[derive(Clone, Debug)]
pub struct ColoringDecomposition {
    pub parts: [PartialTranslation; 3],
}

impl ColoringDecomposition {
    pub fn check(&self) -> bool {
        self.parts
            .iter()
            .all(|p| p.dom().is_disjoint_from(&p.ran()))
    }
}

/// Greedy 3-coloring of the functional graph of `t` (max in/out degree one),
/// ordered by decreasing degree then point id.
pub fn three_color_decompose(
    t: &PartialTranslation,
) -> Result<ColoringDecomposition, TranslationError> {
    let fixed = t.fixed_points();
    if !fixed.is_empty() {
        return Err(TranslationError::FixedPointPresent(fixed));
    }
    let dom = t.dom();
    // Conflict neighbors of a domain point x: t(x) and t^{-1}(x), kept only
    // when they are themselves domain points (others never join a part).
    let neighbors = |x: u32| -> Vec<u32> {
        let mut out = Vec::with_capacity(2);
        if let Some(y) = t.apply(x) {
            if dom.contains(y) {
                out.push(y);
            }
        }
        if let Some(p) = t.preimage(x) {
            out.push(p); // preimages are domain points by construction
        }
        out
    };
    let mut order: Vec<u32> = dom.iter().collect();
    order.sort_by_key(|&x| (std::cmp::Reverse(neighbors(x).len()), x));
    let mut color: std::collections::HashMap<u32, u8> = std::collections::HashMap::new();
    for &x in &order {
        let used: Vec<u8> = neighbors(x)
            .into_iter()
            .filter_map(|y| color.get(&y).copied())
            .collect();
        let c = (0u8..3)
            .find(|c| !used.contains(c))
            .expect("degree <= 2 graphs are 3-colorable greedily");
        color.insert(x, c);
    }
    let part = |c: u8| -> PointSet {
        color
            .iter()
            .filter(|&(_, &pc)| pc == c)
            .map(|(&x, _)| x)
            .collect()
    };
    let decomposition = ColoringDecomposition {
        parts: [
            t.restrict(&part(0)),
            t.restrict(&part(1)),
            t.restrict(&part(2)),
        ],
    };
    debug_assert!(decomposition.check());
    Ok(decomposition)
}

/// `|mu_F(t(A)) - mu_F(A)|` where `mu_F(S) = |S cap F| / |F|`.
pub fn mean_defect(
    f: &PointSet,
    t: &PartialTranslation,
    a: &PointSet,
) -> Result<Rat, TranslationError> {
    if f.is_empty() {
        return Err(TranslationError::EmptySet);
    }
    if !a.is_subset_of(&t.dom()) {
        return Err(TranslationError::NotInDomain);
    }
    let ta = t.image_of(a);
    let before = rat_of_counts(a.intersection(f).len(), f.len());
    let after = rat_of_counts(ta.intersection(f).len(), f.len());
    Ok((after - before).abs())
}
