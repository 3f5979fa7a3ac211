//! Finite windows of bounded-geometry extended metric spaces.
//!
//! A [`SpaceWindow`] is a finite piece of a (possibly infinite) space: a point
//! set with an integer extended metric (`u32::MAX` encodes infinite distance),
//! coarse connected components, and memoized ball-size bounds. Windows of the
//! built-in infinite models (integer grids, free group balls) additionally
//! know which of their points are *interior* at a given radius, so boundary
//! statistics can be computed either relative to the window or exactly with
//! respect to the ambient space.
//!
//! Metrics are integer-valued graph metrics with uniform discreteness
//! constant 1; this keeps all boundary counts and ratios exact.

use crate::num::sha256_hex;
use crate::pointset::PointSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::sync::RwLock;
use thiserror::Error;

/// Default cap on window point counts; override via [`build_window_with_cap`].
pub const DEFAULT_POINT_CAP: usize = 2_000_000;

/// Explicit distance tables get the full O(n^3) triangle check up to this size,
/// and a deterministic sample of triples above it.
const FULL_VALIDATION_CAP: usize = 256;

/// Sentinel for infinite distance.
const INF: u32 = u32::MAX;

/// A window point: contiguous id plus a human-readable label (a lattice
/// coordinate, a reduced word, a quotient element).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    pub id: u32,
    pub label: String,
}

/// Extended distance: a finite nonnegative integer or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtDist(u32);

impl ExtDist {
    pub const INFINITY: ExtDist = ExtDist(INF);
    pub const ZERO: ExtDist = ExtDist(0);

    pub fn finite(d: u32) -> ExtDist {
        assert!(d != INF, "finite distance overflow");
        ExtDist(d)
    }

    pub fn is_finite(self) -> bool {
        self.0 != INF
    }

    /// Finite value, if any.
    pub fn value(self) -> Option<u32> {
        self.is_finite().then_some(self.0)
    }

    /// `self <= r` for a finite radius `r`.
    pub fn within(self, r: u32) -> bool {
        self.0 <= r
    }
}

/// Addition with infinity absorbing.
impl std::ops::Add for ExtDist {
    type Output = ExtDist;

    fn add(self, other: ExtDist) -> ExtDist {
        if self.is_finite() && other.is_finite() {
            ExtDist(self.0.checked_add(other.0).expect("distance overflow"))
        } else {
            ExtDist::INFINITY
        }
    }
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("recipe would produce {points} points, exceeding the cap of {cap}")]
    RecipeTooLarge { points: usize, cap: usize },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("point {0} is not in the window")]
    PointOutOfWindow(u32),
    #[error("set is not contained in the window")]
    SetOutOfWindow,
    #[error("ambient boundary unavailable: {reason}")]
    AmbientUnavailable { reason: String },
}

/// How boundaries treat the window edge.
///
/// `WindowRelative` takes complements inside the window, as if the window were
/// the whole space. `Ambient` computes the boundary of the set in the infinite
/// ambient model; it is only available when every point of the set is interior
/// at the queried radius, which makes the two modes agree point-for-point on
/// the computed region while ruling out silent truncation bias.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    WindowRelative,
    Ambient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    TwoSided,
    Outer,
    Inner,
}

/// Deterministic recipe for a window. Building the same descriptor twice
/// yields identical windows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpaceDescriptor {
    /// Box `[0,s_1) x ... x [0,s_d)` in the integer lattice with the path metric.
    Grid { sides: Vec<u32> },
    /// Ball of the given radius around the identity in the free group of the
    /// given rank, with the word metric.
    FreeGroupBall { rank: u32, radius: u32 },
    /// Cycle graph on `n` vertices.
    CyclicQuotient { n: u32 },
    /// Disjoint union of component recipes at pairwise infinite distance,
    /// carrying the intended (strictly increasing) finite separation schedule.
    /// At any fixed radius the infinite-separation model agrees with every
    /// sufficiently separated finite model, so distances are stored as infinity.
    BoxSpace {
        components: Vec<SpaceDescriptor>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        separation: Vec<u64>,
    },
    /// Disjoint union at infinite separation, without a schedule.
    DisjointUnion { parts: Vec<SpaceDescriptor> },
    /// Explicit symmetric distance table; `null` entries mean infinity.
    Explicit { dist: Vec<Vec<Option<u32>>> },
}

impl SpaceDescriptor {
    pub fn grid1d(len: u32) -> Self {
        SpaceDescriptor::Grid { sides: vec![len] }
    }

    pub fn grid2d(w: u32, h: u32) -> Self {
        SpaceDescriptor::Grid { sides: vec![w, h] }
    }

    /// Canonical JSON used for window hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }
}

/// Ambient model a window truncates, when there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmbientKind {
    /// The window is the whole space; window-relative boundaries are exact.
    Complete,
    /// Box window of the infinite integer lattice.
    GridBox { sides: Vec<u32> },
    /// Ball window of the free group of the given rank.
    FreeBall { rank: u32, radius: u32 },
}

/// How an explicit metric table was validated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricValidation {
    /// Generated metric, exact by construction.
    Generated,
    /// Full O(n^3) triangle inequality check.
    Full,
    /// Deterministic sample of triples.
    Sampled { triples: usize },
}

enum MetricRep {
    Table {
        n: usize,
        entries: Vec<u32>,
    },
    GridBox {
        sides: Vec<u32>,
    },
    Cycle {
        n: u32,
    },
    /// Reduced words, letter codes `2k`/`2k+1` for generator k and its inverse.
    FreeWords {
        words: Vec<Vec<u8>>,
    },
    Blocks {
        offsets: Vec<u32>,
        parts: Vec<MetricRep>,
    },
}

impl MetricRep {
    fn dist(&self, x: u32, y: u32) -> ExtDist {
        match self {
            MetricRep::Table { n, entries } => ExtDist(entries[x as usize * *n + y as usize]),
            MetricRep::GridBox { sides } => {
                let mut d = 0u32;
                let (mut xi, mut yi) = (x, y);
                for &s in sides.iter().rev() {
                    let (cx, cy) = (xi % s, yi % s);
                    d += cx.abs_diff(cy);
                    xi /= s;
                    yi /= s;
                }
                ExtDist(d)
            }
            MetricRep::Cycle { n } => {
                let d = x.abs_diff(y);
                ExtDist(d.min(n - d))
            }
            MetricRep::FreeWords { words } => {
                let (u, v) = (&words[x as usize], &words[y as usize]);
                let lcp = u.iter().zip(v.iter()).take_while(|(a, b)| a == b).count();
                ExtDist((u.len() + v.len() - 2 * lcp) as u32)
            }
            MetricRep::Blocks { offsets, parts } => {
                let bx = block_of(offsets, x);
                let by = block_of(offsets, y);
                if bx != by {
                    ExtDist::INFINITY
                } else {
                    parts[bx].dist(x - offsets[bx], y - offsets[by])
                }
            }
        }
    }
}

fn block_of(offsets: &[u32], x: u32) -> usize {
    match offsets.binary_search(&x) {
        Ok(i) => i,
        Err(i) => i - 1,
    }
}

thread_local! {
    /// BFS distance scratch, reset per call by touched entries only.
    static BFS_SCRATCH: std::cell::RefCell<Vec<u32>> =
        const { std::cell::RefCell::new(Vec::new()) };
}

/// A finite window of a bounded-geometry extended metric space.
///
/// Immutable after construction except for the memoized geometry-bound cache,
/// which is lock-protected; all queries are pure and safe to run in parallel.
pub struct SpaceWindow {
    descriptor: SpaceDescriptor,
    labels: Vec<String>,
    metric: MetricRep,
    /// Unit-distance adjacency, present when the metric is the geodesic metric
    /// of this graph restricted to the window (all generated models).
    adj: Option<Vec<Vec<u32>>>,
    components: Vec<PointSet>,
    component_of: Vec<u32>,
    ambient: AmbientKind,
    validation: MetricValidation,
    hash: String,
    geometry_bound: RwLock<BTreeMap<u32, usize>>,
}

impl std::fmt::Debug for SpaceWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpaceWindow")
            .field("descriptor", &self.descriptor)
            .field("points", &self.len())
            .field("components", &self.components.len())
            .finish()
    }
}

/// Builds the window described by `desc` under the default point cap.
pub fn build_window(desc: &SpaceDescriptor) -> Result<SpaceWindow, SpaceError> {
    build_window_with_cap(desc, DEFAULT_POINT_CAP)
}

/// Builds the window described by `desc`, failing if it would exceed `cap` points.
pub fn build_window_with_cap(
    desc: &SpaceDescriptor,
    cap: usize,
) -> Result<SpaceWindow, SpaceError> {
    let points = descriptor_point_count(desc)?;
    if points > cap {
        return Err(SpaceError::RecipeTooLarge { points, cap });
    }
    if points == 0 {
        return Err(SpaceError::InvalidRecipe("window would be empty".into()));
    }
    let hash = sha256_hex(desc.canonical_json().as_bytes());
    let (labels, metric, adj, ambient, validation) = build_parts(desc)?;
    let (components, component_of) = compute_components(&metric, adj.as_deref(), labels.len());
    Ok(SpaceWindow {
        descriptor: desc.clone(),
        labels,
        metric,
        adj,
        components,
        component_of,
        ambient,
        validation,
        hash,
        geometry_bound: RwLock::new(BTreeMap::new()),
    })
}

fn descriptor_point_count(desc: &SpaceDescriptor) -> Result<usize, SpaceError> {
    match desc {
        SpaceDescriptor::Grid { sides } => {
            if sides.is_empty() || sides.contains(&0) {
                return Err(SpaceError::InvalidRecipe(
                    "grid sides must be positive".into(),
                ));
            }
            sides
                .iter()
                .try_fold(1usize, |acc, &s| acc.checked_mul(s as usize))
                .ok_or(SpaceError::RecipeTooLarge {
                    points: usize::MAX,
                    cap: 0,
                })
        }
        SpaceDescriptor::FreeGroupBall { rank, radius } => {
            if *rank == 0 || *rank > 9 {
                return Err(SpaceError::InvalidRecipe(
                    "free group rank must be in 1..=9".into(),
                ));
            }
            // |B_r| = 1 + 2k * ((2k-1)^r - 1) / (2k - 2) for rank k >= 2.
            let k = *rank as u128;
            let mut count: u128 = 1;
            let mut sphere: u128 = 2 * k;
            for _ in 0..*radius {
                count += sphere;
                if count > usize::MAX as u128 {
                    return Err(SpaceError::RecipeTooLarge {
                        points: usize::MAX,
                        cap: 0,
                    });
                }
                sphere *= 2 * k - 1;
            }
            Ok(count as usize)
        }
        SpaceDescriptor::CyclicQuotient { n } => {
            if *n == 0 {
                return Err(SpaceError::InvalidRecipe(
                    "cycle length must be positive".into(),
                ));
            }
            Ok(*n as usize)
        }
        SpaceDescriptor::BoxSpace {
            components,
            separation,
        } => {
            if components.is_empty() {
                return Err(SpaceError::InvalidRecipe(
                    "box space needs components".into(),
                ));
            }
            if separation.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SpaceError::InvalidRecipe(
                    "separation schedule must be strictly increasing".into(),
                ));
            }
            components.iter().map(descriptor_point_count).sum()
        }
        SpaceDescriptor::DisjointUnion { parts } => {
            if parts.is_empty() {
                return Err(SpaceError::InvalidRecipe("union needs parts".into()));
            }
            parts.iter().map(descriptor_point_count).sum()
        }
        SpaceDescriptor::Explicit { dist } => {
            if dist.is_empty() {
                return Err(SpaceError::InvalidRecipe("empty distance table".into()));
            }
            Ok(dist.len())
        }
    }
}

type Parts = (
    Vec<String>,
    MetricRep,
    Option<Vec<Vec<u32>>>,
    AmbientKind,
    MetricValidation,
);

fn build_parts(desc: &SpaceDescriptor) -> Result<Parts, SpaceError> {
    match desc {
        SpaceDescriptor::Grid { sides } => Ok(build_grid(sides)),
        SpaceDescriptor::FreeGroupBall { rank, radius } => Ok(build_free_ball(*rank, *radius)),
        SpaceDescriptor::CyclicQuotient { n } => Ok(build_cycle(*n)),
        SpaceDescriptor::BoxSpace { components, .. } => build_union(components),
        SpaceDescriptor::DisjointUnion { parts } => build_union(parts),
        SpaceDescriptor::Explicit { dist } => build_explicit(dist),
    }
}

fn grid_coords(id: u32, sides: &[u32]) -> Vec<u32> {
    let mut c = vec![0u32; sides.len()];
    let mut x = id;
    for (i, &s) in sides.iter().enumerate().rev() {
        c[i] = x % s;
        x /= s;
    }
    c
}

fn grid_id(coords: &[u32], sides: &[u32]) -> u32 {
    let mut id = 0u32;
    for (c, s) in coords.iter().zip(sides.iter()) {
        id = id * s + c;
    }
    id
}

fn build_grid(sides: &[u32]) -> Parts {
    let n: usize = sides.iter().map(|&s| s as usize).product();
    let mut labels = Vec::with_capacity(n);
    let mut adj = vec![Vec::new(); n];
    for id in 0..n as u32 {
        let coords = grid_coords(id, sides);
        labels.push(format!(
            "({})",
            coords
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        for (axis, &s) in sides.iter().enumerate() {
            let c = coords[axis];
            if c > 0 {
                let mut down = coords.clone();
                down[axis] = c - 1;
                adj[id as usize].push(grid_id(&down, sides));
            }
            if c + 1 < s {
                let mut up = coords.clone();
                up[axis] = c + 1;
                adj[id as usize].push(grid_id(&up, sides));
            }
        }
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }
    (
        labels,
        MetricRep::GridBox {
            sides: sides.to_vec(),
        },
        Some(adj),
        AmbientKind::GridBox {
            sides: sides.to_vec(),
        },
        MetricValidation::Generated,
    )
}

const LETTERS: [[char; 2]; 9] = [
    ['a', 'A'],
    ['b', 'B'],
    ['c', 'C'],
    ['d', 'D'],
    ['e', 'E'],
    ['f', 'F'],
    ['g', 'G'],
    ['h', 'H'],
    ['i', 'I'],
];

pub(crate) fn word_label(word: &[u8]) -> String {
    if word.is_empty() {
        return "e".to_string();
    }
    word.iter()
        .map(|&l| LETTERS[(l / 2) as usize][(l % 2) as usize])
        .collect()
}

/// Enumerates reduced words of length <= radius, length-major then
/// lexicographic by letter code. The identity gets id 0.
pub(crate) fn enumerate_reduced_words(rank: u32, radius: u32) -> Vec<Vec<u8>> {
    let letters: Vec<u8> = (0..2 * rank as u8).collect();
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    let mut level: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..radius {
        let mut next = Vec::with_capacity(level.len() * (2 * rank as usize - 1) + 2);
        for w in &level {
            for &l in &letters {
                // Skip the inverse of the final letter: codes 2k and 2k+1 pair up.
                if let Some(&last) = w.last() {
                    if last ^ 1 == l {
                        continue;
                    }
                }
                let mut ext = w.clone();
                ext.push(l);
                next.push(ext);
            }
        }
        words.extend(next.iter().cloned());
        level = next;
    }
    words
}

fn build_free_ball(rank: u32, radius: u32) -> Parts {
    let words = enumerate_reduced_words(rank, radius);
    let labels: Vec<String> = words.iter().map(|w| word_label(w)).collect();
    let index: std::collections::HashMap<&[u8], u32> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_slice(), i as u32))
        .collect();
    let mut adj = vec![Vec::new(); words.len()];
    for (i, w) in words.iter().enumerate() {
        if let Some((_, parent)) = w.split_last() {
            adj[i].push(index[parent]);
        }
        if (w.len() as u32) < radius {
            for l in 0..2 * rank as u8 {
                if w.last().is_some_and(|&last| last ^ 1 == l) {
                    continue;
                }
                let mut ext = w.clone();
                ext.push(l);
                adj[i].push(index[ext.as_slice()]);
            }
        }
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }
    (
        labels,
        MetricRep::FreeWords { words },
        Some(adj),
        AmbientKind::FreeBall { rank, radius },
        MetricValidation::Generated,
    )
}

fn build_cycle(n: u32) -> Parts {
    let labels = (0..n).map(|i| i.to_string()).collect();
    let adj = if n == 1 {
        vec![Vec::new()]
    } else if n == 2 {
        vec![vec![1], vec![0]]
    } else {
        (0..n)
            .map(|i| {
                let mut v = vec![(i + n - 1) % n, (i + 1) % n];
                v.sort_unstable();
                v
            })
            .collect()
    };
    (
        labels,
        MetricRep::Cycle { n },
        Some(adj),
        AmbientKind::Complete,
        MetricValidation::Generated,
    )
}

fn build_union(parts_desc: &[SpaceDescriptor]) -> Result<Parts, SpaceError> {
    let mut labels = Vec::new();
    let mut metrics = Vec::new();
    let mut offsets = Vec::new();
    let mut adj_all: Option<Vec<Vec<u32>>> = Some(Vec::new());
    let mut validation = MetricValidation::Generated;
    let mut offset = 0u32;
    for (pi, pd) in parts_desc.iter().enumerate() {
        let (plabels, pmetric, padj, _pambient, pvalidation) = build_parts(pd)?;
        offsets.push(offset);
        let n = plabels.len() as u32;
        for l in plabels {
            labels.push(format!("{pi}:{l}"));
        }
        match (&mut adj_all, padj) {
            (Some(all), Some(padj)) => {
                all.extend(
                    padj.into_iter()
                        .map(|nbrs| nbrs.into_iter().map(|y| y + offset).collect()),
                );
            }
            (all, _) => *all = None,
        }
        if let MetricValidation::Sampled { .. } = pvalidation {
            validation = pvalidation;
        } else if pvalidation == MetricValidation::Full && validation == MetricValidation::Generated
        {
            validation = pvalidation;
        }
        metrics.push(pmetric);
        offset += n;
    }
    // A union is a complete space of its own; parts lose any ambient
    // truncation semantics they would have as standalone windows.
    Ok((
        labels,
        MetricRep::Blocks {
            offsets,
            parts: metrics,
        },
        adj_all,
        AmbientKind::Complete,
        validation,
    ))
}

fn build_explicit(table: &[Vec<Option<u32>>]) -> Result<Parts, SpaceError> {
    let n = table.len();
    if table.iter().any(|row| row.len() != n) {
        return Err(SpaceError::InvalidMetric("table is not square".into()));
    }
    let mut entries = vec![INF; n * n];
    for (i, row) in table.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            let d = d.unwrap_or(INF);
            if d == INF && i == j {
                return Err(SpaceError::InvalidMetric(format!("d({i},{i}) must be 0")));
            }
            entries[i * n + j] = d;
        }
    }
    for i in 0..n {
        if entries[i * n + i] != 0 {
            return Err(SpaceError::InvalidMetric(format!("d({i},{i}) must be 0")));
        }
        for j in 0..n {
            if entries[i * n + j] != entries[j * n + i] {
                return Err(SpaceError::InvalidMetric(format!(
                    "asymmetric at ({i},{j})"
                )));
            }
            if i != j && entries[i * n + j] == 0 {
                return Err(SpaceError::InvalidMetric(format!(
                    "distinct points {i},{j} at distance 0 (uniform discreteness needs d >= 1)"
                )));
            }
        }
    }
    let check = |i: usize, j: usize, k: usize| -> Result<(), SpaceError> {
        let (dij, djk, dik) = (entries[i * n + j], entries[j * n + k], entries[i * n + k]);
        if dij != INF && djk != INF && (dik == INF || (dik as u64) > dij as u64 + djk as u64) {
            return Err(SpaceError::InvalidMetric(format!(
                "triangle inequality fails on ({i},{j},{k})"
            )));
        }
        Ok(())
    };
    let validation = if n <= FULL_VALIDATION_CAP {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    check(i, j, k)?;
                }
            }
        }
        MetricValidation::Full
    } else {
        // Deterministic LCG sample; recorded in the window so callers can see
        // the table was only spot-checked.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        let triples = 20 * n;
        for _ in 0..triples {
            check(next() % n, next() % n, next() % n)?;
        }
        MetricValidation::Sampled { triples }
    };
    let labels = (0..n).map(|i| i.to_string()).collect();
    Ok((
        labels,
        MetricRep::Table { n, entries },
        None,
        AmbientKind::Complete,
        validation,
    ))
}

fn compute_components(
    metric: &MetricRep,
    adj: Option<&[Vec<u32>]>,
    n: usize,
) -> (Vec<PointSet>, Vec<u32>) {
    let mut component_of = vec![u32::MAX; n];
    let mut components = Vec::new();
    for start in 0..n as u32 {
        if component_of[start as usize] != u32::MAX {
            continue;
        }
        let cid = components.len() as u32;
        let mut members = Vec::new();
        match adj {
            Some(adj) => {
                let mut queue = VecDeque::from([start]);
                component_of[start as usize] = cid;
                while let Some(x) = queue.pop_front() {
                    members.push(x);
                    for &y in &adj[x as usize] {
                        if component_of[y as usize] == u32::MAX {
                            component_of[y as usize] = cid;
                            queue.push_back(y);
                        }
                    }
                }
            }
            None => {
                for y in 0..n as u32 {
                    if component_of[y as usize] == u32::MAX && metric.dist(start, y).is_finite() {
                        component_of[y as usize] = cid;
                        members.push(y);
                    }
                }
            }
        }
        components.push(PointSet::from_ids(members));
    }
    (components, component_of)
}

impl SpaceWindow {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn descriptor(&self) -> &SpaceDescriptor {
        &self.descriptor
    }

    /// Content hash of the generating descriptor.
    pub fn window_hash(&self) -> &str {
        &self.hash
    }

    pub fn label(&self, x: u32) -> &str {
        &self.labels[x as usize]
    }

    pub fn point(&self, id: u32) -> Result<Point, SpaceError> {
        if !self.contains(id) {
            return Err(SpaceError::PointOutOfWindow(id));
        }
        Ok(Point {
            id,
            label: self.labels[id as usize].clone(),
        })
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.labels.iter().enumerate().map(|(id, label)| Point {
            id: id as u32,
            label: label.clone(),
        })
    }

    pub fn validation(&self) -> MetricValidation {
        self.validation
    }

    pub fn all_points(&self) -> PointSet {
        PointSet::full(self.len() as u32)
    }

    pub fn contains(&self, x: u32) -> bool {
        (x as usize) < self.len()
    }

    pub fn check_set(&self, s: &PointSet) -> Result<(), SpaceError> {
        match s.as_slice().last() {
            Some(&max) if !self.contains(max) => Err(SpaceError::SetOutOfWindow),
            _ => Ok(()),
        }
    }

    pub fn dist(&self, x: u32, y: u32) -> ExtDist {
        self.metric.dist(x, y)
    }

    pub fn components(&self) -> &[PointSet] {
        &self.components
    }

    pub fn component_of(&self, x: u32) -> u32 {
        self.component_of[x as usize]
    }

    /// Closed ball `{y : d(x,y) <= r}` inside the window.
    pub fn ball(&self, x: u32, r: u32) -> Result<PointSet, SpaceError> {
        if !self.contains(x) {
            return Err(SpaceError::PointOutOfWindow(x));
        }
        Ok(self.neighborhood_unchecked(&PointSet::singleton(x), r))
    }

    /// `N_r(s) = {y : d(y, s) <= r}` inside the window (contains `s`).
    pub fn neighborhood(&self, s: &PointSet, r: u32) -> Result<PointSet, SpaceError> {
        self.check_set(s)?;
        Ok(self.neighborhood_unchecked(s, r))
    }

    fn neighborhood_unchecked(&self, s: &PointSet, r: u32) -> PointSet {
        match &self.adj {
            Some(adj) => BFS_SCRATCH.with(|cell| {
                let mut dist = cell.borrow_mut();
                if dist.len() < self.len() {
                    dist.resize(self.len(), u32::MAX);
                }
                let mut queue = VecDeque::new();
                let mut out = Vec::new();
                for x in s.iter() {
                    dist[x as usize] = 0;
                    queue.push_back(x);
                    out.push(x);
                }
                while let Some(x) = queue.pop_front() {
                    let dx = dist[x as usize];
                    if dx == r {
                        continue;
                    }
                    for &y in &adj[x as usize] {
                        if dist[y as usize] == u32::MAX {
                            dist[y as usize] = dx + 1;
                            out.push(y);
                            queue.push_back(y);
                        }
                    }
                }
                // Reset only the touched entries so the scratch stays clean.
                for &x in &out {
                    dist[x as usize] = u32::MAX;
                }
                PointSet::from_ids(out)
            }),
            None => {
                let mut out = Vec::new();
                for y in 0..self.len() as u32 {
                    if s.iter().any(|x| self.dist(x, y).within(r)) {
                        out.push(y);
                    }
                }
                PointSet::from_ids(out)
            }
        }
    }

    /// True when the ambient ball `B_r(x)` is entirely inside the window.
    /// Complete windows are their own ambient space, so every point qualifies.
    pub fn is_interior(&self, x: u32, r: u32) -> bool {
        match &self.ambient {
            AmbientKind::Complete => true,
            AmbientKind::GridBox { sides } => {
                let coords = grid_coords(x, sides);
                coords
                    .iter()
                    .zip(sides.iter())
                    .all(|(&c, &s)| c >= r && c + r < s)
            }
            AmbientKind::FreeBall { radius, .. } => {
                let len = match &self.metric {
                    MetricRep::FreeWords { words } => words[x as usize].len() as u32,
                    _ => unreachable!("free ball windows use word metrics"),
                };
                len + r <= *radius
            }
        }
    }

    /// All points interior at radius `r`.
    pub fn interior_set(&self, r: u32) -> PointSet {
        (0..self.len() as u32)
            .filter(|&x| self.is_interior(x, r))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.ambient == AmbientKind::Complete
    }

    /// R-boundary of `a`.
    ///
    /// Outer: `{x not in a : d(x, a) <= r}`. Inner: `{x in a : d(x, complement) <= r}`.
    /// Two-sided: their disjoint union. In `Ambient` mode the set must lie in
    /// the r-interior of the window, where the window-relative computation is
    /// provably equal to the ambient one.
    pub fn boundary(
        &self,
        a: &PointSet,
        r: u32,
        kind: BoundaryKind,
        mode: BoundaryMode,
    ) -> Result<PointSet, SpaceError> {
        self.check_set(a)?;
        if mode == BoundaryMode::Ambient && !self.is_complete() {
            if let Some(x) = a.iter().find(|&x| !self.is_interior(x, r)) {
                return Err(SpaceError::AmbientUnavailable {
                    reason: format!(
                        "point {x} ({}) is not {r}-interior to the window",
                        self.label(x)
                    ),
                });
            }
        }
        let outer = || -> PointSet { self.neighborhood_unchecked(a, r).difference(a) };
        let inner = || -> PointSet {
            if self.adj.is_some() {
                // On geodesic unit graphs, the nearest complement point to any
                // x in A lies on the 1-shell N_1(A) \ A, so BFS from the shell
                // replaces BFS from the whole complement.
                let shell = self.neighborhood_unchecked(a, 1).difference(a);
                self.neighborhood_unchecked(&shell, r).intersection(a)
            } else {
                let complement = self.all_points().difference(a);
                self.neighborhood_unchecked(&complement, r).intersection(a)
            }
        };
        Ok(match kind {
            BoundaryKind::Outer => outer(),
            BoundaryKind::Inner => inner(),
            BoundaryKind::TwoSided => outer().union(&inner()),
        })
    }

    /// `sup_x |B_r(x)|`, computed exactly on first query and cached.
    pub fn geometry_bound(&self, r: u32) -> usize {
        if let Some(&b) = self.geometry_bound.read().unwrap().get(&r) {
            return b;
        }
        let mut sup = 0usize;
        for x in 0..self.len() as u32 {
            sup = sup.max(
                self.neighborhood_unchecked(&PointSet::singleton(x), r)
                    .len(),
            );
        }
        let mut cache = self.geometry_bound.write().unwrap();
        let entry = cache.entry(r).or_insert(sup);
        *entry
    }

    /// Edge list `x,y,d` for all unordered pairs at finite distance <= cutoff.
    pub fn edge_list_csv(&self, cutoff: u32) -> String {
        let mut out = String::from("x,y,d\n");
        for x in 0..self.len() as u32 {
            let near = self.neighborhood_unchecked(&PointSet::singleton(x), cutoff);
            for y in near.iter().filter(|&y| y > x) {
                if let Some(d) = self.dist(x, y).value() {
                    out.push_str(&format!("{x},{y},{d}\n"));
                }
            }
        }
        out
    }
}
