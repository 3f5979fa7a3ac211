//! Lazily evaluated injective maps on countable symbolic point sets, and
//! isometry-relation verification on finite windows.
//!
//! Two concrete models are built in: affine maps `x -> m*x + a` on the
//! naturals (the binary model `x -> 2x`, `x -> 2x+1` and its n-ary variants),
//! and a doubling pair on reduced words of the rank-2 free group built from
//! suffix operations with displacement at most 1. Relation checks demand
//! *saturated* windows, i.e. windows closed under all generator preimages:
//! composition identities evaluated symbolically then agree with the windowed
//! 0/1 matrix products, so truncation edges cannot produce spurious failures.

use crate::space::{enumerate_reduced_words, word_label};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LeavittError {
    #[error("no generators given")]
    EmptyGenerators,
    #[error("generators act on different symbolic spaces")]
    MixedModels,
    #[error("window is not saturated; offending points: {0:?}")]
    UnsaturatedWindow(Vec<String>),
    #[error("generator ranges overlap at: {0:?}")]
    RangeOverlap(Vec<String>),
    #[error("embedding needs n >= 2, got {0}")]
    EmbeddingTooSmall(usize),
}

/// A point of a countable symbolic set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolicPoint {
    Nat(u64),
    /// Reduced word over letter codes `2k` / `2k+1` (generator k, inverse).
    Word(Vec<u8>),
}

impl SymbolicPoint {
    pub fn label(&self) -> String {
        match self {
            SymbolicPoint::Nat(n) => n.to_string(),
            SymbolicPoint::Word(w) => word_label(w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolicSpace {
    Naturals,
    FreeWordsRank2,
}

/// An injective total map on a symbolic set, with computable partial inverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SymbolicIsometry {
    /// `x -> mul*x + add` on the naturals; injective for `mul >= 1`.
    Affine { mul: u64, add: u64 },
    /// Doubling arm with range `{e} u W^suf_a u W^suf_A` on reduced words:
    /// identity off the a-spine, spine shift `a^k -> a^{k-1}`, and suffix-`A`
    /// extension for words not ending in `a`.
    F2Plus,
    /// Doubling arm with range `W^suf_b u W^suf_B`: identity on words ending
    /// in `b`, suffix-`B` extension otherwise.
    F2Minus,
    /// Word in other isometries, applied right to left.
    Composed(Vec<SymbolicIsometry>),
}

const LA: u8 = 0; // letter a
const LA_INV: u8 = 1;
const LB: u8 = 2;
const LB_INV: u8 = 3;

fn is_all_a(w: &[u8]) -> bool {
    w.iter().all(|&l| l == LA)
}

impl SymbolicIsometry {
    pub fn space(&self) -> SymbolicSpace {
        match self {
            SymbolicIsometry::Affine { .. } => SymbolicSpace::Naturals,
            SymbolicIsometry::F2Plus | SymbolicIsometry::F2Minus => SymbolicSpace::FreeWordsRank2,
            SymbolicIsometry::Composed(fs) => fs
                .first()
                .map(|f| f.space())
                .unwrap_or(SymbolicSpace::Naturals),
        }
    }

    /// Total injective forward map.
    pub fn apply(&self, p: &SymbolicPoint) -> SymbolicPoint {
        match (self, p) {
            (SymbolicIsometry::Affine { mul, add }, SymbolicPoint::Nat(x)) => {
                SymbolicPoint::Nat(mul * x + add)
            }
            (SymbolicIsometry::F2Plus, SymbolicPoint::Word(w)) => {
                SymbolicPoint::Word(match w.last() {
                    Some(&LA) if is_all_a(w) => w[..w.len() - 1].to_vec(),
                    Some(&LA) => w.clone(),
                    _ => {
                        let mut v = w.clone();
                        v.push(LA_INV);
                        v
                    }
                })
            }
            (SymbolicIsometry::F2Minus, SymbolicPoint::Word(w)) => {
                SymbolicPoint::Word(match w.last() {
                    Some(&LB) => w.clone(),
                    _ => {
                        let mut v = w.clone();
                        v.push(LB_INV);
                        v
                    }
                })
            }
            (SymbolicIsometry::Composed(fs), p) => {
                fs.iter().rev().fold(p.clone(), |q, f| f.apply(&q))
            }
            _ => panic!("symbolic point does not match the isometry's model"),
        }
    }

    /// Partial inverse: `Some(x)` iff `p = apply(x)`.
    pub fn preimage(&self, p: &SymbolicPoint) -> Option<SymbolicPoint> {
        match (self, p) {
            (SymbolicIsometry::Affine { mul, add }, SymbolicPoint::Nat(y)) => {
                if y >= add && (y - add) % mul == 0 {
                    Some(SymbolicPoint::Nat((y - add) / mul))
                } else {
                    None
                }
            }
            (SymbolicIsometry::F2Plus, SymbolicPoint::Word(w)) => match w.last() {
                Some(&LA_INV) => Some(SymbolicPoint::Word(w[..w.len() - 1].to_vec())),
                Some(&LA) if is_all_a(w) => {
                    let mut v = w.clone();
                    v.push(LA);
                    Some(SymbolicPoint::Word(v))
                }
                Some(&LA) => Some(SymbolicPoint::Word(w.clone())),
                None => Some(SymbolicPoint::Word(vec![LA])),
                _ => None,
            },
            (SymbolicIsometry::F2Minus, SymbolicPoint::Word(w)) => match w.last() {
                Some(&LB_INV) => Some(SymbolicPoint::Word(w[..w.len() - 1].to_vec())),
                Some(&LB) => Some(SymbolicPoint::Word(w.clone())),
                _ => None,
            },
            (SymbolicIsometry::Composed(fs), p) => {
                let mut q = p.clone();
                for f in fs {
                    q = f.preimage(&q)?;
                }
                Some(q)
            }
            _ => panic!("symbolic point does not match the isometry's model"),
        }
    }

    pub fn structure_tag(&self) -> String {
        match self {
            SymbolicIsometry::Affine { mul, add } => format!("x->{mul}x+{add}"),
            SymbolicIsometry::F2Plus => "f2-plus".into(),
            SymbolicIsometry::F2Minus => "f2-minus".into(),
            SymbolicIsometry::Composed(fs) => fs
                .iter()
                .map(|f| f.structure_tag())
                .collect::<Vec<_>>()
                .join("*"),
        }
    }
}

/// The standard binary model on the naturals.
pub fn binary_model() -> Vec<SymbolicIsometry> {
    nary_model(2)
}

/// `n` affine isometries `x -> n*x + i` with ranges partitioning the naturals.
pub fn nary_model(n: u64) -> Vec<SymbolicIsometry> {
    (0..n)
        .map(|i| SymbolicIsometry::Affine { mul: n, add: i })
        .collect()
}

/// The built-in free group doubling pair (displacement <= 1 suffix maps).
pub fn f2_doubling_model() -> [SymbolicIsometry; 2] {
    [SymbolicIsometry::F2Plus, SymbolicIsometry::F2Minus]
}

/// `{0, ..., size-1}` as symbolic points.
pub fn nat_window(size: u64) -> Vec<SymbolicPoint> {
    (0..size).map(SymbolicPoint::Nat).collect()
}

/// All reduced rank-2 words of length at most `radius`.
pub fn word_window(radius: u32) -> Vec<SymbolicPoint> {
    enumerate_reduced_words(2, radius)
        .into_iter()
        .map(SymbolicPoint::Word)
        .collect()
}

/// Per-relation outcome of a Leavitt-relation verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeavittReport {
    pub generators: Vec<String>,
    pub window_size: usize,
    /// Window closed under all generator preimages.
    pub saturated: bool,
    pub unsaturated_points: Vec<String>,
    /// `composition[j][i]` records whether `S_j* S_i = delta_ij` held pointwise.
    pub composition: Vec<Vec<bool>>,
    /// Every window point lies in exactly one generator range.
    pub range_partition_ok: bool,
    pub passed: bool,
}

/// Verifies `S_j* S_i = delta_ij 1` and `sum_i S_i S_i* = 1` on a window.
///
/// Compositions are evaluated symbolically, which on a saturated window
/// coincides with the 0/1 matrix products of the window restrictions. With
/// `strict` set, an unsaturated window is an error naming the offenders;
/// otherwise the report records them and the relations are still checked.
pub fn leavitt_relation_check(
    gens: &[SymbolicIsometry],
    window: &[SymbolicPoint],
    strict: bool,
) -> Result<LeavittReport, LeavittError> {
    if gens.is_empty() {
        return Err(LeavittError::EmptyGenerators);
    }
    let space = gens[0].space();
    if gens.iter().any(|g| g.space() != space) {
        return Err(LeavittError::MixedModels);
    }
    let window_sorted: Vec<SymbolicPoint>;
    let window = if window.windows(2).all(|w| w[0] < w[1]) {
        window
    } else {
        let mut v = window.to_vec();
        v.sort();
        v.dedup();
        window_sorted = v;
        &window_sorted
    };
    let in_window = |p: &SymbolicPoint| window.binary_search(p).is_ok();

    let mut unsaturated = Vec::new();
    let mut overlap = Vec::new();
    let mut composition = vec![vec![true; gens.len()]; gens.len()];
    let mut range_partition_ok = true;
    for x in window {
        let mut covers = 0usize;
        for (i, g) in gens.iter().enumerate() {
            if let Some(pre) = g.preimage(x) {
                covers += 1;
                if !in_window(&pre) {
                    unsaturated.push(x.label());
                }
            }
            let gx = g.apply(x);
            for (j, h) in gens.iter().enumerate() {
                let back = h.preimage(&gx);
                let expected = if i == j { Some(x.clone()) } else { None };
                if back != expected {
                    composition[j][i] = false;
                }
            }
        }
        if covers == 0 {
            range_partition_ok = false;
        }
        if covers > 1 {
            overlap.push(x.label());
        }
    }
    unsaturated.sort();
    unsaturated.dedup();
    if !overlap.is_empty() {
        return Err(LeavittError::RangeOverlap(overlap));
    }
    if strict && !unsaturated.is_empty() {
        return Err(LeavittError::UnsaturatedWindow(unsaturated));
    }
    let relations_ok = composition.iter().flatten().all(|&b| b);
    let saturated = unsaturated.is_empty();
    Ok(LeavittReport {
        generators: gens.iter().map(|g| g.structure_tag()).collect(),
        window_size: window.len(),
        saturated,
        unsaturated_points: unsaturated,
        passed: relations_ok && range_partition_ok && saturated,
        composition,
        range_partition_ok,
    })
}

/// Generator words realizing L(1,n) inside L(1,2): the i-th isometry of the
/// n-family is the word `a^(n-1)` for i = 1 and `a^(n-i) b` for i >= 2, over
/// the two base isometries `a`, `b`. Indices index into the base family.
pub fn embed_l1n_words(n: usize) -> Result<Vec<Vec<usize>>, LeavittError> {
    if n < 2 {
        return Err(LeavittError::EmbeddingTooSmall(n));
    }
    let mut words = Vec::with_capacity(n);
    words.push(vec![0; n - 1]);
    for i in 2..=n {
        let mut w = vec![0; n - i];
        w.push(1);
        words.push(w);
    }
    Ok(words)
}

/// Instantiates generator words over a concrete base family.
pub fn compose_words(base: &[SymbolicIsometry], words: &[Vec<usize>]) -> Vec<SymbolicIsometry> {
    words
        .iter()
        .map(|w| SymbolicIsometry::Composed(w.iter().map(|&i| base[i].clone()).collect()))
        .collect()
}
