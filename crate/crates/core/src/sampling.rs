//! Seeded random generators for windows, translations, and operators.
//!
//! Everything here is deterministic given the RNG state, so benchmark tasks
//! and randomized verification runs reproduce bit-for-bit.

use crate::num::{rat, Rat, Scalar};
use crate::operator::{DiagonalFunction, FinitePropOperator};
use crate::pointset::PointSet;
use crate::space::SpaceWindow;
use crate::translations::PartialTranslation;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Uniformly random subset where each point enters with probability `density`.
/// Falls back to a singleton when the draw comes out empty.
pub fn random_subset(w: &SpaceWindow, density: f64, rng: &mut ChaCha8Rng) -> PointSet {
    let mut ids: Vec<u32> = Vec::new();
    for x in 0..w.len() as u32 {
        if rng.gen_bool(density.clamp(0.0, 1.0)) {
            ids.push(x);
        }
    }
    if ids.is_empty() {
        ids.push(rng.gen_range(0..w.len() as u32));
    }
    PointSet::from_ids(ids)
}

/// Random subset of fixed size.
pub fn random_subset_of_size(w: &SpaceWindow, size: usize, rng: &mut ChaCha8Rng) -> PointSet {
    let mut ids: Vec<u32> = (0..w.len() as u32).collect();
    ids.shuffle(rng);
    ids.truncate(size.clamp(1, w.len()));
    PointSet::from_ids(ids)
}

/// Random partial translation with displacement at most `max_disp`.
///
/// Greedy matching over a shuffled domain; some points stay unmatched, so
/// the result is a genuinely partial map.
pub fn random_partial_translation(
    w: &Arc<SpaceWindow>,
    max_disp: u32,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> PartialTranslation {
    let mut order: Vec<u32> = (0..w.len() as u32).collect();
    order.shuffle(rng);
    let mut used = vec![false; w.len()];
    let mut pairs = Vec::new();
    for x in order {
        if !rng.gen_bool(density.clamp(0.0, 1.0)) {
            continue;
        }
        let ball: Vec<u32> = w
            .ball(x, max_disp)
            .expect("point in window")
            .iter()
            .filter(|&y| !used[y as usize])
            .collect();
        if let Some(&y) = ball.as_slice().choose(rng) {
            used[y as usize] = true;
            pairs.push((x, y));
        }
    }
    PartialTranslation::new(w.clone(), pairs).expect("sampled pairs are valid")
}

/// Random partial translation without fixed points.
pub fn random_fixed_point_free_translation(
    w: &Arc<SpaceWindow>,
    max_disp: u32,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> PartialTranslation {
    let mut order: Vec<u32> = (0..w.len() as u32).collect();
    order.shuffle(rng);
    let mut used = vec![false; w.len()];
    let mut pairs = Vec::new();
    for x in order {
        if !rng.gen_bool(density.clamp(0.0, 1.0)) {
            continue;
        }
        let ball: Vec<u32> = w
            .ball(x, max_disp.max(1))
            .expect("point in window")
            .iter()
            .filter(|&y| y != x && !used[y as usize])
            .collect();
        if let Some(&y) = ball.as_slice().choose(rng) {
            used[y as usize] = true;
            pairs.push((x, y));
        }
    }
    PartialTranslation::new(w.clone(), pairs).expect("sampled pairs are valid")
}

/// Small random rational in `[-3, 3]` with denominator up to 4; avoids zero.
pub fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let num = rng.gen_range(-3i64..=3);
        if num != 0 {
            return rat(num, rng.gen_range(1i64..=4));
        }
    }
}

/// Random scalar; imaginary part present with probability `complex_prob`.
pub fn random_scalar(complex_prob: f64, rng: &mut ChaCha8Rng) -> Scalar {
    let re = random_rat(rng);
    let im = if rng.gen_bool(complex_prob.clamp(0.0, 1.0)) {
        random_rat(rng)
    } else {
        Rat::from(num_bigint::BigInt::from(0))
    };
    Scalar::new(re, im)
}

/// Random diagonal supported on roughly `density` of the window.
pub fn random_diagonal(
    w: &Arc<SpaceWindow>,
    density: f64,
    complex_prob: f64,
    rng: &mut ChaCha8Rng,
) -> DiagonalFunction {
    let mut values: Vec<(u32, Scalar)> = Vec::new();
    for x in 0..w.len() as u32 {
        if rng.gen_bool(density.clamp(0.0, 1.0)) {
            values.push((x, random_scalar(complex_prob, rng)));
        }
    }
    DiagonalFunction::new(w.clone(), values).expect("window points")
}

/// Random finite-propagation operator `sum_i V_{t_i} f_i` with at most
/// `terms` summands and propagation at most `max_prop`.
pub fn random_operator(
    w: &Arc<SpaceWindow>,
    max_prop: u32,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> FinitePropOperator {
    let mut acc = FinitePropOperator::zero(w.clone());
    for _ in 0..terms.max(1) {
        let t = random_partial_translation(w, max_prop, 0.7, rng);
        let f = random_diagonal(w, 0.8, 0.3, rng);
        let vt = FinitePropOperator::from_partial_translation(&t);
        let term = vt.mul(&f.as_operator()).expect("same window");
        acc = acc.add(&term).expect("same window");
    }
    acc
}
