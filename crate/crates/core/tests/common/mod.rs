//! Independent oracles for cross-checking the sparse implementation.
//!
//! Everything here is deliberately naive: dense matrices, direct definitional
//! enumeration, textbook Gaussian elimination. The oracles share no code with
//! the library paths they check.
#![allow(dead_code)] // shared between test targets with different usage

use roelab::num::{conj, scalar_is_zero, scalar_zero, Rat, Scalar};
use roelab::operator::FinitePropOperator;

/// Dense complex-rational matrix oracle (gated to windows <= 64 points).
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<Scalar>,
}

impl Dense {
    pub fn from_op(op: &FinitePropOperator) -> Dense {
        let n = op.window().len();
        assert!(n <= 64, "dense oracle gate");
        let mut data = vec![scalar_zero(); n * n];
        for (&(x, y), v) in op.entries() {
            data[x as usize * n + y as usize] = v.clone();
        }
        Dense { n, data }
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut data = vec![scalar_zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if scalar_is_zero(a) {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !scalar_is_zero(b) {
                        data[i * n + j] = data[i * n + j].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Dense { n, data }
    }

    pub fn add(&self, other: &Dense) -> Dense {
        Dense {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Dense {
        let n = self.n;
        let mut data = vec![scalar_zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = conj(&self.data[i * n + j]);
            }
        }
        Dense { n, data }
    }

    pub fn equals_op(&self, op: &FinitePropOperator) -> bool {
        *self == Dense::from_op(op)
    }

    /// Largest singular value via the real 2n x 2n embedding and nalgebra SVD.
    pub fn operator_norm(&self) -> f64 {
        let n = self.n;
        let mut m = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let (re, im) = roelab::num::scalar_to_f64(&self.data[i * n + j]);
                m[(i, j)] = re;
                m[(i, j + n)] = -im;
                m[(i + n, j)] = im;
                m[(i + n, j + n)] = re;
            }
        }
        m.svd(false, false).singular_values.max()
    }
}

/// Textbook fraction-full Gaussian elimination rank over the Gaussian rationals.
#[allow(clippy::needless_range_loop)]
pub fn dense_rank(rows: &[Vec<Scalar>]) -> usize {
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !scalar_is_zero(&m[r][col])) else {
            continue;
        };
        m.swap(rank, pivot);
        let p = m[rank][col].clone();
        let pinv = {
            let norm: Rat = roelab::num::abs_sq(&p);
            let c = conj(&p);
            Scalar::new(c.re / norm.clone(), c.im / norm)
        };
        for c in 0..ncols {
            m[rank][c] = m[rank][c].clone() * pinv.clone();
        }
        for r in 0..nrows {
            if r != rank && !scalar_is_zero(&m[r][col]) {
                let f = m[r][col].clone();
                for c in 0..ncols {
                    let d = f.clone() * m[rank][c].clone();
                    m[r][c] = m[r][c].clone() - d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Reduced words of the rank-2 free group up to `radius`, enumerated directly
/// (independent of the window builder).
pub fn reduced_words_oracle(radius: u32) -> Vec<Vec<u8>> {
    let mut words: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..4u8 {
                if w.last().is_some_and(|&last| last ^ 1 == l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words
}

/// Word metric on reduced words: `|u| + |v| - 2 lcp`.
pub fn word_dist(u: &[u8], v: &[u8]) -> usize {
    let lcp = u.iter().zip(v.iter()).take_while(|(a, b)| a == b).count();
    u.len() + v.len() - 2 * lcp
}

/// Definitional boundary enumeration on the integer line: for the interval
/// `[0, m)` inside Z, counts `{x : d(x, A) <= r and d(x, Z \ A) <= r}` parts.
pub fn z_interval_boundary_oracle(m: i64, r: i64) -> (usize, usize) {
    let mut outer = 0usize;
    let mut inner = 0usize;
    for x in -(r + 2)..m + r + 2 {
        let in_a = (0..m).contains(&x);
        let d_a = (0..m).map(|a| (x - a).abs()).min().unwrap_or(i64::MAX);
        // Distance to the complement: nearest point outside [0, m).
        let d_comp = if in_a { (x + 1).min(m - x) } else { 0 };
        if in_a && d_comp <= r {
            inner += 1;
        }
        if !in_a && d_a <= r {
            outer += 1;
        }
    }
    (outer, inner)
}
