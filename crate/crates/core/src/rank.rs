//! Exact linear algebra over the Gaussian rationals.
//!
//! Rank is computed fraction-free (Bareiss) over Gaussian integers after
//! clearing row denominators; dimensions coming out of these routines are
//! exact, never thresholded. Small dense solves (Gram inverses) use plain
//! Gauss-Jordan over the rational field.

use crate::num::{conj, scalar_is_zero, Rat, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Gaussian integer.
#[derive(Clone, Debug, PartialEq, Eq)]
struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn zero() -> Self {
        GaussInt {
            re: BigInt::zero(),
            im: BigInt::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, other: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    fn sub(&self, other: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    /// Exact division; panics if the quotient is not a Gaussian integer.
    /// Bareiss guarantees divisibility at every elimination step.
    fn div_exact(&self, d: &GaussInt) -> GaussInt {
        let norm = &d.re * &d.re + &d.im * &d.im;
        let num = self.mul(&GaussInt {
            re: d.re.clone(),
            im: -d.im.clone(),
        });
        let (qr, rr) = num_integer::Integer::div_rem(&num.re, &norm);
        let (qi, ri) = num_integer::Integer::div_rem(&num.im, &norm);
        assert!(rr.is_zero() && ri.is_zero(), "non-exact Bareiss division");
        GaussInt { re: qr, im: qi }
    }
}

/// Clears denominators of one row of Gaussian rationals.
fn integerize_row(row: &[Scalar]) -> Vec<GaussInt> {
    let mut lcm = BigInt::one();
    for z in row {
        lcm = num_integer::Integer::lcm(&lcm, z.re.denom());
        lcm = num_integer::Integer::lcm(&lcm, z.im.denom());
    }
    row.iter()
        .map(|z| GaussInt {
            re: z.re.numer() * (&lcm / z.re.denom()),
            im: z.im.numer() * (&lcm / z.im.denom()),
        })
        .collect()
}

/// Exact rank of a matrix given as rows of Gaussian rationals.
pub fn rank(rows: &[Vec<Scalar>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<GaussInt>> = rows.iter().map(|r| integerize_row(r)).collect();
    let nrows = m.len();
    let mut rank = 0usize;
    let mut prev = GaussInt {
        re: BigInt::one(),
        im: BigInt::zero(),
    };
    for col in 0..cols {
        if rank >= nrows {
            break;
        }
        let Some(pivot_row) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot_row);
        let pivot = m[rank][col].clone();
        // Forward Bareiss update: intermediate entries are minors of the
        // input, so division by the previous pivot is exact.
        for r in rank + 1..nrows {
            for c in 0..cols {
                if c == col {
                    continue;
                }
                let t = pivot.mul(&m[r][c]).sub(&m[r][col].mul(&m[rank][c]));
                m[r][c] = t.div_exact(&prev);
            }
            m[r][col] = GaussInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Dense matrix of Gaussian rationals, row-major.
pub type Mat = Vec<Vec<Scalar>>;

pub fn mat_zero(rows: usize, cols: usize) -> Mat {
    vec![vec![crate::num::scalar_zero(); cols]; rows]
}

pub fn mat_identity(n: usize) -> Mat {
    let mut m = mat_zero(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = crate::num::scalar_one();
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k) = (a.len(), b.len());
    let cols = if k > 0 { b[0].len() } else { 0 };
    let mut out = mat_zero(n, cols);
    for i in 0..n {
        for (l, brow) in b.iter().enumerate() {
            let alk = &a[i][l];
            if scalar_is_zero(alk) {
                continue;
            }
            for j in 0..cols {
                if !scalar_is_zero(&brow[j]) {
                    out[i][j] = out[i][j].clone() + alk.clone() * brow[j].clone();
                }
            }
        }
    }
    out
}

pub fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b.iter())
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb.iter())
                .map(|(x, y)| x.clone() - y.clone())
                .collect()
        })
        .collect()
}

/// Conjugate transpose.
pub fn mat_adjoint(a: &Mat) -> Mat {
    let (n, m) = (a.len(), if a.is_empty() { 0 } else { a[0].len() });
    let mut out = mat_zero(m, n);
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = conj(v);
        }
    }
    out
}

pub fn mat_trace(a: &Mat) -> Scalar {
    let mut t = crate::num::scalar_zero();
    for (i, row) in a.iter().enumerate() {
        t += row[i].clone();
    }
    t
}

/// Exact inverse by Gauss-Jordan. Returns `None` when singular.
#[allow(clippy::needless_range_loop)] // pivot elimination touches two rows at once
pub fn mat_inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .zip(mat_identity(n))
        .map(|(row, id)| {
            let mut r = row.clone();
            r.extend(id);
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !scalar_is_zero(&m[r][col]))?;
        m.swap(col, pivot_row);
        let inv = invert_scalar(&m[col][col]);
        for c in 0..2 * n {
            m[col][c] = m[col][c].clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || scalar_is_zero(&m[r][col]) {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..2 * n {
                let delta = factor.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn invert_scalar(z: &Scalar) -> Scalar {
    let norm: Rat = crate::num::abs_sq(z);
    let c = conj(z);
    Scalar::new(c.re / norm.clone(), c.im / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, scalar, scalar_parts};

    #[test]
    fn rank_of_standard_cases() {
        let e1 = vec![scalar(1, 1), scalar(0, 1), scalar(0, 1)];
        let e2 = vec![scalar(0, 1), scalar(1, 1), scalar(0, 1)];
        let sum = vec![scalar(1, 1), scalar(1, 1), scalar(0, 1)];
        assert_eq!(rank(&[e1.clone(), e2.clone(), sum]), 2);
        assert_eq!(rank(&[e1, e2]), 2);
        assert_eq!(rank(&[vec![scalar(0, 1); 3]]), 0);
        assert_eq!(rank(&[]), 0);
    }

    #[test]
    fn rank_with_rational_and_complex_entries() {
        let r1 = vec![scalar(1, 2), scalar(1, 3)];
        let r2 = vec![scalar(3, 2), scalar(1, 1)]; // = 3 * r1
        assert_eq!(rank(&[r1.clone(), r2]), 1);
        let c1 = vec![scalar_parts(rat(0, 1), rat(1, 1)), scalar(1, 1)];
        let c2 = vec![scalar(-1, 1), scalar_parts(rat(0, 1), rat(1, 1))]; // i * c1
        assert_eq!(rank(&[c1.clone(), c2]), 1);
        assert_eq!(rank(&[c1, r1]), 2);
    }

    #[test]
    fn inverse_round_trip() {
        let a: Mat = vec![
            vec![scalar(2, 1), scalar(1, 1)],
            vec![scalar_parts(rat(0, 1), rat(1, 1)), scalar(1, 2)],
        ];
        let inv = mat_inverse(&a).expect("invertible");
        let prod = mat_mul(&a, &inv);
        assert_eq!(prod, mat_identity(2));
        let singular: Mat = vec![
            vec![scalar(1, 1), scalar(2, 1)],
            vec![scalar(2, 1), scalar(4, 1)],
        ];
        assert!(mat_inverse(&singular).is_none());
    }

    #[test]
    fn trace_and_adjoint() {
        let a: Mat = vec![
            vec![scalar_parts(rat(1, 1), rat(2, 1)), scalar(5, 1)],
            vec![scalar(0, 1), scalar_parts(rat(3, 1), rat(-2, 1))],
        ];
        assert_eq!(mat_trace(&a), scalar(4, 1));
        let aa = mat_adjoint(&a);
        assert_eq!(aa[0][0], scalar_parts(rat(1, 1), rat(-2, 1)));
        assert_eq!(aa[0][1], scalar(0, 1));
        assert_eq!(aa[1][0], scalar(5, 1));
    }
}
