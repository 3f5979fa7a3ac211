//! Exact scalars: arbitrary-precision rationals and Gaussian rationals.
//!
//! Every structural identity in this crate is checked in exact arithmetic;
//! floating point only enters when a square root is unavoidable (norms), and
//! then always from an exactly computed radicand.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

/// Exact rational number.
pub type Rat = BigRational;

/// Gaussian rational: complex number with exact rational real and imaginary parts.
pub type Scalar = Complex<Rat>;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Ratio of two counts.
pub fn rat_of_counts(num: usize, den: usize) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders a rational as `num/den` (always with the explicit denominator).
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid rational literal {0:?}: expected `num` or `num/den` with den != 0")]
pub struct ParseRatError(pub String);

/// Parses `num/den` or a bare integer.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let bad = || ParseRatError(s.to_owned());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n = BigInt::from_str(s.trim()).map_err(|_| bad())?;
            Ok(Rat::from(n))
        }
    }
}

/// Real rational scalar `n/d`.
pub fn scalar(n: i64, d: i64) -> Scalar {
    Complex::new(rat(n, d), Rat::zero())
}

/// Gaussian rational with the given parts.
pub fn scalar_parts(re: Rat, im: Rat) -> Scalar {
    Complex::new(re, im)
}

pub fn scalar_zero() -> Scalar {
    Complex::new(Rat::zero(), Rat::zero())
}

pub fn scalar_one() -> Scalar {
    Complex::new(rat_int(1), Rat::zero())
}

pub fn scalar_is_zero(z: &Scalar) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// `|z|^2 = re^2 + im^2`, exactly.
pub fn abs_sq(z: &Scalar) -> Rat {
    &z.re * &z.re + &z.im * &z.im
}

/// `|re| + |im|`, an exact upper bound for `|z|` (equal to it for real scalars).
pub fn abs_upper(z: &Scalar) -> Rat {
    z.re.abs() + z.im.abs()
}

pub fn conj(z: &Scalar) -> Scalar {
    Complex::new(z.re.clone(), -z.im.clone())
}

pub fn scalar_to_f64(z: &Scalar) -> (f64, f64) {
    (rat_to_f64(&z.re), rat_to_f64(&z.im))
}

/// Renders a scalar as `re` or `re+im*i`, both parts in `num/den` form.
pub fn format_scalar(z: &Scalar) -> String {
    if z.im.is_zero() {
        format_rat(&z.re)
    } else {
        format!("{}+{}i", format_rat(&z.re), format_rat(&z.im))
    }
}

/// SHA-256 of a byte string, hex-encoded. Used to fingerprint inputs in reports.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        use fmt::Write;
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Serde adapter serializing a [`Rat`] as a `"num/den"` string.
pub mod serde_rat {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<Rat>` in `"num/den"` form.
pub mod serde_opt_rat {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| parse_rat(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
