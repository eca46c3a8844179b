//! Exact rationals, rounding helpers and roots of unity.
//!
//! Every lattice parameter (a, b, the sample points x and ν of the
//! certificates) is carried as an arbitrary-precision [`Rational`]. Floating
//! point only enters through [`Complex64`] values of Zak transforms.

use std::f64::consts::PI;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Builds `num/den` from machine integers. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"` (base 10). Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational of the form p/q: {s:?}"));
    if t.is_empty() || t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(bad());
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(t).map_err(|_| bad())?,
        )),
    }
}

/// Canonical `"p/q"` form; integers print without a denominator.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    // BigRational::to_f64 rounds correctly even for huge numerators and denominators.
    x.to_f64().unwrap_or(f64::NAN)
}

/// Nearest integer with ties rounded up: `floor(x + 1/2)`.
pub fn round_nearest(x: &Rational) -> BigInt {
    (x + rat(1, 2)).floor().to_integer()
}

/// `x - round_nearest(x)`, which lies in `[-1/2, 1/2)`.
pub fn signed_frac(x: &Rational) -> Rational {
    x - Rational::from_integer(round_nearest(x))
}

/// `exp(-2πi s / r)`. Multiples of a quarter turn are returned exactly.
pub fn root_of_unity(s: i64, r: u64) -> Result<Complex64> {
    if r == 0 {
        return Err(Error::InvalidParameter(
            "root of unity order must be positive".into(),
        ));
    }
    let r = r as i128;
    let s = (s as i128).rem_euclid(r);
    if (4 * s) % r == 0 {
        return Ok(match 4 * s / r {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        });
    }
    let theta = -2.0 * PI * (s as f64) / (r as f64);
    Ok(Complex64::new(theta.cos(), theta.sin()))
}

/// Reduces `a·b` to `p/q` in lowest terms.
pub fn reduce_ratio(a: &Rational, b: &Rational) -> Result<(u64, u64)> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "a and b must be positive (got a={}, b={})",
            format_rational(a),
            format_rational(b)
        )));
    }
    let r = a * b;
    let p = r.numer().to_u64();
    let q = r.denom().to_u64();
    match (p, q) {
        (Some(p), Some(q)) => Ok((p, q)),
        _ => Err(Error::InvalidParameter(format!(
            "oversampling ratio {} does not fit machine integers",
            format_rational(&r)
        ))),
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Integers `k` with `lo <= start + step·k <= hi`, for `step > 0`.
pub(crate) fn index_range(
    lo: &Rational,
    hi: &Rational,
    start: &Rational,
    step: &Rational,
) -> (i64, i64) {
    let first = ((lo - start) / step).ceil().to_integer();
    let last = ((hi - start) / step).floor().to_integer();
    (
        first.to_i64().expect("index range overflow"),
        last.to_i64().expect("index range overflow"),
    )
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(
            xs: &[Rational],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod nested {
        use super::*;

        #[derive(serde::Serialize, serde::Deserialize)]
        struct Row(#[serde(with = "super::vec")] Vec<Rational>);

        pub fn serialize<S: Serializer>(
            xs: &[Vec<Rational>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            use serde::ser::SerializeSeq;
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for row in xs {
                seq.serialize_element(&Row(row.clone()))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            let v = Vec::<Row>::deserialize(d)?;
            Ok(v.into_iter().map(|r| r.0).collect())
        }
    }
}
