//! Scalar abstraction shared by the geometry and embedding layers.
//!
//! Everything that is a *definition* (points, metrics, cylinder sets) is held
//! exactly as [`Rational`]. Everything that is *evaluated* (box covers, block
//! maps, glued maps) is generic over [`Scalar`], so the same code runs on exact
//! rationals for certification and on `f64` for quick exploration.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Number type the generic layers compute in.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Whether arithmetic is exact (comparisons are decisions, not estimates).
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    /// Exact rational value of `self`. Floats convert exactly; non-finite
    /// floats map to zero.
    fn to_rational(&self) -> Rational;

    fn as_f64(&self) -> f64;

    fn from_int(n: i64) -> Self;

    /// `num / 2^exp`.
    fn dyadic(num: i64, exp: u32) -> Self {
        let mut v = Self::from_int(num);
        let two = Self::from_int(2);
        for _ in 0..exp {
            v = v / two.clone();
        }
        v
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn clamp01(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn dyadic(num: i64, exp: u32) -> Self {
        num as f64 * (-(exp as f64)).exp2()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }

    fn from_int(n: i64) -> Self {
        n as f32
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn dyadic(num: i64, exp: u32) -> Self {
        Rational::new(BigInt::from(num), BigInt::one() << exp as usize)
    }
}

/// `2^{-n}` as an exact rational.
pub fn pow2_neg(n: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n as usize)
}

/// `p / q` with small integers.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exponent `q` with `r = p / 2^q` in lowest terms, or `None` when the
/// denominator is not a power of two.
pub fn dyadic_exponent(r: &Rational) -> Option<u64> {
    let d = r.denom();
    if d.is_zero() || d.is_negative() {
        return None;
    }
    let bits = d.bits();
    if bits == 0 {
        return None;
    }
    if (BigInt::one() << (bits - 1) as usize) == *d {
        Some(bits - 1)
    } else {
        None
    }
}

pub fn is_dyadic(r: &Rational) -> bool {
    dyadic_exponent(r).is_some()
}

/// Smallest `j ≥ 0` with `2^{-j} ≤ r`, for `0 < r`. Returns 0 when `r ≥ 1`.
pub fn dyadic_floor_exponent(r: &Rational) -> u64 {
    assert!(r.is_positive(), "dyadic_floor_exponent of non-positive value");
    let mut j = 0u64;
    while pow2_neg(j) > *r {
        j += 1;
    }
    j
}

/// `⌈log₂(1/ε)⌉` for `0 < ε ≤ 1`.
pub fn ceil_log2_inv(eps: &Rational) -> u64 {
    let mut j = 0u64;
    while pow2_neg(j) > *eps {
        j += 1;
    }
    j
}

/// Parses `"p/q"`, `"p/2^q"`, `"2^-q"`, integers and finite decimals exactly.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let num = parse_power_or_int(p.trim()).ok_or_else(bad)?;
        let den = parse_power_or_int(q.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(num / den);
    }
    if let Some(v) = parse_power_or_int(t) {
        return Ok(v);
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let digits = format!("{whole_digits}{frac}");
        let num = BigInt::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10)
            .map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = Rational::new(num, den);
        return Ok(if negative { -v } else { v });
    }
    Err(bad())
}

fn parse_power_or_int(t: &str) -> Option<Rational> {
    if let Some((base, exp)) = t.split_once('^') {
        let base = BigInt::from_str_radix(base.trim(), 10).ok()?;
        let exp: i64 = exp.trim().trim_start_matches('(').trim_end_matches(')').parse().ok()?;
        let b = Rational::from_integer(base);
        if b.is_zero() && exp < 0 {
            return None;
        }
        let mag = num_traits::pow(b.clone(), exp.unsigned_abs() as usize);
        return Some(if exp < 0 { mag.recip() } else { mag });
    }
    BigInt::from_str_radix(t, 10).ok().map(Rational::from_integer)
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `"p/2^q"` for dyadic values (integers print bare), `"p/q"` otherwise.
pub fn format_dyadic(r: &Rational) -> String {
    match dyadic_exponent(r) {
        Some(0) => r.numer().to_string(),
        Some(q) => format!("{}/2^{}", r.numer(), q),
        None => format_rational(r),
    }
}

/// Lossy view for reports and plots.
pub fn approx(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_f64(v)
}

/// Serde adapter: rationals as strings, accepting integers on input.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        Int(i64),
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Text(t) => parse_rational(&t).map_err(de::Error::custom),
            Repr::Int(n) => Ok(super::int(n)),
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rational(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let raw = Vec::<Repr>::deserialize(d)?;
            raw.into_iter()
                .map(|r| match r {
                    Repr::Text(t) => parse_rational(&t).map_err(de::Error::custom),
                    Repr::Int(n) => Ok(super::super::int(n)),
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&format_rational(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            match Option::<Repr>::deserialize(d)? {
                None => Ok(None),
                Some(Repr::Text(t)) => parse_rational(&t).map(Some).map_err(de::Error::custom),
                Some(Repr::Int(n)) => Ok(Some(super::super::int(n))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_notations() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("3/2^4").unwrap(), ratio(3, 16));
        assert_eq!(parse_rational("2^-3").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn dyadic_helpers() {
        assert_eq!(dyadic_exponent(&ratio(5, 8)), Some(3));
        assert_eq!(dyadic_exponent(&ratio(1, 3)), None);
        assert_eq!(format_dyadic(&ratio(5, 8)), "5/2^3");
        assert_eq!(format_dyadic(&int(1)), "1");
        assert_eq!(format_rational(&ratio(10, 8)), "5/4");
        assert_eq!(ceil_log2_inv(&ratio(1, 2)), 1);
        assert_eq!(ceil_log2_inv(&ratio(3, 16)), 3);
        assert_eq!(ceil_log2_inv(&int(1)), 0);
        assert_eq!(dyadic_floor_exponent(&ratio(3, 16)), 3);
    }

    #[test]
    fn scalar_conversions_agree() {
        let r = ratio(3, 8);
        assert_eq!(<f64 as Scalar>::from_rational(&r), 0.375);
        assert_eq!(<f64 as Scalar>::dyadic(3, 3), 0.375);
        assert_eq!(<Rational as Scalar>::dyadic(3, 3), r);
        assert_eq!(0.375f64.to_rational(), r);
        assert_eq!(<Rational as Scalar>::clamp01(int(2)), int(1));
    }
}
