//! Points of the 2-adic odometer with eventually periodic expansions.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pow2_neg, Rational};

/// An eventually periodic binary expansion `y₀y₁y₂…`, least significant digit
/// first, stored as `pre · per^∞` in canonical form: `per` is primitive and
/// `pre` is as short as possible. Structural equality is therefore equality
/// of 2-adic integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "OdometerRepr", into = "OdometerRepr")]
pub struct OdometerPoint {
    pre: Vec<u8>,
    per: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OdometerRepr {
    pre: String,
    per: String,
}

impl TryFrom<OdometerRepr> for OdometerPoint {
    type Error = Error;

    fn try_from(r: OdometerRepr) -> Result<Self> {
        OdometerPoint::parse(&r.pre, &r.per)
    }
}

impl From<OdometerPoint> for OdometerRepr {
    fn from(p: OdometerPoint) -> Self {
        OdometerRepr { pre: digits_to_string(&p.pre), per: digits_to_string(&p.per) }
    }
}

fn digits_to_string(d: &[u8]) -> String {
    d.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

fn parse_digits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("not a binary digit: {c:?}"))),
        })
        .collect()
}

impl fmt::Debug for OdometerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for OdometerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", digits_to_string(&self.pre), digits_to_string(&self.per))
    }
}

impl OdometerPoint {
    pub fn new(pre: Vec<u8>, per: Vec<u8>) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::InvalidArgument("odometer period must be non-empty".into()));
        }
        if pre.iter().chain(per.iter()).any(|&d| d > 1) {
            return Err(Error::InvalidArgument("odometer digits must be 0 or 1".into()));
        }
        Ok(Self::canonical(pre, per))
    }

    pub fn parse(pre: &str, per: &str) -> Result<Self> {
        Self::new(parse_digits(pre)?, parse_digits(per)?)
    }

    /// The point `0̄`.
    pub fn zero() -> Self {
        OdometerPoint { pre: Vec::new(), per: vec![0] }
    }

    /// The image of an ordinary integer in ℤ₂.
    pub fn from_integer(n: i64) -> Self {
        Self::zero().add_int(n)
    }

    fn canonical(mut pre: Vec<u8>, mut per: Vec<u8>) -> Self {
        let p = per.len();
        for d in 1..=p {
            if p.is_multiple_of(d) && (d..p).all(|i| per[i] == per[i % d]) {
                per.truncate(d);
                break;
            }
        }
        while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
            if a != b {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        OdometerPoint { pre, per }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.per
    }

    pub fn digit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// The first `n` digits.
    pub fn prefix(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.digit(i)).collect()
    }

    /// `Σ_{i<n} y_i 2^i`, the residue of `y` modulo `2^n` (n ≤ 63).
    pub fn residue(&self, n: u32) -> u64 {
        assert!(n <= 63, "residue modulus too large");
        (0..n as usize).fold(0u64, |acc, i| acc | ((self.digit(i) as u64) << i))
    }

    /// `y + g` in ℤ₂, i.e. the odometer action.
    pub fn add_int(&self, g: i64) -> Self {
        if g == 0 {
            return self.clone();
        }
        let p = self.per.len();
        let sign = u8::from(g < 0);
        let magnitude_bits = if g >= 0 { 64 - g.leading_zeros() } else { 64 - (!g).leading_zeros() };
        let g_digit = |i: usize| -> u8 {
            if i < 64 {
                ((g >> i) & 1) as u8
            } else {
                sign
            }
        };
        let n = self.pre.len().max(magnitude_bits as usize + 1);
        let mut out = Vec::with_capacity(n + p);
        let mut carry = 0u8;
        for i in 0..n {
            let s = self.digit(i) + g_digit(i) + carry;
            out.push(s & 1);
            carry = s >> 1;
        }
        // Past position n the addend is the constant digit `sign`; the tail is
        // unchanged once carry and sign agree.
        let mut i = n;
        while carry != sign && i < n + p {
            let s = self.digit(i) + sign + carry;
            out.push(s & 1);
            carry = s >> 1;
            i += 1;
        }
        let per = if carry == sign {
            let phase = (i - self.pre.len()) % p;
            let mut per = self.per.clone();
            per.rotate_left(phase);
            per
        } else {
            // …111 + 1 = 0̄ and 0̄ − 1 = …111: the carry never settles.
            vec![sign]
        };
        Self::canonical(out, per)
    }

    /// Least index where the expansions differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        if self == other {
            return None;
        }
        let horizon =
            self.pre.len().max(other.pre.len()) + self.per.len().lcm(&other.per.len());
        (0..horizon).find(|&i| self.digit(i) != other.digit(i))
    }

    /// `2^{-n}` where `n` is the first differing digit; 0 for equal points.
    pub fn dist(&self, other: &Self) -> Rational {
        match self.first_difference(other) {
            None => Rational::from_integer(0.into()),
            Some(n) => pow2_neg(n as u64),
        }
    }

    /// Whether the first `w.len()` digits equal `w`.
    pub fn starts_with(&self, w: &[u8]) -> bool {
        w.iter().enumerate().all(|(i, &d)| self.digit(i) == d)
    }
}

/// `β_g(y)`.
pub fn odometer_act(y: &OdometerPoint, g: i64) -> OdometerPoint {
    y.add_int(g)
}

/// The compatible metric on the odometer.
pub fn dist_y(a: &OdometerPoint, b: &OdometerPoint) -> Rational {
    a.dist(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use proptest::prelude::*;

    fn pt(pre: &str, per: &str) -> OdometerPoint {
        OdometerPoint::parse(pre, per).unwrap()
    }

    /// Digit-wise oracle: add g to the first `len` digits with an explicit carry chain.
    fn add_digits_oracle(y: &OdometerPoint, g: i64, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        let mut carry = 0i64;
        for i in 0..len {
            let gd = if i < 64 { (g >> i) & 1 } else { i64::from(g < 0) };
            let s = y.digit(i) as i64 + gd + carry;
            out.push((s & 1) as u8);
            carry = s >> 1;
        }
        out
    }

    #[test]
    fn act_examples() {
        assert_eq!(odometer_act(&OdometerPoint::zero(), 1), pt("1", "0"));
        assert_eq!(odometer_act(&pt("", "1"), 1), OdometerPoint::zero());
        let y = pt("0110", "01");
        assert_eq!(odometer_act(&y, 0), y);
        // …111 + 1 on 64 digits: all zeros.
        assert_eq!(add_digits_oracle(&pt("", "1"), 1, 64), vec![0; 64]);
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(pt("0", "0"), OdometerPoint::zero());
        assert_eq!(pt("", "0101"), pt("", "01"));
        assert_eq!(pt("1", "01"), pt("", "10"));
        assert_eq!(pt("1", "01").to_string(), "(10)");
        assert!(OdometerPoint::parse("", "").is_err());
        assert!(OdometerPoint::parse("2", "0").is_err());
    }

    #[test]
    fn integers_embed() {
        assert_eq!(OdometerPoint::from_integer(-1), pt("", "1"));
        assert_eq!(OdometerPoint::from_integer(6), pt("011", "0"));
        assert_eq!(OdometerPoint::from_integer(-2), pt("0", "1"));
        assert_eq!(OdometerPoint::from_integer(5).residue(4), 5);
    }

    #[test]
    fn distance_examples() {
        let z = OdometerPoint::zero();
        assert_eq!(dist_y(&z, &z), int(0));
        assert_eq!(dist_y(&z, &pt("1", "0")), int(1));
        assert_eq!(dist_y(&z, &pt("", "001")), ratio(1, 4));
        assert_eq!(z.first_difference(&pt("", "001")), Some(2));
    }

    #[test]
    fn serde_roundtrip() {
        let y = pt("0110", "01");
        let s = serde_json::to_string(&y).unwrap();
        assert_eq!(s, r#"{"pre":"0110","per":"01"}"#);
        assert_eq!(serde_json::from_str::<OdometerPoint>(&s).unwrap(), y);
        assert!(serde_json::from_str::<OdometerPoint>(r#"{"pre":"","per":""}"#).is_err());
    }

    fn point_strategy() -> impl Strategy<Value = OdometerPoint> {
        (prop::collection::vec(0u8..2, 0..10), prop::collection::vec(0u8..2, 1..6))
            .prop_map(|(a, b)| OdometerPoint::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn addition_matches_digit_oracle(y in point_strategy(), g in -5000i64..5000) {
            let z = y.add_int(g);
            prop_assert_eq!(z.prefix(80), add_digits_oracle(&y, g, 80));
        }

        #[test]
        fn action_law(y in point_strategy(), g in -3000i64..3000, h in -3000i64..3000) {
            prop_assert_eq!(y.add_int(g).add_int(h), y.add_int(g + h));
            prop_assert_eq!(y.add_int(g).add_int(-g), y.clone());
        }

        #[test]
        fn metric_is_translation_invariant(a in point_strategy(), b in point_strategy(), g in -500i64..500) {
            prop_assert_eq!(a.add_int(g).dist(&b.add_int(g)), a.dist(&b));
        }

        #[test]
        fn distance_is_ultrametric(a in point_strategy(), b in point_strategy(), c in point_strategy()) {
            let ab = a.dist(&b);
            let bc = b.dist(&c);
            let m = if ab > bc { ab } else { bc };
            prop_assert!(a.dist(&c) <= m);
            prop_assert_eq!(a.dist(&b), b.dist(&a));
        }
    }
}
