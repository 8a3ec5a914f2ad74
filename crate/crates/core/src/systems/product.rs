//! The extension `X = Y × ([0,1]^k)^ℤ` with the product action, and its metrics.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_dyadic, int, is_dyadic, parse_rational, pow2_neg, ratio, Rational};
use crate::systems::odometer::OdometerPoint;
use crate::window::FiniteWindow;

/// A finitely supported point of `([0,1]^k)^ℤ` with dyadic coordinates.
/// Off the support every entry is the zero vector; all-zero entries are never
/// stored, so structural equality is equality of sequences.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CubeSeqRepr", into = "CubeSeqRepr")]
pub struct CubeSeqPoint {
    k: usize,
    entries: BTreeMap<i64, Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CubeSeqRepr {
    k: usize,
    entries: BTreeMap<String, Vec<String>>,
}

impl TryFrom<CubeSeqRepr> for CubeSeqPoint {
    type Error = Error;

    fn try_from(r: CubeSeqRepr) -> Result<Self> {
        let mut p = CubeSeqPoint::zero(r.k)?;
        for (n, coords) in r.entries {
            let n: i64 = n.parse().map_err(|_| Error::Parse(format!("bad index {n:?}")))?;
            let v = coords.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>>>()?;
            p.set(n, v)?;
        }
        Ok(p)
    }
}

impl From<CubeSeqPoint> for CubeSeqRepr {
    fn from(p: CubeSeqPoint) -> Self {
        CubeSeqRepr {
            k: p.k,
            entries: p
                .entries
                .into_iter()
                .map(|(n, v)| (n.to_string(), v.iter().map(format_dyadic).collect()))
                .collect(),
        }
    }
}

impl fmt::Debug for CubeSeqPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (n, v) in &self.entries {
            let coords: Vec<String> = v.iter().map(format_dyadic).collect();
            m.entry(n, &coords);
        }
        m.finish()
    }
}

impl CubeSeqPoint {
    pub fn zero(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("cube dimension k must be ≥ 1".into()));
        }
        Ok(CubeSeqPoint { k, entries: BTreeMap::new() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sets the entry at index `n`; coordinates must be dyadic and lie in [0,1].
    pub fn set(&mut self, n: i64, v: Vec<Rational>) -> Result<()> {
        if v.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, found: v.len() });
        }
        for c in &v {
            if c.is_negative() || *c > Rational::one() {
                return Err(Error::InvalidArgument(format!("coordinate {c} outside [0,1]")));
            }
            if !is_dyadic(c) {
                return Err(Error::InvalidArgument(format!("coordinate {c} is not dyadic")));
            }
        }
        if v.iter().all(Zero::is_zero) {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, v);
        }
        Ok(())
    }

    pub fn with(mut self, n: i64, v: Vec<Rational>) -> Result<Self> {
        self.set(n, v)?;
        Ok(self)
    }

    pub fn get(&self, n: i64) -> Option<&[Rational]> {
        self.entries.get(&n).map(Vec::as_slice)
    }

    /// Coordinate `c` of entry `n` (zero off the support).
    pub fn coord(&self, n: i64, c: usize) -> Rational {
        self.entries.get(&n).map(|v| v[c].clone()).unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, &[Rational])> {
        self.entries.iter().map(|(n, v)| (*n, v.as_slice()))
    }

    /// Left shift by `g`: the new entry at `n` is the old entry at `n + g`.
    pub fn shift(&self, g: i64) -> Self {
        CubeSeqPoint {
            k: self.k,
            entries: self.entries.iter().map(|(n, v)| (n - g, v.clone())).collect(),
        }
    }

    /// `‖u_n − v_n‖_∞`.
    pub fn entry_distance(&self, other: &Self, n: i64) -> Rational {
        let zero = Rational::zero();
        (0..self.k)
            .map(|c| {
                let a = self.entries.get(&n).map_or(&zero, |v| &v[c]);
                let b = other.entries.get(&n).map_or(&zero, |v| &v[c]);
                (a - b).abs()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Indices where the two sequences differ.
    pub fn differing_indices(&self, other: &Self) -> Vec<i64> {
        let mut idx: Vec<i64> = self.entries.keys().chain(other.entries.keys()).copied().collect();
        idx.sort_unstable();
        idx.dedup();
        idx.retain(|n| self.entries.get(n) != other.entries.get(n));
        idx
    }
}

/// A point of `X`: an odometer coordinate together with a cube sequence.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct ProductPoint {
    pub y: OdometerPoint,
    pub u: CubeSeqPoint,
}

impl ProductPoint {
    pub fn new(y: OdometerPoint, u: CubeSeqPoint) -> Self {
        ProductPoint { y, u }
    }

    pub fn k(&self) -> usize {
        self.u.k()
    }
}

/// Weights of the compatible metrics.
///
/// The cube factor is measured by `w_n = 2^{-|n|}`. The trajectory weights are
/// the two-sided geometric family `c_n = r^{|n|}(1-r)/(1+r)`, which sums to 1
/// for every `0 < r < 1`; the default `r = 1/2` gives `c_n = 2^{-|n|}/3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    #[serde(with = "crate::scalar::serde_rational", default = "default_ratio")]
    pub c_ratio: Rational,
}

fn default_ratio() -> Rational {
    ratio(1, 2)
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { c_ratio: default_ratio() }
    }
}

impl MetricConfig {
    pub fn new(c_ratio: Rational) -> Result<Self> {
        if !c_ratio.is_positive() || c_ratio >= Rational::one() {
            return Err(Error::InvalidArgument("c_ratio must lie in (0,1)".into()));
        }
        Ok(MetricConfig { c_ratio })
    }

    /// Cube-factor weight `w_n = 2^{-|n|}`.
    pub fn w(&self, n: i64) -> Rational {
        pow2_neg(n.unsigned_abs())
    }

    /// Trajectory weight `c_n`.
    pub fn c(&self, n: i64) -> Rational {
        let r = &self.c_ratio;
        num_traits::pow(r.clone(), n.unsigned_abs() as usize) * (int(1) - r) / (int(1) + r)
    }

    /// `Σ_n c_n` in closed form: `(1-r)/(1+r) · (1 + 2r/(1-r))`.
    pub fn total_c(&self) -> Rational {
        let r = &self.c_ratio;
        let one = int(1);
        (&one - r) / (&one + r) * (&one + int(2) * r / (&one - r))
    }

    /// `Σ_{n ∉ W} c_n = 1 − Σ_{n ∈ W} c_n`.
    pub fn tail_outside(&self, window: &FiniteWindow) -> Rational {
        let inside: Rational = window.iter().map(|n| self.c(n)).sum();
        self.total_c() - inside
    }
}

/// `α_g = β_g × shift`.
pub fn act(x: &ProductPoint, g: i64) -> ProductPoint {
    ProductPoint { y: x.y.add_int(g), u: x.u.shift(g) }
}

/// `π(x)`.
pub fn factor_pi(x: &ProductPoint) -> &OdometerPoint {
    &x.y
}

/// `max(d_Y, sup_n w_n ‖u_n − u'_n‖_∞)`.
pub fn dist_x(a: &ProductPoint, b: &ProductPoint, mc: &MetricConfig) -> Result<Rational> {
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch { expected: a.k(), found: b.k() });
    }
    let mut best = a.y.dist(&b.y);
    for n in a.u.differing_indices(&b.u) {
        let v = mc.w(n) * a.u.entry_distance(&b.u, n);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// `d^α_F(a, b) = max_{g∈F} d(α_g a, α_g b)`.
///
/// Computed without forming the translates: the odometer metric is
/// translation invariant and the cube part collapses to the effective
/// weights `2^{-dist(n, F)}`.
pub fn dyn_metric(
    a: &ProductPoint,
    b: &ProductPoint,
    f: &FiniteWindow,
    _mc: &MetricConfig,
) -> Result<Rational> {
    if f.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch { expected: a.k(), found: b.k() });
    }
    let mut best = a.y.dist(&b.y);
    for n in a.u.differing_indices(&b.u) {
        let d = f.distance_to(n).expect("non-empty window");
        let v = pow2_neg(d) * a.u.entry_distance(&b.u, n);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn cube(entries: &[(i64, Rational)]) -> CubeSeqPoint {
        let mut u = CubeSeqPoint::zero(1).unwrap();
        for (n, v) in entries {
            u.set(*n, vec![v.clone()]).unwrap();
        }
        u
    }

    #[test]
    fn cube_points_validate() {
        let mut u = CubeSeqPoint::zero(2).unwrap();
        assert!(u.set(0, vec![ratio(1, 2)]).is_err());
        assert!(u.set(0, vec![ratio(1, 3), int(0)]).is_err());
        assert!(u.set(0, vec![ratio(3, 2), int(0)]).is_err());
        u.set(4, vec![int(0), int(0)]).unwrap();
        assert_eq!(u.support().count(), 0);
        assert!(CubeSeqPoint::zero(0).is_err());
    }

    #[test]
    fn shift_reindexes() {
        let u = cube(&[(0, ratio(1, 2))]);
        assert_eq!(u.shift(1).support().collect::<Vec<_>>(), vec![-1]);
        assert_eq!(u.shift(1).shift(-1), u);
    }

    #[test]
    fn dist_x_examples() {
        let mc = MetricConfig::default();
        let y = OdometerPoint::zero();
        let x = ProductPoint::new(y.clone(), cube(&[]));
        assert_eq!(dist_x(&x, &x, &mc).unwrap(), int(0));
        let x1 = ProductPoint::new(y.clone(), cube(&[(0, int(1))]));
        assert_eq!(dist_x(&x, &x1, &mc).unwrap(), int(1));
        let x3 = ProductPoint::new(y.clone(), cube(&[(3, ratio(1, 2))]));
        assert_eq!(dist_x(&x, &x3, &mc).unwrap(), ratio(1, 16));
        let other_k = ProductPoint::new(y, CubeSeqPoint::zero(2).unwrap());
        assert!(dist_x(&x, &other_k, &mc).is_err());
    }

    #[test]
    fn dyn_metric_examples() {
        let mc = MetricConfig::default();
        let y = OdometerPoint::parse("01", "1").unwrap();
        let a = ProductPoint::new(y.clone(), cube(&[(1, ratio(1, 4))]));
        let b = ProductPoint::new(y.clone(), cube(&[(2, ratio(3, 4))]));
        assert_eq!(
            dyn_metric(&a, &b, &FiniteWindow::singleton(0), &mc).unwrap(),
            dist_x(&a, &b, &mc).unwrap()
        );
        let f = FiniteWindow::interval(0, 5);
        assert_eq!(dyn_metric(&a, &a, &f, &mc).unwrap(), int(0));
        let x = ProductPoint::new(y.clone(), cube(&[]));
        let x3 = ProductPoint::new(y, cube(&[(3, ratio(1, 2))]));
        assert_eq!(dyn_metric(&x, &x3, &FiniteWindow::interval(0, 3), &mc).unwrap(), ratio(1, 2));
        assert_eq!(dyn_metric(&x, &x3, &FiniteWindow::empty(), &mc), Err(Error::EmptyWindow));
    }

    #[test]
    fn weights_sum_to_one() {
        let mc = MetricConfig::default();
        assert_eq!(mc.total_c(), int(1));
        assert_eq!(mc.c(0), ratio(1, 3));
        assert_eq!(mc.c(-2), ratio(1, 12));
        let w = FiniteWindow::interval(-3, 3);
        // two tails of Σ_{n≥4} 2^{-n}/3 = 2^{-3}/3
        assert_eq!(mc.tail_outside(&w), ratio(2, 24));
        let mc = MetricConfig::new(ratio(1, 3)).unwrap();
        assert_eq!(mc.total_c(), int(1));
        assert!(MetricConfig::new(int(1)).is_err());
    }

    #[test]
    fn serde_formats() {
        let u = CubeSeqPoint::zero(2).unwrap().with(-3, vec![ratio(1, 2), ratio(3, 8)]).unwrap();
        let x = ProductPoint::new(OdometerPoint::parse("1", "01").unwrap(), u);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(
            s,
            r#"{"y":{"pre":"","per":"10"},"u":{"k":2,"entries":{"-3":["1/2^1","3/2^3"]}}}"#
        );
        assert_eq!(serde_json::from_str::<ProductPoint>(&s).unwrap(), x);
        let bad = r#"{"y":{"pre":"","per":"1"},"u":{"k":1,"entries":{"0":["1/3"]}}}"#;
        assert!(serde_json::from_str::<ProductPoint>(bad).is_err());
    }
}
