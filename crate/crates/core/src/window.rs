//! Finite subsets of ℤ and their invariance combinatorics.
//!
//! The group is ℤ written additively, so the product `KF` of two finite sets
//! is the sumset `{k + f}`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{int, Rational};

/// Sorted, duplicate-free finite set of integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "Vec<i64>")]
pub struct FiniteWindow(Vec<i64>);

impl From<Vec<i64>> for FiniteWindow {
    fn from(mut v: Vec<i64>) -> Self {
        v.sort_unstable();
        v.dedup();
        FiniteWindow(v)
    }
}

/// Configs may give a window as a list or as text such as `"-24..24"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum WindowRepr {
    List(Vec<i64>),
    Text(String),
}

impl TryFrom<WindowRepr> for FiniteWindow {
    type Error = Error;

    fn try_from(r: WindowRepr) -> Result<Self> {
        match r {
            WindowRepr::List(v) => Ok(v.into()),
            WindowRepr::Text(t) => t.parse(),
        }
    }
}

/// Parses `a..b` (inclusive), a comma list of integers and ranges, or `{}`.
impl std::str::FromStr for FiniteWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
        let mut out = Vec::new();
        if t.is_empty() {
            return Ok(FiniteWindow::empty());
        }
        let bad = || Error::Parse(format!("cannot read window {s:?}"));
        for part in t.split(',') {
            let part = part.trim();
            match part.split_once("..") {
                Some((a, b)) => {
                    let a: i64 = a.trim().parse().map_err(|_| bad())?;
                    let b: i64 = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => out.push(part.parse().map_err(|_| bad())?),
            }
        }
        Ok(out.into())
    }
}

impl From<FiniteWindow> for Vec<i64> {
    fn from(w: FiniteWindow) -> Self {
        w.0
    }
}

impl FromIterator<i64> for FiniteWindow {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let set: BTreeSet<i64> = iter.into_iter().collect();
        FiniteWindow(set.into_iter().collect())
    }
}

impl fmt::Display for FiniteWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(lo), Some(hi)) = (self.min(), self.max()) {
            if self.is_interval() && self.len() > 3 {
                return write!(f, "{{{lo}..{hi}}}");
            }
        }
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FiniteWindow {
    pub fn empty() -> Self {
        FiniteWindow(Vec::new())
    }

    pub fn singleton(x: i64) -> Self {
        FiniteWindow(vec![x])
    }

    /// `{lo, …, hi}`; empty when `hi < lo`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        FiniteWindow((lo..=hi).collect())
    }

    pub fn elements(&self) -> &[i64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn is_interval(&self) -> bool {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => (hi - lo) as usize + 1 == self.len(),
            _ => true,
        }
    }

    pub fn is_subset(&self, other: &FiniteWindow) -> bool {
        self.0.iter().all(|x| other.contains(*x))
    }

    /// `F + g`.
    pub fn translate(&self, g: i64) -> FiniteWindow {
        FiniteWindow(self.0.iter().map(|x| x + g).collect())
    }

    pub fn union(&self, other: &FiniteWindow) -> FiniteWindow {
        self.0.iter().chain(other.0.iter()).copied().collect()
    }

    pub fn difference(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow(self.0.iter().copied().filter(|x| !other.contains(*x)).collect())
    }

    /// `F − F = {s − t}`.
    pub fn difference_set(&self) -> FiniteWindow {
        let mut out = Vec::with_capacity(self.len() * self.len());
        for &s in &self.0 {
            for &t in &self.0 {
                out.push(s - t);
            }
        }
        out.into()
    }

    /// Smallest distance from `n` to an element, `None` when empty.
    pub fn distance_to(&self, n: i64) -> Option<u64> {
        if self.is_empty() {
            return None;
        }
        let idx = self.0.partition_point(|&x| x < n);
        let mut best = u64::MAX;
        if idx < self.0.len() {
            best = best.min(self.0[idx].abs_diff(n));
        }
        if idx > 0 {
            best = best.min(self.0[idx - 1].abs_diff(n));
        }
        Some(best)
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyWindow)
        } else {
            Ok(())
        }
    }
}

/// The pair `(K, δ)` of an invariance requirement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceParams {
    pub k: FiniteWindow,
    #[serde(with = "crate::scalar::serde_rational")]
    pub delta: Rational,
}

impl InvarianceParams {
    pub fn new(k: FiniteWindow, delta: Rational) -> Result<Self> {
        if delta.is_negative() {
            return Err(Error::InvalidArgument("delta must be nonnegative".into()));
        }
        Ok(InvarianceParams { k, delta })
    }
}

/// `KF = {k + f : k ∈ K, f ∈ F}`.
pub fn sum_set(k: &FiniteWindow, f: &FiniteWindow) -> Result<FiniteWindow> {
    k.require_nonempty()?;
    f.require_nonempty()?;
    let mut out = Vec::with_capacity(k.len() * f.len());
    for a in k.iter() {
        for b in f.iter() {
            out.push(a + b);
        }
    }
    Ok(out.into())
}

/// `KF \ F`.
pub fn boundary(f: &FiniteWindow, k: &FiniteWindow) -> Result<FiniteWindow> {
    f.require_nonempty()?;
    Ok(sum_set(k, f)?.difference(f))
}

/// `|KF \ F| ≤ δ|F|`, decided exactly.
pub fn is_invariant(f: &FiniteWindow, p: &InvarianceParams) -> Result<bool> {
    let b = boundary(f, &p.k)?;
    Ok(int(b.len() as i64) <= &p.delta * int(f.len() as i64))
}

/// The interval `{0, …, n−1}`.
pub fn folner_interval(n: usize) -> Result<FiniteWindow> {
    if n == 0 {
        return Err(Error::InvalidArgument("Følner interval length must be ≥ 1".into()));
    }
    Ok(FiniteWindow::interval(0, n as i64 - 1))
}
