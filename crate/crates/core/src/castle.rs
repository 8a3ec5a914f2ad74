//! Clopen towers and castles over the odometer, substitution subshifts and
//! the product system, with exact or sampled verification.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, pow2_neg, Rational};
use crate::systems::{act, OdometerPoint, ProductPoint, SubstitutionSystem};
use crate::window::{is_invariant, FiniteWindow, InvarianceParams};

/// Largest odometer castle level accepted (shape size `2^n`).
pub const MAX_ODOMETER_LEVEL: u32 = 20;

/// A clopen cylinder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "CylinderRepr", into = "CylinderRepr")]
pub enum CylinderSet {
    /// Odometer points whose first digits are `word` (least significant first).
    OdometerDigits(Vec<u8>),
    /// Subshift points carrying `word` at position 0.
    SubshiftWord(String),
    /// `π^{-1}(inner)` for product points.
    Pullback(Box<CylinderSet>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum CylinderRepr {
    OdometerDigits { word: String },
    SubshiftWord { word: String },
    Pullback { inner: Box<CylinderRepr> },
}

impl TryFrom<CylinderRepr> for CylinderSet {
    type Error = Error;

    fn try_from(r: CylinderRepr) -> Result<Self> {
        Ok(match r {
            CylinderRepr::OdometerDigits { word } => CylinderSet::odometer(&word)?,
            CylinderRepr::SubshiftWord { word } => {
                if word.is_empty() {
                    return Err(Error::InvalidArgument("subshift cylinder word is empty".into()));
                }
                CylinderSet::SubshiftWord(word)
            }
            CylinderRepr::Pullback { inner } => CylinderSet::Pullback(Box::new((*inner).try_into()?)),
        })
    }
}

impl From<CylinderSet> for CylinderRepr {
    fn from(c: CylinderSet) -> Self {
        match c {
            CylinderSet::OdometerDigits(w) => CylinderRepr::OdometerDigits { word: digits_str(&w) },
            CylinderSet::SubshiftWord(word) => CylinderRepr::SubshiftWord { word },
            CylinderSet::Pullback(inner) => CylinderRepr::Pullback { inner: Box::new((*inner).into()) },
        }
    }
}

fn digits_str(w: &[u8]) -> String {
    w.iter().map(|d| if *d == 1 { '1' } else { '0' }).collect()
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CylinderSet::OdometerDigits(w) => write!(f, "[{}]", digits_str(w)),
            CylinderSet::SubshiftWord(w) => write!(f, "[{w}]"),
            CylinderSet::Pullback(inner) => write!(f, "π⁻¹{inner}"),
        }
    }
}

impl CylinderSet {
    /// Digit cylinder from a string of `0`/`1`; the empty word is all of `Y`.
    pub fn odometer(word: &str) -> Result<Self> {
        let digits = word
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("odometer digit {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(CylinderSet::OdometerDigits(digits))
    }

    /// Strips pullback wrappers.
    pub fn inner_most(&self) -> &CylinderSet {
        match self {
            CylinderSet::Pullback(inner) => inner.inner_most(),
            other => other,
        }
    }
}

/// `[w] + g`, again a digit cylinder of the same length.
pub fn translate_digits(w: &[u8], g: i64) -> Vec<u8> {
    let y = OdometerPoint::new(w.to_vec(), vec![0]).expect("binary digits");
    y.add_int(g).prefix(w.len())
}

/// Points of a space in which castles live.
pub trait CastlePoint: Clone {
    fn shifted(&self, g: i64) -> Self;

    fn in_cylinder(&self, c: &CylinderSet) -> Result<bool>;
}

impl CastlePoint for OdometerPoint {
    fn shifted(&self, g: i64) -> Self {
        self.add_int(g)
    }

    fn in_cylinder(&self, c: &CylinderSet) -> Result<bool> {
        match c {
            CylinderSet::OdometerDigits(w) => Ok(self.starts_with(w)),
            other => Err(Error::InvalidArgument(format!("{other} is not a cylinder of the odometer"))),
        }
    }
}

impl CastlePoint for ProductPoint {
    fn shifted(&self, g: i64) -> Self {
        act(self, g)
    }

    fn in_cylinder(&self, c: &CylinderSet) -> Result<bool> {
        match c {
            CylinderSet::Pullback(inner) => self.y.in_cylinder(inner),
            other => Err(Error::InvalidArgument(format!("{other} is not a cylinder of the product system"))),
        }
    }
}

/// `σ^pos` of a point known only on the finite window `text`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubshiftPoint {
    text: Arc<str>,
    pos: i64,
}

impl SubshiftPoint {
    pub fn new(text: Arc<str>, pos: i64) -> Self {
        SubshiftPoint { text, pos }
    }

    pub fn pos(&self) -> i64 {
        self.pos
    }
}

impl CastlePoint for SubshiftPoint {
    fn shifted(&self, g: i64) -> Self {
        SubshiftPoint { text: self.text.clone(), pos: self.pos + g }
    }

    fn in_cylinder(&self, c: &CylinderSet) -> Result<bool> {
        match c {
            CylinderSet::SubshiftWord(w) => {
                let end = self.pos + w.len() as i64;
                if self.pos < 0 || end > self.text.len() as i64 {
                    return Err(Error::InsufficientHorizon(format!(
                        "positions {}..{end} leave the known window of length {}",
                        self.pos,
                        self.text.len()
                    )));
                }
                Ok(&self.text[self.pos as usize..end as usize] == w.as_str())
            }
            other => Err(Error::InvalidArgument(format!("{other} is not a subshift cylinder"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tower {
    pub base: CylinderSet,
    pub shape: FiniteWindow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Castle {
    pub towers: Vec<Tower>,
}

impl Castle {
    pub fn new(towers: Vec<Tower>) -> Result<Self> {
        if towers.iter().any(|t| t.shape.is_empty()) {
            return Err(Error::EmptyWindow);
        }
        Ok(Castle { towers })
    }

    pub fn len(&self) -> usize {
        self.towers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.towers.is_empty()
    }

    pub fn level_count(&self) -> usize {
        self.towers.iter().map(|t| t.shape.len()).sum()
    }

    pub fn shapes(&self) -> impl Iterator<Item = &FiniteWindow> {
        self.towers.iter().map(|t| &t.shape)
    }

    /// Whether `x` lies in level `s` of tower `i`, i.e. `α_{-s}(x) ∈ V_i`.
    pub fn in_level<P: CastlePoint>(&self, x: &P, i: usize, s: i64) -> Result<bool> {
        x.shifted(-s).in_cylinder(&self.towers[i].base)
    }
}

/// The Kakutani–Rokhlin tower of the odometer over `[0ⁿ]` with shape
/// `{0, …, 2ⁿ−1}`.
pub fn odometer_castle(n: u32) -> Result<Castle> {
    if n == 0 || n > MAX_ODOMETER_LEVEL {
        return Err(Error::InvalidArgument(format!("castle level must lie in 1..={MAX_ODOMETER_LEVEL}")));
    }
    Castle::new(vec![Tower {
        base: CylinderSet::OdometerDigits(vec![0; n as usize]),
        shape: FiniteWindow::interval(0, (1i64 << n) - 1),
    }])
}

/// One tower per return word `r` of `w`: base `[r w]`, shape `{0, …, |r|−1}`.
/// Towers are ordered by return word length, then lexicographically.
pub fn returnword_castle(s: &SubstitutionSystem, w: &str, horizon: usize) -> Result<Castle> {
    let mut words: Vec<String> = s.return_words(w, horizon)?.into_iter().map(|r| r.word).collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Castle::new(
        words
            .into_iter()
            .map(|r| Tower {
                shape: FiniteWindow::interval(0, r.len() as i64 - 1),
                base: CylinderSet::SubshiftWord(format!("{r}{w}")),
            })
            .collect(),
    )
}

/// `{(π^{-1}(V_i), S_i)}`.
pub fn pullback(c: &Castle) -> Castle {
    Castle {
        towers: c
            .towers
            .iter()
            .map(|t| Tower { base: CylinderSet::Pullback(Box::new(t.base.clone())), shape: t.shape.clone() })
            .collect(),
    }
}

/// The unique `(i, s)` with `x ∈ α_s(V_i)`.
pub fn locate<P: CastlePoint>(c: &Castle, x: &P) -> Result<(usize, i64)> {
    let mut found = None;
    for (i, t) in c.towers.iter().enumerate() {
        for s in t.shape.iter() {
            if c.in_level(x, i, s)? {
                if let Some((j, r)) = found {
                    return Err(Error::Ambiguous(format!("point lies in levels ({j},{r}) and ({i},{s})")));
                }
                found = Some((i, s));
            }
        }
    }
    found.ok_or_else(|| Error::NotCovered("point lies in no level of the castle".into()))
}

/// How a castle was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    ExactCylinders,
    /// Exact on the odometer, transported along the surjective factor map.
    ExactViaFactor,
    Sampled,
}

/// Points for sampled verification.
#[derive(Clone, Copy, Debug)]
pub enum SamplePoints<'a> {
    Odometer(&'a [OdometerPoint]),
    Product(&'a [ProductPoint]),
    Subshift(&'a [SubshiftPoint]),
}

#[derive(Clone, Copy, Debug)]
pub enum VerifyMode<'a> {
    Exact,
    Sampled(SamplePoints<'a>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CastleReport {
    pub mode: CheckMode,
    pub disjoint: bool,
    pub covering: bool,
    pub invariant: bool,
    /// `Σ` of level measures, for exact odometer checks.
    pub level_measure: Option<String>,
    pub checked_points: usize,
    pub failures: Vec<String>,
}

impl CastleReport {
    pub fn passed(&self) -> bool {
        self.disjoint && self.covering && self.invariant
    }
}

/// Level disjointness, covering and `(K,δ)`-invariance of every shape.
pub fn verify_castle(c: &Castle, mode: VerifyMode<'_>, p: &InvarianceParams) -> Result<CastleReport> {
    let mut failures = Vec::new();
    let mut invariant = true;
    for (i, shape) in c.shapes().enumerate() {
        if !is_invariant(shape, p)? {
            invariant = false;
            failures.push(format!("shape of tower {i} ({shape}) is not ({},{})-invariant", p.k, p.delta));
        }
    }
    let mut report = match mode {
        VerifyMode::Exact => verify_exact(c)?,
        VerifyMode::Sampled(SamplePoints::Odometer(pts)) => verify_sampled(c, pts)?,
        VerifyMode::Sampled(SamplePoints::Product(pts)) => verify_sampled(c, pts)?,
        VerifyMode::Sampled(SamplePoints::Subshift(pts)) => verify_sampled(c, pts)?,
    };
    report.invariant = invariant;
    report.failures.extend(failures);
    Ok(report)
}

fn verify_exact(c: &Castle) -> Result<CastleReport> {
    let pulled = c.towers.iter().all(|t| matches!(t.base, CylinderSet::Pullback(_)));
    let mut levels: Vec<(Vec<u8>, usize, i64)> = Vec::with_capacity(c.level_count());
    for (i, t) in c.towers.iter().enumerate() {
        let CylinderSet::OdometerDigits(w) = t.base.inner_most() else {
            return Err(Error::InvalidArgument(
                "exact verification needs odometer digit cylinders (or their pullbacks)".into(),
            ));
        };
        if pulled != matches!(t.base, CylinderSet::Pullback(_)) {
            return Err(Error::InvalidArgument("castle mixes pulled-back and plain bases".into()));
        }
        for s in t.shape.iter() {
            levels.push((translate_digits(w, s), i, s));
        }
    }
    // A family of cylinders is disjoint iff no word is a prefix of another;
    // after sorting, a prefix relation shows up between neighbours.
    levels.sort();
    let mut failures = Vec::new();
    for pair in levels.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.0.starts_with(&a.0) {
            failures.push(format!(
                "levels ({},{}) = [{}] and ({},{}) = [{}] intersect",
                a.1,
                a.2,
                digits_str(&a.0),
                b.1,
                b.2,
                digits_str(&b.0)
            ));
        }
    }
    let disjoint = failures.is_empty();
    let measure: Rational = levels.iter().map(|(w, _, _)| pow2_neg(w.len() as u64)).sum();
    let covering = disjoint && measure == int(1);
    if !covering {
        failures.push(format!("level measures sum to {}", format_rational(&measure)));
    }
    Ok(CastleReport {
        mode: if pulled { CheckMode::ExactViaFactor } else { CheckMode::ExactCylinders },
        disjoint,
        covering,
        invariant: true,
        level_measure: Some(format_rational(&measure)),
        checked_points: 0,
        failures,
    })
}

fn verify_sampled<P: CastlePoint>(c: &Castle, pts: &[P]) -> Result<CastleReport> {
    let mut failures = Vec::new();
    let (mut disjoint, mut covering) = (true, true);
    for (k, x) in pts.iter().enumerate() {
        let mut hits = Vec::new();
        for (i, t) in c.towers.iter().enumerate() {
            for s in t.shape.iter() {
                if c.in_level(x, i, s)? {
                    hits.push((i, s));
                }
            }
        }
        match hits.len() {
            0 => {
                covering = false;
                failures.push(format!("sample point {k} lies in no level"));
            }
            1 => {}
            _ => {
                disjoint = false;
                failures.push(format!("sample point {k} lies in levels {hits:?}"));
            }
        }
    }
    Ok(CastleReport {
        mode: CheckMode::Sampled,
        disjoint,
        covering,
        invariant: true,
        level_measure: None,
        checked_points: pts.len(),
        failures,
    })
}

/// How the levels of a subshift castle tile a finite window of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTiling {
    pub length: usize,
    /// Positions covered by two or more levels.
    pub overlaps: usize,
    /// Positions covered by no level.
    pub gaps: usize,
    pub leading_gap: usize,
    pub trailing_gap: usize,
    pub interior_gaps: usize,
}

/// Scans `text` for occurrences of every base word and marks the positions
/// of the corresponding levels.
pub fn window_tiling(c: &Castle, text: &str) -> Result<WindowTiling> {
    let mut cover = vec![0u32; text.len()];
    for t in &c.towers {
        let CylinderSet::SubshiftWord(b) = &t.base else {
            return Err(Error::InvalidArgument("window tiling needs subshift word bases".into()));
        };
        for p in crate::systems::substitution::occurrences(text, b) {
            for s in t.shape.iter() {
                let q = p as i64 + s;
                if (0..text.len() as i64).contains(&q) {
                    cover[q as usize] += 1;
                }
            }
        }
    }
    let leading_gap = cover.iter().take_while(|&&n| n == 0).count();
    let trailing_gap = if leading_gap == cover.len() { 0 } else { cover.iter().rev().take_while(|&&n| n == 0).count() };
    let gaps = cover.iter().filter(|&&n| n == 0).count();
    Ok(WindowTiling {
        length: text.len(),
        overlaps: cover.iter().filter(|&&n| n >= 2).count(),
        gaps,
        leading_gap,
        trailing_gap,
        interior_gaps: gaps - leading_gap - trailing_gap,
    })
}
