//! Deterministic finite samples of `X` with built-in adversarial structure.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dyadic_floor_exponent, ratio, Rational};
use crate::systems::odometer::OdometerPoint;
use crate::systems::product::{act, dist_x, CubeSeqPoint, MetricConfig, ProductPoint};

fn default_eta() -> Rational {
    ratio(1, 16)
}

fn default_fiber_size() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub k: usize,
    pub seed: u64,
    pub count: usize,
    /// Cube entries are drawn on indices `|n| ≤ support_radius`.
    pub support_radius: i64,
    /// Bound on preperiod plus period length of the odometer coordinates.
    pub digit_budget: usize,
    /// Separation threshold for the planted same-fiber pairs.
    #[serde(with = "crate::scalar::serde_rational", default = "default_eta")]
    pub eta: Rational,
    /// Number of mutually `eta`-separated points per planted fiber.
    #[serde(default = "default_fiber_size")]
    pub fiber_size: usize,
    /// Orbit segments are `act(x, g)` for `|g| ≤ orbit_radius`; defaults to
    /// `min(support_radius, 4)`.
    #[serde(default)]
    pub orbit_radius: Option<i64>,
}

impl SampleSpec {
    pub fn new(k: usize, seed: u64, count: usize) -> Self {
        SampleSpec {
            k,
            seed,
            count,
            support_radius: 6,
            digit_budget: 8,
            eta: default_eta(),
            fiber_size: default_fiber_size(),
            orbit_radius: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be ≥ 1".into()));
        }
        if self.support_radius < 0 {
            return Err(Error::InvalidArgument("support_radius must be ≥ 0".into()));
        }
        if self.fiber_size < 2 {
            return Err(Error::InvalidArgument("fiber_size must be ≥ 2".into()));
        }
        if self.eta <= Rational::from_integer(0.into()) {
            return Err(Error::InvalidArgument("eta must be positive".into()));
        }
        Ok(())
    }

    fn orbit_radius(&self) -> i64 {
        self.orbit_radius.unwrap_or(self.support_radius.min(4)).max(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Equal odometer coordinate.
    SameFiber,
    /// Distinct fibers, at distance at least `eta`.
    Separated,
    /// `(x, act(x, g))`.
    Orbit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePair {
    pub a: usize,
    pub b: usize,
    pub kind: PairKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub points: Vec<ProductPoint>,
    /// Pairs planted by construction; verification still scans all pairs.
    pub pairs: Vec<SamplePair>,
}

impl Sample {
    pub fn from_points(points: Vec<ProductPoint>) -> Self {
        Sample { points, pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count_pairs(&self, kind: PairKind) -> usize {
        self.pairs.iter().filter(|p| p.kind == kind).count()
    }
}

fn random_coord(rng: &mut ChaCha8Rng) -> Rational {
    let q: u32 = rng.gen_range(1..=4);
    let j: i64 = rng.gen_range(0..=(1i64 << q));
    ratio(j, 1i64 << q)
}

fn random_y(rng: &mut ChaCha8Rng, budget: usize) -> OdometerPoint {
    let half = (budget / 2).max(1);
    let pre_len = rng.gen_range(0..=budget.saturating_sub(1).min(half));
    let per_len = rng.gen_range(1..=half);
    let pre = (0..pre_len).map(|_| rng.gen_range(0..2u8)).collect();
    let per = (0..per_len).map(|_| rng.gen_range(0..2u8)).collect();
    OdometerPoint::new(pre, per).expect("binary digits with non-empty period")
}

fn random_u(rng: &mut ChaCha8Rng, k: usize, radius: i64) -> CubeSeqPoint {
    let mut u = CubeSeqPoint::zero(k).expect("k ≥ 1");
    for n in -radius..=radius {
        if rng.gen_bool(0.5) {
            let v = (0..k).map(|_| random_coord(rng)).collect();
            u.set(n, v).expect("dyadic coordinates in [0,1]");
        }
    }
    u
}

/// Draws a deterministic sample. Roughly half the points come in planted
/// fibers (`fiber_size` mutually `eta`-separated points sharing `y`, plus one
/// near twin), a quarter in orbit segments, and the rest independently.
pub fn sample_points(spec: &SampleSpec) -> Result<Sample> {
    spec.validate()?;
    let mc = MetricConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r = spec.support_radius;
    let mut points = Vec::with_capacity(spec.count);
    let mut pairs = Vec::new();

    if spec.count == 1 {
        points.push(ProductPoint::new(random_y(&mut rng, spec.digit_budget), random_u(&mut rng, spec.k, r)));
        return Ok(Sample { points, pairs });
    }

    let group = spec.fiber_size + 1;
    let n_groups = (spec.count / 2) / group;
    let orbit_len = 2 * spec.orbit_radius() as usize + 1;
    let n_orbits = if orbit_len > 1 { (spec.count / 4) / orbit_len } else { 0 };

    // Member j of a fiber gets value j·2^{-a} at index n*, so two members are at
    // distance ≥ 2^{-|n*|-a}; keep |n*| small enough for that to reach eta.
    let spacing_exp = usize::BITS - (spec.fiber_size - 1).leading_zeros();
    let eta_exp = dyadic_floor_exponent(&spec.eta) as i64;
    let reach = (eta_exp - spacing_exp as i64).clamp(0, r.max(0));

    for _ in 0..n_groups {
        let y = random_y(&mut rng, spec.digit_budget);
        let base_u = random_u(&mut rng, spec.k, r);
        let n_star = rng.gen_range(-reach..=reach);
        let start = points.len();
        for j in 0..spec.fiber_size {
            let mut u = base_u.clone();
            let mut v: Vec<Rational> = (0..spec.k).map(|c| base_u.coord(n_star, c)).collect();
            v[0] = ratio(j as i64, 1i64 << spacing_exp);
            u.set(n_star, v).expect("valid coordinates");
            points.push(ProductPoint::new(y.clone(), u));
        }
        // Near twin of the first member: differs only far out, by a small amount.
        let mut twin = points[start].u.clone();
        let far = if n_star == r { -r } else { r };
        let mut v: Vec<Rational> = (0..spec.k).map(|c| twin.coord(far, c)).collect();
        let nudge = ratio(1, 64);
        v[0] = if v[0] < ratio(1, 2) { &v[0] + &nudge } else { &v[0] - &nudge };
        twin.set(far, v).expect("valid coordinates");
        points.push(ProductPoint::new(y, twin));
        for a in start..points.len() {
            for b in a + 1..points.len() {
                pairs.push(SamplePair { a, b, kind: PairKind::SameFiber });
            }
        }
    }

    let o = spec.orbit_radius();
    for _ in 0..n_orbits {
        let x = ProductPoint::new(random_y(&mut rng, spec.digit_budget), random_u(&mut rng, spec.k, r));
        let center = points.len() + o as usize;
        for g in -o..=o {
            points.push(act(&x, g));
        }
        for i in 0..orbit_len {
            let idx = center - o as usize + i;
            if idx != center {
                pairs.push(SamplePair { a: center, b: idx, kind: PairKind::Orbit });
            }
        }
    }

    while points.len() < spec.count {
        let x = ProductPoint::new(random_y(&mut rng, spec.digit_budget), random_u(&mut rng, spec.k, r));
        if let Some(prev) = points.last() {
            if prev.y != x.y && dist_x(prev, &x, &mc)? >= spec.eta {
                pairs.push(SamplePair { a: points.len() - 1, b: points.len(), kind: PairKind::Separated });
            }
        }
        points.push(x);
    }
    Ok(Sample { points, pairs })
}

/// Fraction of planted pairs that share a fiber.
pub fn same_fiber_fraction(sample: &Sample) -> Rational {
    if sample.pairs.is_empty() {
        return Rational::one();
    }
    ratio(sample.count_pairs(PairKind::SameFiber) as i64, sample.pairs.len() as i64)
}
