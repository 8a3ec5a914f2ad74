//! Per-tower block maps `F_i: X → ([0,1]^m)^{S_i}` and the randomized search
//! for one that separates every sampled pair at `d^α_{S_i}`-distance ≥ ε.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::basemap::{block_distance, block_map_f0, feature_vector, BaseMap, Feature};
use crate::embedding::Evaluate;
use crate::error::{Error, Result};
use crate::scalar::{int, Rational, Scalar};
use crate::systems::{act, dyn_metric, MetricConfig, ProductPoint};
use crate::window::FiniteWindow;

/// Resolution of the random coefficients: numerators in `[-2^20, 2^20]`.
const COEF_BITS: u32 = 20;

/// Affine correction `P_s(z)_j = c_{s,j,0} + Σ_i c_{s,j,i} φ_i(z)` of the
/// base point features, one per shape element and output coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub features: Vec<Feature>,
    /// `[shape index][output][0 = constant, 1.. = features]`.
    #[serde(with = "coef_serde")]
    pub coeffs: Vec<Vec<Vec<Rational>>>,
}

mod coef_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(c: &[Vec<Vec<Rational>>], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<Vec<Vec<String>>> =
            c.iter().map(|a| a.iter().map(|b| b.iter().map(format_rational).collect()).collect()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<Rational>>>, D::Error> {
        let strs: Vec<Vec<Vec<String>>> = Vec::deserialize(d)?;
        strs.into_iter()
            .map(|a| {
                a.into_iter()
                    .map(|b| b.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect())
                    .collect()
            })
            .collect()
    }
}

impl Perturbation {
    pub fn zero(features: Vec<Feature>, shape_len: usize, m: usize) -> Self {
        let coeffs = vec![vec![vec![int(0); features.len() + 1]; m]; shape_len];
        Perturbation { features, coeffs }
    }

    /// Coefficients uniform on a dyadic grid in `[-b, b]`, `b = δ/(2(n+1))`
    /// for `n` features, so `|P_s(z)_j| ≤ δ/2` on all of `X`.
    pub fn random(features: Vec<Feature>, shape_len: usize, m: usize, delta: &Rational, rng: &mut ChaCha8Rng) -> Self {
        let bound = delta / int(2 * (features.len() as i64 + 1));
        let scale = 1i64 << COEF_BITS;
        let coeffs = (0..shape_len)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        (0..=features.len())
                            .map(|_| &bound * Rational::new(rng.gen_range(-scale..=scale).into(), scale.into()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Perturbation { features, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().flatten().all(|c| *c == int(0))
    }
}

/// `F_i(z)(s) = clamp(f₀(α_s z) + P_s(z))`.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerBlockMap<T> {
    pub tower: usize,
    pub shape: FiniteWindow,
    pub base: BaseMap<T>,
    pub perturbation: Perturbation,
    coeffs: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> TowerBlockMap<T> {
    pub fn new(tower: usize, shape: FiniteWindow, base: BaseMap<T>, perturbation: Perturbation) -> Result<Self> {
        if perturbation.coeffs.len() != shape.len()
            || perturbation.coeffs.iter().any(|c| c.len() != base.m())
            || perturbation.coeffs.iter().flatten().any(|c| c.len() != perturbation.features.len() + 1)
        {
            return Err(Error::InvalidArgument("perturbation does not match shape, m and features".into()));
        }
        let coeffs = perturbation
            .coeffs
            .iter()
            .map(|a| a.iter().map(|b| b.iter().map(T::from_rational).collect()).collect())
            .collect();
        Ok(TowerBlockMap { tower, shape, base, perturbation, coeffs })
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    fn correction(&self, phi: &[T], si: usize) -> Vec<T> {
        self.coeffs[si]
            .iter()
            .map(|row| row[1..].iter().zip(phi).fold(row[0].clone(), |acc, (a, v)| acc + a.clone() * v.clone()))
            .collect()
    }

    fn features_of(&self, z: &ProductPoint) -> Vec<T> {
        feature_vector(&self.perturbation.features, z).iter().map(T::from_rational).collect()
    }

    fn at_index(&self, z: &ProductPoint, phi: &[T], si: usize, s: i64) -> Result<Vec<T>> {
        let f0 = self.base.eval(&act(z, s))?;
        Ok(f0.into_iter().zip(self.correction(phi, si)).map(|(a, b)| (a + b).clamp01()).collect())
    }

    /// `F_i(z)(s)`.
    pub fn eval_at(&self, z: &ProductPoint, s: i64) -> Result<Vec<T>> {
        let si = self
            .shape
            .elements()
            .binary_search(&s)
            .map_err(|_| Error::InvalidArgument(format!("{s} is not in the shape {}", self.shape)))?;
        self.at_index(z, &self.features_of(z), si, s)
    }

    /// `F_i(z) = (F_i(z)(s))_{s∈S_i}`.
    pub fn eval_block(&self, z: &ProductPoint) -> Result<Vec<Vec<T>>> {
        let phi = self.features_of(z);
        self.shape.iter().enumerate().map(|(si, s)| self.at_index(z, &phi, si, s)).collect()
    }
}

/// Features of the base point read by the perturbation: `ψ(y)` and every
/// cube coordinate on `[min S − R, max S + R]`.
pub fn perturbation_features(shape: &FiniteWindow, k: usize, radius: i64) -> Result<Vec<Feature>> {
    let (lo, hi) = match (shape.min(), shape.max()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Error::EmptyWindow),
    };
    let mut out = vec![Feature::Psi];
    for n in lo - radius..=hi + radius {
        for coord in 0..k {
            out.push(Feature::Entry { n, coord });
        }
    }
    Ok(out)
}

/// Per-try generator, a function of `(seed, tower, try)` only.
pub fn try_rng(seed: u64, tower: usize, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((tower as u64) << 32) | attempt as u64);
    rng
}

#[derive(Clone, Debug)]
pub struct SearchSettings<'a> {
    pub epsilon: &'a Rational,
    pub delta: &'a Rational,
    pub seed: u64,
    pub max_tries: u32,
    /// `R` in [`perturbation_features`].
    pub radius: i64,
    pub k: usize,
    pub mc: &'a MetricConfig,
}

/// A certified block map.
#[derive(Clone, Debug)]
pub struct BlockSearch<T> {
    pub map: TowerBlockMap<T>,
    /// 0 means the unperturbed `F⁰` was accepted.
    pub tries: u32,
    /// Pairs at `d^α_{S_i}`-distance ≥ ε.
    pub qualifying_pairs: usize,
    /// Smallest block separation over them; `None` when there were none.
    pub s_min: Option<T>,
    /// `max ‖F_i − F_i⁰‖∞` over the sample.
    pub deviation: T,
}

#[derive(Clone, Debug)]
pub struct PerturbFailure<T> {
    pub tower: usize,
    pub tries: u32,
    /// Some qualifying pair has identical features: no perturbation helps.
    pub permanent: bool,
    pub best: TowerBlockMap<T>,
    pub violating: Vec<(usize, usize)>,
}

impl<T> std::fmt::Display for PerturbFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "tower {}: {} sampled pair(s) unseparated after {} tries{}",
            self.tower,
            self.violating.len(),
            self.tries,
            if self.permanent { " (identical features)" } else { "" }
        )?;
        if let Some((a, b)) = self.violating.first() {
            write!(f, ", e.g. base points {a} and {b}")?;
        }
        Ok(())
    }
}

/// Draws perturbations until every sampled pair of base points at
/// `d^α_{S_i}`-distance ≥ ε gets distinct blocks. Try 0 is unperturbed.
pub fn perturb_search<T: Scalar>(
    base: &BaseMap<T>,
    tower: usize,
    shape: &FiniteWindow,
    base_points: &[ProductPoint],
    cfg: &SearchSettings<'_>,
) -> Result<std::result::Result<BlockSearch<T>, PerturbFailure<T>>> {
    let radius = cfg.radius.max(base.radius());
    let features = perturbation_features(shape, cfg.k, radius)?;
    let m = base.m();

    let mut qualifying = Vec::new();
    for a in 0..base_points.len() {
        for b in a + 1..base_points.len() {
            if dyn_metric(&base_points[a], &base_points[b], shape, cfg.mc)? >= *cfg.epsilon {
                qualifying.push((a, b));
            }
        }
    }
    let feats: Vec<Vec<Rational>> = base_points.iter().map(|z| feature_vector(&features, z)).collect();
    let collisions: Vec<(usize, usize)> = qualifying.iter().copied().filter(|&(a, b)| feats[a] == feats[b]).collect();
    let f0_blocks: Vec<Vec<Vec<T>>> =
        base_points.iter().map(|z| block_map_f0(base, shape, z)).collect::<Result<_>>()?;

    let mut best: Option<(TowerBlockMap<T>, Vec<(usize, usize)>, u32)> = None;
    if collisions.is_empty() {
        for attempt in 0..=cfg.max_tries {
            let p = if attempt == 0 {
                Perturbation::zero(features.clone(), shape.len(), m)
            } else {
                Perturbation::random(features.clone(), shape.len(), m, cfg.delta, &mut try_rng(cfg.seed, tower, attempt))
            };
            let map = TowerBlockMap::new(tower, shape.clone(), base.clone(), p)?;
            let blocks: Vec<Vec<Vec<T>>> = base_points.iter().map(|z| map.eval_block(z)).collect::<Result<_>>()?;
            let mut s_min: Option<T> = None;
            let mut violating = Vec::new();
            for &(a, b) in &qualifying {
                let d = block_distance(&blocks[a], &blocks[b]);
                if d <= T::zero() {
                    violating.push((a, b));
                }
                s_min = Some(match s_min {
                    Some(v) => T::min_of(v, d),
                    None => d,
                });
            }
            if violating.is_empty() {
                let deviation = blocks
                    .iter()
                    .zip(&f0_blocks)
                    .fold(T::zero(), |acc, (f, g)| T::max_of(acc, block_distance(f, g)));
                return Ok(Ok(BlockSearch { map, tries: attempt, qualifying_pairs: qualifying.len(), s_min, deviation }));
            }
            if best.as_ref().is_none_or(|(_, v, _)| violating.len() < v.len()) {
                best = Some((map, violating, attempt));
            }
        }
    }
    let permanent = !collisions.is_empty();
    let (best, violating, _) = match best {
        Some(b) => b,
        None => {
            let p = Perturbation::zero(features, shape.len(), m);
            (TowerBlockMap::new(tower, shape.clone(), base.clone(), p)?, collisions, 0)
        }
    };
    Ok(Err(PerturbFailure { tower, tries: if permanent { 0 } else { cfg.max_tries }, permanent, best, violating }))
}
