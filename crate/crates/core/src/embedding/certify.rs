//! Finite-sample certification that `I_f × π` is an η-embedding, with the
//! reduction to a single tower replayed on colliding pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::castle::locate;
use crate::embedding::glue::GluedMap;
use crate::embedding::{fmt_scalar, trajectory_block};
use crate::error::Result;
use crate::scalar::{approx, format_rational, Rational, Scalar};
use crate::systems::{act, dist_x, dyn_metric, MetricConfig, ProductPoint};
use crate::window::FiniteWindow;

/// `inf/2 − tail`, floored at 0; infinite when nothing qualifies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Margin {
    Infinite,
    Finite(String),
}

impl Margin {
    pub fn is_positive(&self) -> bool {
        match self {
            Margin::Infinite => true,
            Margin::Finite(s) => s.parse::<f64>().map_or_else(|_| !s.starts_with('0') && !s.starts_with('-'), |v| v > 0.0),
        }
    }
}

impl std::fmt::Display for Margin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Margin::Infinite => write!(f, "inf"),
            Margin::Finite(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub a: usize,
    pub b: usize,
    pub dist_x: String,
    /// `Σ_{g∈W} c_g ‖f(α_g a) − f(α_g b)‖∞`.
    pub separation: String,
    pub tower: usize,
    pub level: i64,
}

/// The reduction to one tower, replayed for a same-fiber pair whose
/// trajectory blocks agree on `W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub a: usize,
    pub b: usize,
    pub tower: usize,
    pub level: i64,
    /// `F_i(α_{-s} a) = F_i(α_{-s} b)`.
    pub tower_blocks_equal: bool,
    /// `d^α_{S_i}(α_{-s} a, α_{-s} b)`.
    pub dist_shape: String,
    pub dist_x: String,
    /// `dist_shape < ε` and `dist_x < η`.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCertificate {
    pub eta: String,
    pub epsilon: String,
    pub window: FiniteWindow,
    pub sample_seed: Option<u64>,
    pub sample_size: usize,
    pub exact_arithmetic: bool,
    /// `W ⊇ S_i − S_i` for every tower.
    pub window_covers_shapes: bool,
    /// Same-fiber pairs at `dist_X ≥ η`.
    pub qualifying_pairs: usize,
    pub violations: Vec<PairRecord>,
    /// The least separated qualifying pairs, smallest first.
    pub worst_pairs: Vec<PairRecord>,
    /// `(dist_X, separation)` of every qualifying pair, rounded to `f64` for
    /// plotting.
    pub separations: Vec<(f64, f64)>,
    pub tail: String,
    pub margin: Margin,
    pub per_tower_certified: Vec<bool>,
    pub eta_certified: bool,
    pub replay: Vec<ReplayRecord>,
    pub replay_ok: bool,
}

impl EmbeddingCertificate {
    pub fn certified(&self) -> bool {
        self.eta_certified && self.per_tower_certified.iter().all(|&b| b) && self.replay_ok
    }
}

/// How many of the worst pairs a certificate lists.
pub const WORST_PAIRS: usize = 10;

/// `Σ_{g∈W} c_g ‖a_g − b_g‖∞` for blocks indexed like `w`.
pub fn weighted_separation<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], w: &FiniteWindow, mc: &MetricConfig) -> T {
    a.iter().zip(b).zip(w.iter()).fold(T::zero(), |acc, ((u, v), g)| {
        let d = u.iter().zip(v).fold(T::zero(), |m, (p, q)| T::max_of(m, (p.clone() - q.clone()).abs()));
        acc + T::from_rational(&mc.c(g)) * d
    })
}

/// Same-fiber pairs `(a, b, dist_X)`, with `dist_X ≥ η` when `eta` is given.
fn fiber_pairs(points: &[ProductPoint], eta: Option<&Rational>, mc: &MetricConfig) -> Result<Vec<(usize, usize, Rational)>> {
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if points[a].y != points[b].y {
                continue;
            }
            let d = dist_x(&points[a], &points[b], mc)?;
            if eta.is_none_or(|e| d >= *e) {
                out.push((a, b, d));
            }
        }
    }
    Ok(out)
}

fn blocks<T: Scalar>(f: &GluedMap<T>, points: &[ProductPoint], w: &FiniteWindow) -> Result<Vec<Vec<Vec<T>>>> {
    points.par_iter().map(|x| trajectory_block(f, x, w)).collect()
}

fn margin_of<T: Scalar>(min_sep: Option<T>, tail: &Rational) -> Margin {
    match min_sep {
        None => Margin::Infinite,
        Some(s) => {
            let v = T::max_of(s.half() - T::from_rational(tail), T::zero());
            Margin::Finite(fmt_scalar(&v))
        }
    }
}

/// The finitized openness margin on a sample.
pub fn separation_margin<T: Scalar>(
    f: &GluedMap<T>,
    points: &[ProductPoint],
    eta: &Rational,
    mc: &MetricConfig,
    w: &FiniteWindow,
) -> Result<Margin> {
    let pairs = fiber_pairs(points, Some(eta), mc)?;
    if pairs.is_empty() {
        return Ok(Margin::Infinite);
    }
    let b = blocks(f, points, w)?;
    let min = pairs
        .iter()
        .map(|&(p, q, _)| weighted_separation(&b[p], &b[q], w, mc))
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v.clone(), |a| T::min_of(a, v))));
    Ok(margin_of(min, &mc.tail_outside(w)))
}

/// Checks that trajectory blocks over `W` separate every sampled same-fiber
/// pair at `dist_X ≥ η`, and replays the tower reduction on every
/// same-fiber pair whose blocks coincide. `per_tower_certified` is left
/// empty for the caller to fill in.
pub fn verify_eta_embedding<T: Scalar>(
    f: &GluedMap<T>,
    points: &[ProductPoint],
    eta: &Rational,
    epsilon: &Rational,
    w: &FiniteWindow,
    mc: &MetricConfig,
) -> Result<EmbeddingCertificate> {
    let window_covers_shapes = f.castle().shapes().all(|s| {
        s.iter().all(|a| s.iter().all(|b| w.contains(a - b)))
    });
    let b = blocks(f, points, w)?;
    let all_pairs = fiber_pairs(points, None, mc)?;
    let tail = mc.tail_outside(w);

    let mut qualifying = 0usize;
    let mut records: Vec<(T, PairRecord)> = Vec::new();
    let mut violations = Vec::new();
    let mut replay = Vec::new();
    let mut separations = Vec::new();
    for (p, q, d) in all_pairs {
        let (tower, level) = locate(f.castle(), &points[p])?;
        let sep = weighted_separation(&b[p], &b[q], w, mc);
        let equal = b[p] == b[q];
        if d >= *eta {
            qualifying += 1;
            let rec = PairRecord {
                a: p,
                b: q,
                dist_x: format_rational(&d),
                separation: fmt_scalar(&sep),
                tower,
                level,
            };
            if equal {
                violations.push(rec.clone());
            }
            separations.push((approx(&d), sep.as_f64()));
            records.push((sep, rec));
        }
        if equal {
            // Same fiber, hence same level; compare the base points.
            let map = &f.maps()[tower];
            let (zp, zq) = (act(&points[p], -level), act(&points[q], -level));
            let tower_blocks_equal = map.eval_block(&zp)? == map.eval_block(&zq)?;
            let ds = dyn_metric(&zp, &zq, &map.shape, mc)?;
            replay.push(ReplayRecord {
                a: p,
                b: q,
                tower,
                level,
                tower_blocks_equal,
                holds: ds < *epsilon && d < *eta,
                dist_shape: format_rational(&ds),
                dist_x: format_rational(&d),
            });
        }
    }
    records.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let min_sep = records.first().map(|(s, _)| s.clone());
    let worst_pairs = records.into_iter().take(WORST_PAIRS).map(|(_, r)| r).collect();
    let replay_ok = replay.iter().all(|r| !r.tower_blocks_equal || r.holds);
    Ok(EmbeddingCertificate {
        eta: format_rational(eta),
        epsilon: format_rational(epsilon),
        window: w.clone(),
        sample_seed: None,
        sample_size: points.len(),
        exact_arithmetic: T::EXACT,
        window_covers_shapes,
        qualifying_pairs: qualifying,
        eta_certified: violations.is_empty() && window_covers_shapes,
        violations,
        worst_pairs,
        separations,
        tail: format_rational(&tail),
        margin: margin_of(min_sep, &tail),
        per_tower_certified: Vec::new(),
        replay,
        replay_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::castle::{odometer_castle, pullback};
    use crate::embedding::basemap::{BaseMap, BaseMapSpec};
    use crate::embedding::block::{perturbation_features, Perturbation, TowerBlockMap};
    use crate::scalar::{int, ratio};
    use crate::systems::{CubeSeqPoint, OdometerPoint};

    fn glued(spec: BaseMapSpec) -> GluedMap<Rational> {
        let castle = pullback(&odometer_castle(1).unwrap());
        let shape = castle.towers[0].shape.clone();
        let base = BaseMap::new(spec, 1).unwrap();
        let p = Perturbation::zero(perturbation_features(&shape, 1, 0).unwrap(), 2, 1);
        GluedMap::new(castle, vec![TowerBlockMap::new(0, shape, base, p).unwrap()]).unwrap()
    }

    fn point(v: Rational) -> ProductPoint {
        ProductPoint::new(OdometerPoint::zero(), CubeSeqPoint::zero(1).unwrap().with(0, vec![v]).unwrap())
    }

    #[test]
    fn single_point_is_vacuous() {
        let f = glued(BaseMapSpec::standard(1, 1));
        let w = FiniteWindow::interval(-2, 2);
        let mc = MetricConfig::default();
        let c = verify_eta_embedding(&f, &[point(int(0))], &ratio(1, 16), &ratio(1, 16), &w, &mc).unwrap();
        assert!(c.eta_certified && c.replay_ok);
        assert_eq!(c.qualifying_pairs, 0);
        assert_eq!(c.margin, Margin::Infinite);
    }

    #[test]
    fn constant_map_separates_nothing() {
        let f = glued(BaseMapSpec::constant(1, ratio(1, 2)));
        let pts = [point(int(0)), point(ratio(1, 2)), point(int(1))];
        let w = FiniteWindow::interval(-2, 2);
        let mc = MetricConfig::default();
        let c = verify_eta_embedding(&f, &pts, &ratio(1, 16), &ratio(1, 16), &w, &mc).unwrap();
        assert_eq!(c.qualifying_pairs, 3);
        assert_eq!(c.violations.len(), 3);
        assert!(!c.eta_certified);
        // The reduction cannot hold: the base points are far apart.
        assert!(!c.replay_ok);
        assert_eq!(c.margin, Margin::Finite("0".into()));
    }

    #[test]
    fn margin_of_one_differing_term() {
        // f = u_0 exactly: the pair differs only at g = 0, by 1.
        let spec = BaseMapSpec {
            outputs: vec![crate::embedding::basemap::OutputSpec {
                offset: int(0),
                terms: vec![crate::embedding::basemap::Term {
                    feature: crate::embedding::basemap::Feature::Entry { n: 0, coord: 0 },
                    coef: int(1),
                }],
            }],
        };
        let f = glued(spec);
        let pts = [point(int(0)), point(int(1))];
        let w = FiniteWindow::interval(-3, 3);
        let mc = MetricConfig::default();
        let tail = mc.tail_outside(&w);
        let expected = ratio(1, 3) / int(2) - &tail;
        assert_eq!(separation_margin(&f, &pts, &ratio(1, 16), &mc, &w).unwrap(), Margin::Finite(format_rational(&expected)));
        let c = verify_eta_embedding(&f, &pts, &ratio(1, 16), &ratio(1, 16), &w, &mc).unwrap();
        assert_eq!(c.worst_pairs[0].separation, "1/3");
        assert!(c.eta_certified);
        assert!(c.margin.is_positive());
    }

    #[test]
    fn window_must_cover_shape_differences() {
        let f = glued(BaseMapSpec::standard(1, 1));
        let mc = MetricConfig::default();
        let c = verify_eta_embedding(&f, &[point(int(0))], &ratio(1, 16), &ratio(1, 16), &FiniteWindow::singleton(0), &mc).unwrap();
        assert!(!c.window_covers_shapes);
        assert!(!c.eta_certified);
    }
}
