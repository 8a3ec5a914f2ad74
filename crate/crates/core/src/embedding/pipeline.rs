//! Calibrate ε, build and verify the castle, search a block map per tower,
//! glue, and certify.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::castle::{locate, odometer_castle, pullback, verify_castle, Castle, CastleReport, VerifyMode};
use crate::embedding::basemap::{calibrate_epsilon, BaseMap, BaseMapSpec};
use crate::embedding::block::{perturb_search, Perturbation, SearchSettings};
use crate::embedding::certify::{verify_eta_embedding, EmbeddingCertificate};
use crate::embedding::coding::{compose_final, DigitCoding, FinalCoding, ResidueCoding, SymbolCoding};
use crate::embedding::glue::GluedMap;
use crate::embedding::{fmt_scalar, Evaluate};
use crate::error::Error;
use crate::scalar::{dyadic_floor_exponent, format_rational, int, pow2_neg, ratio, serde_rational, Rational, Scalar};
use crate::systems::{act, dist_x, sample_points, MetricConfig, ProductPoint, SampleSpec};
use crate::widim::{lebesgue_lower_bound, reduce_to_cube, widim_greedy};
use crate::window::{FiniteWindow, InvarianceParams};

fn default_k_window() -> FiniteWindow {
    FiniteWindow::interval(-1, 1)
}

fn default_gamma() -> Rational {
    ratio(1, 8)
}

fn default_max_tries() -> u32 {
    10
}

fn default_support_radius() -> i64 {
    6
}

fn default_digit_budget() -> usize {
    8
}

fn default_fiber_size() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Cube dimension of `X = Y × ([0,1]^k)^ℤ`.
    pub k: usize,
    #[serde(default)]
    pub metric: MetricConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CastleConfig {
    /// Odometer castle level `n`: one tower of height `2^n`.
    pub level: u32,
    /// Invariance set `K`.
    #[serde(default = "default_k_window")]
    pub k: FiniteWindow,
    #[serde(with = "serde_rational", default = "default_gamma")]
    pub gamma: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub count: usize,
    /// Defaults to the master seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_support_radius")]
    pub support_radius: i64,
    #[serde(default = "default_digit_budget")]
    pub digit_budget: usize,
    #[serde(default = "default_fiber_size")]
    pub fiber_size: usize,
    #[serde(default)]
    pub orbit_radius: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum CodingConfig {
    /// `id × ψ̄` into `([0,1]^{m+1})^ℤ`.
    #[default]
    Cantor,
    /// Symbol `y_0 + 1` interleaved into the last coordinate.
    Digit,
    /// Symbol `1 + (y mod 2^digits)` interleaved into the last coordinate.
    Residue { digits: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    pub system: SystemConfig,
    /// Target cube dimension.
    pub m: usize,
    #[serde(with = "serde_rational")]
    pub eta: Rational,
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    pub castle: CastleConfig,
    pub sample: SampleConfig,
    pub seed: u64,
    /// Certification window; defaults to `∪ (S_i − S_i)`.
    #[serde(default)]
    pub window: Option<FiniteWindow>,
    #[serde(default = "default_max_tries")]
    pub max_tries: u32,
    /// Defaults to [`BaseMapSpec::standard`].
    #[serde(default)]
    pub base_map: Option<BaseMapSpec>,
    /// Cube entries within this distance of a shape enter the perturbation.
    /// Defaults to the largest `d` with `2^{-d} ≥ ε`, which makes every pair
    /// at `d^α_S`-distance ≥ ε differ in some feature.
    #[serde(default)]
    pub feature_radius: Option<i64>,
    #[serde(default)]
    pub coding: CodingConfig,
    /// Read by the command line front-end only.
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl EmbedConfig {
    /// The shipped demonstration: `k = 1`, `m = 3`, `η = 1/16`, `δ = 1/8`,
    /// castle level 4, 200 points.
    pub fn demo() -> Self {
        EmbedConfig {
            system: SystemConfig { k: 1, metric: MetricConfig::default() },
            m: 3,
            eta: ratio(1, 16),
            delta: ratio(1, 8),
            castle: CastleConfig { level: 4, k: default_k_window(), gamma: default_gamma() },
            sample: SampleConfig {
                count: 200,
                seed: None,
                support_radius: default_support_radius(),
                digit_budget: default_digit_budget(),
                fiber_size: default_fiber_size(),
                orbit_radius: None,
            },
            seed: 20240601,
            window: Some(FiniteWindow::interval(-24, 24)),
            max_tries: default_max_tries(),
            base_map: None,
            feature_radius: None,
            coding: CodingConfig::Cantor,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let positive = |r: &Rational| *r > int(0);
        if self.system.k == 0 || self.m == 0 {
            return Err(Error::InvalidArgument("k and m must be ≥ 1".into()));
        }
        if !positive(&self.eta) || !positive(&self.delta) {
            return Err(Error::InvalidArgument("eta and delta must be positive".into()));
        }
        if !positive(&self.castle.gamma) {
            return Err(Error::InvalidArgument("castle gamma must be positive".into()));
        }
        if self.feature_radius.is_some_and(|r| r < 0) {
            return Err(Error::InvalidArgument("feature_radius must be ≥ 0".into()));
        }
        MetricConfig::new(self.system.metric.c_ratio.clone())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Calibrate,
    Castle,
    Sample,
    Hypothesis,
    Perturb,
    Glue,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        write!(f, "{s}")
    }
}

/// A failed stage. `report` is present when the run got far enough to
/// produce one; `certification` separates a failed certificate from an
/// operational error.
#[derive(Clone, Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
    pub witness: Vec<(usize, usize)>,
    pub certification: bool,
    pub report: Option<Box<PipelineReport>>,
}

impl PipelineError {
    fn op(stage: Stage, e: impl fmt::Display) -> Self {
        PipelineError { stage, message: e.to_string(), witness: Vec::new(), certification: false, report: None }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.message)?;
        if let Some((a, b)) = self.witness.first() {
            write!(f, " (witness pair {a}, {b})")?;
        }
        Ok(())
    }
}

impl std::error::Error for PipelineError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    /// The greedy bound is already below the threshold.
    Satisfied,
    /// Only the upper bound misses the threshold.
    Inconclusive,
    /// Even the lower bound reaches the threshold.
    Violated,
}

/// `widim_ε(X, d^α_S) < |S|·m/2`, bracketed by the Lebesgue lower bound and
/// the greedy upper bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub lower: usize,
    pub upper: usize,
    pub threshold: String,
    pub status: HypothesisStatus,
}

pub fn hypothesis_check(
    shape: &FiniteWindow,
    eps: &Rational,
    k: usize,
    m: usize,
    mc: &MetricConfig,
) -> Result<HypothesisCheck, Error> {
    let cube = reduce_to_cube::<Rational>(shape, eps, k, mc)?;
    let upper = widim_greedy(&cube, eps).value;
    let lower = lebesgue_lower_bound(&cube, eps);
    // Compare 2·widim with |S|·m to stay in integers.
    let twice = (shape.len() * m) as u128;
    let status = if 2 * (upper as u128) < twice {
        HypothesisStatus::Satisfied
    } else if 2 * (lower as u128) >= twice {
        HypothesisStatus::Violated
    } else {
        HypothesisStatus::Inconclusive
    };
    Ok(HypothesisCheck { lower, upper, threshold: format_rational(&ratio((shape.len() * m) as i64, 2)), status })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub tower: usize,
    pub shape: FiniteWindow,
    pub base_points: usize,
    pub hypothesis: HypothesisCheck,
    pub certified: bool,
    pub tries: u32,
    pub qualifying_pairs: usize,
    pub s_min: Option<String>,
    pub deviation: Option<String>,
    pub violating: Vec<(usize, usize)>,
    pub perturbation: Perturbation,
}

/// Checks (a)–(e) of a run plus the replayed reduction and the composed map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    /// (a) every tower's block map separates its sampled base points.
    pub per_tower_embedding: bool,
    /// (b) `f(α_s z) = F_i(z)(s)` on every sampled base point.
    pub gluing_identity: bool,
    /// (c) `max ‖f − f⁰‖∞` on the sample, and whether it is below δ.
    pub max_deviation: String,
    pub deviation_below_delta: bool,
    /// (d) trajectory blocks separate every same-fiber η-separated pair.
    pub eta_separation: bool,
    /// (e) the tail-corrected margin is positive.
    pub margin_positive: bool,
    pub replay: bool,
    pub composed_separates: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.per_tower_embedding
            && self.gluing_identity
            && self.deviation_below_delta
            && self.eta_separation
            && self.margin_positive
            && self.replay
            && self.composed_separates
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: EmbedConfig,
    pub epsilon: String,
    pub modulus: String,
    pub castle: Castle,
    pub castle_check: CastleReport,
    pub window: FiniteWindow,
    pub sample_size: usize,
    pub eta_fiber_pairs: usize,
    pub towers: Vec<TowerReport>,
    pub checks: Option<Checks>,
    pub certificate: Option<EmbeddingCertificate>,
    pub certified: bool,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "embedding run: k={} m={} eta={} delta={} seed={}", c.system.k, c.m, format_rational(&c.eta), format_rational(&c.delta), c.seed);
        let _ = writeln!(s, "calibrated epsilon = {} (modulus L = {})", self.epsilon, self.modulus);
        let _ = writeln!(
            s,
            "castle: level {}, {} tower(s), {} levels; disjoint={} covering={} invariant={}",
            c.castle.level,
            self.castle.len(),
            self.castle.level_count(),
            self.castle_check.disjoint,
            self.castle_check.covering,
            self.castle_check.invariant
        );
        let _ = writeln!(s, "sample: {} points, {} same-fiber pairs at dist >= eta; window {}", self.sample_size, self.eta_fiber_pairs, self.window);
        for t in &self.towers {
            let _ = writeln!(
                s,
                "tower {}: |S|={} base points={} hypothesis widim in [{}, {}] vs {} -> {:?}; {} after {} tries, {} pairs, s_min={}",
                t.tower,
                t.shape.len(),
                t.base_points,
                t.hypothesis.lower,
                t.hypothesis.upper,
                t.hypothesis.threshold,
                t.hypothesis.status,
                if t.certified { "certified" } else { "FAILED" },
                t.tries,
                t.qualifying_pairs,
                t.s_min.as_deref().unwrap_or("none")
            );
        }
        if let Some(ch) = &self.checks {
            let line = |s: &mut String, name: &str, ok: bool| {
                let _ = writeln!(s, "  [{}] {name}", if ok { "pass" } else { "FAIL" });
            };
            let _ = writeln!(s, "checks:");
            line(&mut s, "(a) per-tower epsilon-embedding on sample", ch.per_tower_embedding);
            line(&mut s, "(b) gluing identity", ch.gluing_identity);
            line(&mut s, &format!("(c) |f - f0| = {} < delta", ch.max_deviation), ch.deviation_below_delta);
            line(&mut s, "(d) eta-separation of same-fiber pairs", ch.eta_separation);
            line(&mut s, "(e) separation margin > 0", ch.margin_positive);
            line(&mut s, "reduction replay", ch.replay);
            line(&mut s, "composed map separates certified pairs", ch.composed_separates);
        }
        if let Some(cert) = &self.certificate {
            let _ = writeln!(
                s,
                "margin = {} (tail {}), {} qualifying pairs, {} violations, {} replays",
                cert.margin,
                cert.tail,
                cert.qualifying_pairs,
                cert.violations.len(),
                cert.replay.len()
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "result: {}", if self.certified { "CERTIFIED" } else { "NOT CERTIFIED" });
        s
    }
}

/// A certified run.
#[derive(Clone, Debug)]
pub struct PipelineRun<T> {
    pub map: GluedMap<T>,
    pub report: PipelineReport,
}

fn index_pairs_with<F: Fn(usize, usize) -> bool>(n: usize, keep: F) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| keep(a, b)).collect()
}

/// Runs every stage in order. Deterministic for a fixed config.
pub fn run_pipeline<T: Scalar>(cfg: &EmbedConfig) -> Result<PipelineRun<T>, PipelineError> {
    use Stage::*;
    cfg.validate().map_err(|e| PipelineError::op(Config, e))?;
    let k = cfg.system.k;
    let mc = &cfg.system.metric;

    let spec = cfg.base_map.clone().unwrap_or_else(|| BaseMapSpec::standard(k, cfg.m));
    let base: BaseMap<T> = BaseMap::new(spec, k).map_err(|e| PipelineError::op(Calibrate, e))?;
    if base.m() != cfg.m {
        return Err(PipelineError::op(Calibrate, format!("base map has {} outputs, expected m = {}", base.m(), cfg.m)));
    }
    let eps = calibrate_epsilon(&base, &cfg.eta, &cfg.delta).map_err(|e| PipelineError::op(Calibrate, e))?;

    let castle = pullback(&odometer_castle(cfg.castle.level).map_err(|e| PipelineError::op(Castle, e))?);
    let params = InvarianceParams::new(cfg.castle.k.clone(), cfg.castle.gamma.clone())
        .map_err(|e| PipelineError::op(Castle, e))?;
    let castle_check = verify_castle(&castle, VerifyMode::Exact, &params).map_err(|e| PipelineError::op(Castle, e))?;
    let mut warnings = Vec::new();
    if !castle_check.disjoint || !castle_check.covering {
        return Err(PipelineError::op(Castle, castle_check.failures.join("; ")));
    }
    if !castle_check.invariant {
        warnings.push(format!("castle shapes are not ({},{})-invariant", cfg.castle.k, format_rational(&cfg.castle.gamma)));
    }

    let window = cfg.window.clone().unwrap_or_else(|| {
        castle.shapes().fold(FiniteWindow::empty(), |acc, s| acc.union(&s.difference_set()))
    });

    let sample_spec = SampleSpec {
        k,
        seed: cfg.sample.seed.unwrap_or(cfg.seed),
        count: cfg.sample.count,
        support_radius: cfg.sample.support_radius,
        digit_budget: cfg.sample.digit_budget,
        eta: cfg.eta.clone(),
        fiber_size: cfg.sample.fiber_size,
        orbit_radius: cfg.sample.orbit_radius,
    };
    let sample = sample_points(&sample_spec).map_err(|e| PipelineError::op(Sample, e))?;
    let points = &sample.points;
    let mut located = Vec::with_capacity(points.len());
    for x in points {
        located.push(locate(&castle, x).map_err(|e| PipelineError::op(Sample, e))?);
    }
    let eta_fiber_pairs = {
        let mut n = 0;
        for (a, b) in index_pairs_with(points.len(), |a, b| points[a].y == points[b].y) {
            if dist_x(&points[a], &points[b], mc).map_err(|e| PipelineError::op(Sample, e))? >= cfg.eta {
                n += 1;
            }
        }
        n
    };

    // Base points of each tower: α_{-s} x for the sampled x in level (i, s).
    let mut bases: Vec<Vec<ProductPoint>> = vec![Vec::new(); castle.len()];
    let mut seen: Vec<HashMap<ProductPoint, usize>> = vec![HashMap::new(); castle.len()];
    for (x, &(i, s)) in points.iter().zip(&located) {
        let z = act(x, -s);
        if !seen[i].contains_key(&z) {
            seen[i].insert(z.clone(), bases[i].len());
            bases[i].push(z);
        }
    }

    let mut towers = Vec::with_capacity(castle.len());
    let mut maps = Vec::with_capacity(castle.len());
    let mut failure: Option<(usize, Vec<(usize, usize)>, String)> = None;
    let radius = cfg.feature_radius.unwrap_or_else(|| {
        let j = dyadic_floor_exponent(&eps);
        if pow2_neg(j) == eps { j as i64 } else { j as i64 - 1 }
    });
    let settings = SearchSettings {
        epsilon: &eps,
        delta: &cfg.delta,
        seed: cfg.seed,
        max_tries: cfg.max_tries,
        radius,
        k,
        mc,
    };
    for (i, tower) in castle.towers.iter().enumerate() {
        let hypothesis =
            hypothesis_check(&tower.shape, &eps, k, cfg.m, mc).map_err(|e| PipelineError::op(Hypothesis, e))?;
        match hypothesis.status {
            HypothesisStatus::Satisfied => {}
            HypothesisStatus::Inconclusive => warnings.push(format!(
                "tower {i}: hypothesis widim < |S|m/2 = {} not established (bounds {}..{})",
                hypothesis.threshold, hypothesis.lower, hypothesis.upper
            )),
            HypothesisStatus::Violated => warnings.push(format!(
                "tower {i}: hypothesis widim < |S|m/2 = {} is violated (widim >= {})",
                hypothesis.threshold, hypothesis.lower
            )),
        }
        let outcome = perturb_search(&base, i, &tower.shape, &bases[i], &settings)
            .map_err(|e| PipelineError::op(Perturb, e))?;
        let report = match outcome {
            Ok(found) => {
                let r = TowerReport {
                    tower: i,
                    shape: tower.shape.clone(),
                    base_points: bases[i].len(),
                    hypothesis,
                    certified: true,
                    tries: found.tries,
                    qualifying_pairs: found.qualifying_pairs,
                    s_min: found.s_min.as_ref().map(fmt_scalar),
                    deviation: Some(fmt_scalar(&found.deviation)),
                    violating: Vec::new(),
                    perturbation: found.map.perturbation.clone(),
                };
                maps.push(found.map);
                r
            }
            Err(fail) => {
                if failure.is_none() {
                    failure = Some((i, fail.violating.clone(), fail.to_string()));
                }
                let r = TowerReport {
                    tower: i,
                    shape: tower.shape.clone(),
                    base_points: bases[i].len(),
                    hypothesis,
                    certified: false,
                    tries: fail.tries,
                    qualifying_pairs: 0,
                    s_min: None,
                    deviation: None,
                    violating: fail.violating.clone(),
                    perturbation: fail.best.perturbation.clone(),
                };
                maps.push(fail.best);
                r
            }
        };
        towers.push(report);
    }

    let mut report = PipelineReport {
        config: cfg.clone(),
        epsilon: format_rational(&eps),
        modulus: format_rational(&base.modulus()),
        castle: castle.clone(),
        castle_check,
        window: window.clone(),
        sample_size: points.len(),
        eta_fiber_pairs,
        towers,
        checks: None,
        certificate: None,
        certified: false,
        warnings,
    };
    if let Some((_, witness, message)) = failure {
        return Err(PipelineError {
            stage: Perturb,
            message,
            witness,
            certification: true,
            report: Some(Box::new(report)),
        });
    }

    let f = GluedMap::new(castle, maps).map_err(|e| PipelineError::op(Glue, e))?;
    let glue_err = |e: Error| PipelineError::op(Glue, e);

    // (b) gluing identity on every sampled base point and level.
    let mut gluing_identity = true;
    for (i, zs) in bases.iter().enumerate() {
        let map = &f.maps()[i];
        for z in zs {
            let block = map.eval_block(z).map_err(glue_err)?;
            for (s, want) in map.shape.iter().zip(&block) {
                if f.eval(&act(z, s)).map_err(glue_err)? != *want {
                    gluing_identity = false;
                }
            }
        }
    }

    // (c) ‖f − f⁰‖∞ on the sample.
    let mut max_dev = T::zero();
    for x in points {
        let a = f.eval(x).map_err(glue_err)?;
        let b = base.eval(x).map_err(glue_err)?;
        for (p, q) in a.iter().zip(&b) {
            max_dev = T::max_of(max_dev, (p.clone() - q.clone()).abs());
        }
    }
    let deviation_below_delta = max_dev < T::from_rational(&cfg.delta);

    let mut cert = verify_eta_embedding(&f, points, &cfg.eta, &eps, &window, mc)
        .map_err(|e| PipelineError::op(Verify, e))?;
    cert.sample_seed = Some(sample_spec.seed);
    cert.per_tower_certified = report.towers.iter().map(|t| t.certified).collect();

    // The composed map must keep every certified pair apart.
    let symbolic: Option<Box<dyn SymbolCoding>> = match &cfg.coding {
        CodingConfig::Cantor => None,
        CodingConfig::Digit => Some(Box::new(DigitCoding)),
        CodingConfig::Residue { digits } => Some(Box::new(ResidueCoding { digits: *digits })),
    };
    let coding = match &symbolic {
        None => FinalCoding::Cantor,
        Some(c) => FinalCoding::Symbolic(Some(c.as_ref())),
    };
    let mut composed_separates = true;
    let mut composed: HashMap<usize, Vec<Vec<T>>> = HashMap::new();
    for (a, b) in index_pairs_with(points.len(), |a, b| points[a].y == points[b].y) {
        if dist_x(&points[a], &points[b], mc).map_err(|e| PipelineError::op(Verify, e))? < cfg.eta {
            continue;
        }
        for i in [a, b] {
            if let std::collections::hash_map::Entry::Vacant(e) = composed.entry(i) {
                let v = compose_final(&f, &coding, &points[i], &window).map_err(|e| PipelineError::op(Verify, e))?;
                e.insert(v);
            }
        }
        if composed[&a] == composed[&b] {
            composed_separates = false;
        }
    }

    let checks = Checks {
        per_tower_embedding: cert.per_tower_certified.iter().all(|&c| c),
        gluing_identity,
        max_deviation: fmt_scalar(&max_dev),
        deviation_below_delta,
        eta_separation: cert.eta_certified,
        margin_positive: cert.margin.is_positive(),
        replay: cert.replay_ok,
        composed_separates,
    };
    report.certified = checks.all();
    let witness: Vec<(usize, usize)> = cert.violations.iter().map(|p| (p.a, p.b)).collect();
    report.checks = Some(checks);
    report.certificate = Some(cert);
    if !report.certified {
        let ch = report.checks.as_ref().expect("set above");
        let message = [
            (!ch.gluing_identity, "gluing identity fails"),
            (!ch.deviation_below_delta, "deviation from f0 reaches delta"),
            (!ch.eta_separation, "some same-fiber eta-separated pair is not separated"),
            (!ch.margin_positive, "separation margin is not positive"),
            (!ch.replay, "reduction replay fails"),
            (!ch.composed_separates, "composed map identifies a certified pair"),
        ]
        .iter()
        .filter(|(bad, _)| *bad)
        .map(|(_, m)| *m)
        .collect::<Vec<_>>()
        .join("; ");
        return Err(PipelineError { stage: Verify, message, witness, certification: true, report: Some(Box::new(report)) });
    }
    Ok(PipelineRun { map: f, report })
}
