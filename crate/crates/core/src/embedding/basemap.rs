//! The continuous base map `f₀: X → [0,1]^m`, its modulus, and the block
//! maps `F⁰(x) = (f₀(α_s x))_{s∈S}`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::embedding::coding::cantor_code;
use crate::embedding::Evaluate;
use crate::error::{Error, Result};
use crate::scalar::{dyadic_floor_exponent, int, pow2_neg, ratio, Rational, Scalar};
use crate::systems::{act, ProductPoint};
use crate::window::FiniteWindow;

/// A coordinate functional of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// `ψ(y)`.
    Psi,
    /// Coordinate `coord` of the cube entry `u_n`.
    Entry { n: i64, coord: usize },
}

impl Feature {
    pub fn value(&self, x: &ProductPoint) -> Rational {
        match *self {
            Feature::Psi => cantor_code(&x.y),
            Feature::Entry { n, coord } => x.u.coord(n, coord),
        }
    }

    /// Lipschitz constant with respect to `dist_X`: `ψ` contracts the
    /// odometer metric (`|Δψ| ≤ 3^{-n} ≤ 2^{-n}`), and `|Δu_n| ≤ 2^{|n|} dist_X`.
    pub fn lipschitz(&self) -> Rational {
        match *self {
            Feature::Psi => int(1),
            Feature::Entry { n, .. } => pow2_neg(n.unsigned_abs()).recip(),
        }
    }
}

pub fn feature_vector(features: &[Feature], x: &ProductPoint) -> Vec<Rational> {
    features.iter().map(|f| f.value(x)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub feature: Feature,
    #[serde(with = "crate::scalar::serde_rational")]
    pub coef: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(with = "crate::scalar::serde_rational")]
    pub offset: Rational,
    #[serde(default)]
    pub terms: Vec<Term>,
}

/// Exact description of an affine-then-clamp base map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseMapSpec {
    pub outputs: Vec<OutputSpec>,
}

impl BaseMapSpec {
    /// `f₀_j(x) = 1/4 + u_0^{(j mod k)} / 2`.
    pub fn standard(k: usize, m: usize) -> Self {
        BaseMapSpec {
            outputs: (0..m)
                .map(|j| OutputSpec {
                    offset: ratio(1, 4),
                    terms: vec![Term { feature: Feature::Entry { n: 0, coord: j % k.max(1) }, coef: ratio(1, 2) }],
                })
                .collect(),
        }
    }

    pub fn constant(m: usize, c: Rational) -> Self {
        BaseMapSpec { outputs: (0..m).map(|_| OutputSpec { offset: c.clone(), terms: vec![] }).collect() }
    }
}

/// `f₀(x)_j = clamp(b_j + Σ_i a_{ji} φ_i(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseMap<T> {
    spec: BaseMapSpec,
    features: Vec<Feature>,
    offsets: Vec<T>,
    /// `m × features` coefficient matrix.
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> BaseMap<T> {
    pub fn new(spec: BaseMapSpec, k: usize) -> Result<Self> {
        if spec.outputs.is_empty() {
            return Err(Error::InvalidArgument("base map needs at least one output".into()));
        }
        let mut features: Vec<Feature> = Vec::new();
        for t in spec.outputs.iter().flat_map(|o| &o.terms) {
            if let Feature::Entry { coord, .. } = t.feature {
                if coord >= k {
                    return Err(Error::DimensionMismatch { expected: k, found: coord + 1 });
                }
            }
            if !features.contains(&t.feature) {
                features.push(t.feature);
            }
        }
        let offsets = spec.outputs.iter().map(|o| T::from_rational(&o.offset)).collect();
        let coeffs = spec
            .outputs
            .iter()
            .map(|o| {
                let mut row = vec![T::zero(); features.len()];
                for t in &o.terms {
                    let i = features.iter().position(|f| *f == t.feature).expect("collected above");
                    row[i] = row[i].clone() + T::from_rational(&t.coef);
                }
                row
            })
            .collect();
        Ok(BaseMap { spec, features, offsets, coeffs })
    }

    pub fn spec(&self) -> &BaseMapSpec {
        &self.spec
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    /// Largest `|n|` among the entry features.
    pub fn radius(&self) -> i64 {
        self.features
            .iter()
            .map(|f| match f {
                Feature::Psi => 0,
                Feature::Entry { n, .. } => n.abs(),
            })
            .max()
            .unwrap_or(0)
    }

    /// `L = max_j Σ_i |a_{ji}| · lip(φ_i)`, so `‖f₀(x) − f₀(y)‖∞ ≤ L · dist_X(x, y)`.
    pub fn modulus(&self) -> Rational {
        self.spec
            .outputs
            .iter()
            .map(|o| o.terms.iter().map(|t| t.coef.abs() * t.feature.lipschitz()).sum::<Rational>())
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }

    /// Evaluation before clamping.
    pub fn raw(&self, x: &ProductPoint) -> Vec<T> {
        let phi: Vec<T> = self.features.iter().map(|f| T::from_rational(&f.value(x))).collect();
        self.offsets
            .iter()
            .zip(&self.coeffs)
            .map(|(b, row)| row.iter().zip(&phi).fold(b.clone(), |acc, (a, v)| acc + a.clone() * v.clone()))
            .collect()
    }
}

impl<T: Scalar> Evaluate<T> for BaseMap<T> {
    fn m(&self) -> usize {
        self.offsets.len()
    }

    fn eval(&self, x: &ProductPoint) -> Result<Vec<T>> {
        Ok(self.raw(x).into_iter().map(T::clamp01).collect())
    }
}

/// The largest `ε = 2^{-j} ≤ min(η, δ/L)`. Then `dist_X(x,y) < ε` implies
/// `‖f₀(x) − f₀(y)‖∞ ≤ L·dist_X < δ` on all of `X`.
pub fn calibrate_epsilon<T: Scalar>(f0: &BaseMap<T>, eta: &Rational, delta: &Rational) -> Result<Rational> {
    if !eta.is_positive() || !delta.is_positive() {
        return Err(Error::InvalidArgument("eta and delta must be positive".into()));
    }
    let l = f0.modulus();
    let bound = if l.is_zero() {
        eta.clone()
    } else {
        let d = delta / &l;
        if d < *eta { d } else { eta.clone() }
    };
    Ok(pow2_neg(dyadic_floor_exponent(&bound)))
}

/// `F⁰(x) = (f₀(α_s x))_{s∈S}`.
pub fn block_map_f0<T: Scalar>(base: &BaseMap<T>, shape: &FiniteWindow, x: &ProductPoint) -> Result<Vec<Vec<T>>> {
    shape.iter().map(|s| base.eval(&act(x, s))).collect()
}

/// `max_{s,j} |a_{s,j} − b_{s,j}|`.
pub fn block_distance<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> T {
    a.iter()
        .zip(b)
        .flat_map(|(u, v)| u.iter().zip(v))
        .fold(T::zero(), |acc, (p, q)| T::max_of(acc, (p.clone() - q.clone()).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{dyn_metric, sample_points, CubeSeqPoint, MetricConfig, OdometerPoint, SampleSpec};

    #[test]
    fn calibration_examples() {
        let constant: BaseMap<Rational> = BaseMap::new(BaseMapSpec::constant(2, ratio(1, 2)), 1).unwrap();
        assert_eq!(constant.modulus(), int(0));
        assert_eq!(calibrate_epsilon(&constant, &ratio(1, 8), &ratio(1, 8)).unwrap(), ratio(1, 8));

        // Weight 1 on u_2: L = 4.
        let spec = BaseMapSpec {
            outputs: vec![OutputSpec {
                offset: int(0),
                terms: vec![Term { feature: Feature::Entry { n: 2, coord: 0 }, coef: int(1) }],
            }],
        };
        let f: BaseMap<Rational> = BaseMap::new(spec, 1).unwrap();
        assert_eq!(f.modulus(), int(4));
        assert_eq!(calibrate_epsilon(&f, &int(1), &ratio(1, 4)).unwrap(), ratio(1, 16));
        assert_eq!(calibrate_epsilon(&f, &ratio(1, 32), &int(1)).unwrap(), ratio(1, 32));

        let std: BaseMap<Rational> = BaseMap::new(BaseMapSpec::standard(1, 3), 1).unwrap();
        assert_eq!(std.modulus(), ratio(1, 2));
        assert_eq!(calibrate_epsilon(&std, &ratio(1, 16), &ratio(1, 8)).unwrap(), ratio(1, 16));
    }

    #[test]
    fn rejects_bad_coordinates() {
        assert!(BaseMap::<Rational>::new(BaseMapSpec::standard(2, 2), 1).is_err());
        assert!(BaseMap::<Rational>::new(BaseMapSpec { outputs: vec![] }, 1).is_err());
    }

    #[test]
    fn clamps_into_the_cube() {
        let spec = BaseMapSpec {
            outputs: vec![OutputSpec { offset: int(2), terms: vec![Term { feature: Feature::Psi, coef: int(-5) }] }],
        };
        let f: BaseMap<Rational> = BaseMap::new(spec, 1).unwrap();
        let x0 = ProductPoint::new(OdometerPoint::zero(), CubeSeqPoint::zero(1).unwrap());
        assert_eq!(f.eval(&x0).unwrap(), vec![int(1)]);
        let x1 = ProductPoint::new(OdometerPoint::parse("", "1").unwrap(), CubeSeqPoint::zero(1).unwrap());
        assert_eq!(f.eval(&x1).unwrap(), vec![int(0)]);
    }

    #[test]
    fn block_map_basics() {
        let f: BaseMap<Rational> = BaseMap::new(BaseMapSpec::standard(1, 2), 1).unwrap();
        let s = sample_points(&SampleSpec::new(1, 5, 40)).unwrap();
        let x = &s.points[0];
        assert_eq!(block_map_f0(&f, &FiniteWindow::singleton(0), x).unwrap(), vec![f.eval(x).unwrap()]);
        let a = block_map_f0(&f, &FiniteWindow::interval(0, 3), x).unwrap();
        assert_eq!(block_distance(&a, &a), int(0));
    }

    #[test]
    fn lifted_modulus_holds_on_sample() {
        let f: BaseMap<Rational> = BaseMap::new(BaseMapSpec::standard(1, 3), 1).unwrap();
        let (eta, delta) = (ratio(1, 16), ratio(1, 8));
        let eps = calibrate_epsilon(&f, &eta, &delta).unwrap();
        let shape = FiniteWindow::interval(0, 7);
        let mc = MetricConfig::default();
        let s = sample_points(&SampleSpec::new(1, 11, 80)).unwrap();
        let blocks: Vec<_> = s.points.iter().map(|x| block_map_f0(&f, &shape, x).unwrap()).collect();
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                if dyn_metric(&s.points[a], &s.points[b], &shape, &mc).unwrap() < eps {
                    assert!(block_distance(&blocks[a], &blocks[b]) < delta);
                }
            }
        }
    }
}
