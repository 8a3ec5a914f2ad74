//! Weighted cubes and the reduction of `(X, d^α_F)` to one.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ceil_log2_inv, dyadic_floor_exponent, format_rational, pow2_neg, Rational, Scalar};
use crate::systems::MetricConfig;
use crate::window::FiniteWindow;

/// Cube-factor coordinate realised by an axis: entry `n`, coordinate `coord`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisLabel {
    pub n: i64,
    pub coord: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub window: FiniteWindow,
    pub epsilon: String,
    /// Odometer digits resolved at scale ε; they refine a clopen partition
    /// into `2^digits` pieces and add no axis.
    pub y_partition_digits: u64,
}

/// `[0,1]^d` with the metric `max_i w_i |x_i − y_i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedCube<T> {
    weights: Vec<T>,
    labels: Vec<AxisLabel>,
    provenance: Option<Provenance>,
}

impl<T: Scalar> WeightedCube<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| *w <= T::zero() || *w > T::one()) {
            return Err(Error::InvalidArgument("axis weights must lie in (0,1]".into()));
        }
        let labels = (0..weights.len()).map(|i| AxisLabel { n: i as i64, coord: 0 }).collect();
        Ok(WeightedCube { weights, labels, provenance: None })
    }

    pub fn unweighted(dim: usize) -> Self {
        Self::new(vec![T::one(); dim]).expect("unit weights")
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn labels(&self) -> &[AxisLabel] {
        &self.labels
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Largest weighted extent `max_i w_i`.
    pub fn max_extent(&self) -> T {
        self.weights.iter().cloned().fold(T::zero(), T::max_of)
    }

    /// Axes that a single interval of weighted length ε cannot span (`w_i > ε`).
    pub fn splitting_axes(&self, eps: &T) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.weights[i] > *eps).collect()
    }

    /// Axes the staggered construction subdivides (`w_i ≥ ε`).
    pub fn effective_axes(&self, eps: &T) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.weights[i] >= *eps).collect()
    }
}

/// The weighted cube realising `widim_ε(X, d^α_F)` for `X = Y × ([0,1]^k)^ℤ`.
///
/// Index `n` carries the effective weight `w^F_n = max_{g∈F} 2^{-|n-g|}` and
/// yields `k` axes when `w^F_n ≥ ε`; lighter entries cannot contribute a
/// diameter above ε and are dropped. For `ε ≥ 1` the cube is empty.
pub fn reduce_to_cube<T: Scalar>(
    f: &FiniteWindow,
    eps: &Rational,
    k: usize,
    _mc: &MetricConfig,
) -> Result<WeightedCube<T>> {
    if f.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be ≥ 1".into()));
    }
    let provenance = Provenance {
        window: f.clone(),
        epsilon: format_rational(eps),
        y_partition_digits: if *eps >= Rational::one() { 0 } else { ceil_log2_inv(eps) },
    };
    if *eps >= Rational::one() {
        return Ok(WeightedCube { weights: vec![], labels: vec![], provenance: Some(provenance) });
    }
    // 2^{-d} ≥ ε  ⇔  d ≤ reach.
    let j = dyadic_floor_exponent(eps);
    let reach = if pow2_neg(j) == *eps { j as i64 } else { j as i64 - 1 };
    let lo = f.min().unwrap() - reach;
    let hi = f.max().unwrap() + reach;
    let mut weights = Vec::new();
    let mut labels = Vec::new();
    for n in lo..=hi {
        let d = f.distance_to(n).unwrap();
        if d as i64 <= reach {
            for coord in 0..k {
                weights.push(T::dyadic(1, d as u32));
                labels.push(AxisLabel { n, coord });
            }
        }
    }
    Ok(WeightedCube { weights, labels, provenance: Some(provenance) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn reduction_examples() {
        let mc = MetricConfig::default();
        let c: WeightedCube<Rational> =
            reduce_to_cube(&FiniteWindow::singleton(0), &ratio(1, 4), 1, &mc).unwrap();
        assert_eq!(c.labels().iter().map(|l| l.n).collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(c.weights(), &[ratio(1, 4), ratio(1, 2), int(1), ratio(1, 2), ratio(1, 4)]);

        let c: WeightedCube<Rational> =
            reduce_to_cube(&FiniteWindow::interval(0, 7), &ratio(1, 2), 1, &mc).unwrap();
        assert_eq!(c.dim(), 10);
        assert_eq!(c.labels().first().unwrap().n, -1);
        assert_eq!(c.labels().last().unwrap().n, 8);

        let c: WeightedCube<Rational> =
            reduce_to_cube(&FiniteWindow::singleton(0), &int(1), 1, &mc).unwrap();
        assert_eq!(c.dim(), 0);
    }

    #[test]
    fn non_power_epsilon_and_k() {
        let mc = MetricConfig::default();
        // 3/16: weights 1, 1/2, 1/4 qualify; 1/8 does not.
        let c: WeightedCube<f64> =
            reduce_to_cube(&FiniteWindow::singleton(0), &ratio(3, 16), 2, &mc).unwrap();
        assert_eq!(c.dim(), 10);
        assert!(reduce_to_cube::<f64>(&FiniteWindow::empty(), &ratio(1, 2), 1, &mc).is_err());
        assert!(reduce_to_cube::<f64>(&FiniteWindow::singleton(0), &int(0), 1, &mc).is_err());
    }

    #[test]
    fn axis_classes() {
        let c = WeightedCube::new(vec![ratio(1, 2), int(1), ratio(1, 4)]).unwrap();
        assert_eq!(c.splitting_axes(&ratio(1, 2)), vec![1]);
        assert_eq!(c.effective_axes(&ratio(1, 2)), vec![0, 1]);
        assert!(WeightedCube::new(vec![int(2)]).is_err());
    }
}
