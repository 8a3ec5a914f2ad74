//! `φ(F) = widim_ε(X, d^α_F)` for `X = Y × ([0,1]^k)^ℤ` and the normalised
//! curve `n ↦ φ({0..n−1}) / n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::systems::MetricConfig;
use crate::widim::cube::{reduce_to_cube, WeightedCube};
use crate::widim::exact::{widim_exact, ExactConfig};
use crate::widim::greedy::widim_greedy;
use crate::window::{folner_interval, FiniteWindow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    Exact,
    #[default]
    Greedy,
}

impl std::str::FromStr for PhiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PhiMode::Exact),
            "greedy" => Ok(PhiMode::Greedy),
            other => Err(Error::Parse(format!("unknown mode `{other}` (expected exact or greedy)"))),
        }
    }
}

pub fn phi(f: &FiniteWindow, eps: &Rational, k: usize, mc: &MetricConfig, mode: PhiMode) -> Result<usize> {
    phi_with(f, eps, k, mc, mode, &ExactConfig::default())
}

pub fn phi_with(
    f: &FiniteWindow,
    eps: &Rational,
    k: usize,
    mc: &MetricConfig,
    mode: PhiMode,
    cfg: &ExactConfig,
) -> Result<usize> {
    let cube: WeightedCube<Rational> = reduce_to_cube(f, eps, k, mc)?;
    Ok(match mode {
        PhiMode::Greedy => widim_greedy(&cube, eps).value,
        PhiMode::Exact => widim_exact(&cube, eps, cfg)?.value,
    })
}

/// `(n, φ(folner_interval(n)) / n)` for `n = 1..=n_max`, in greedy mode.
pub fn mdim_curve(eps: &Rational, k: usize, mc: &MetricConfig, n_max: usize) -> Result<Vec<(usize, Rational)>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be ≥ 1".into()));
    }
    (1..=n_max)
        .map(|n| {
            let v = phi(&folner_interval(n)?, eps, k, mc, PhiMode::Greedy)?;
            Ok((n, Rational::new((v as i64).into(), (n as i64).into())))
        })
        .collect()
}

/// Lower bound for the order of any cover of mesh ≤ ε: the number of axes a
/// set of diameter ≤ ε cannot span. Restricted to the axes with `w_i > ε`
/// the cube contains a product of intervals of length > ε, and by Lebesgue's
/// covering theorem every cover of it by sets of smaller extent has order
/// at least its dimension.
pub fn lebesgue_lower_bound<T: Scalar>(cube: &WeightedCube<T>, eps: &T) -> usize {
    cube.splitting_axes(eps).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn curve_values() {
        let mc = MetricConfig::default();
        let curve = mdim_curve(&ratio(1, 2), 1, &mc, 32).unwrap();
        assert_eq!(curve[7], (8, ratio(10, 8)));
        assert_eq!(curve[31], (32, ratio(34, 32)));
        assert!(curve.iter().all(|(_, v)| *v >= int(1)));
        assert!(mdim_curve(&ratio(1, 2), 1, &mc, 0).is_err());
    }

    #[test]
    fn phi_window_properties() {
        let mc = MetricConfig::default();
        let e = ratio(1, 2);
        let small = phi(&FiniteWindow::interval(0, 3), &e, 1, &mc, PhiMode::Greedy).unwrap();
        let big = phi(&FiniteWindow::interval(0, 7), &e, 1, &mc, PhiMode::Greedy).unwrap();
        assert!(small <= big);
        let f = FiniteWindow::from(vec![0, 3, 4]);
        assert_eq!(
            phi(&f, &e, 1, &mc, PhiMode::Greedy).unwrap(),
            phi(&f.translate(5), &e, 1, &mc, PhiMode::Greedy).unwrap()
        );
    }

    #[test]
    fn exact_mode_matches_lower_bound_on_small_windows() {
        let mc = MetricConfig::default();
        let e = ratio(1, 2);
        for f in [FiniteWindow::singleton(0), FiniteWindow::from(vec![0, 5])] {
            let v = phi(&f, &e, 1, &mc, PhiMode::Exact).unwrap();
            let cube: WeightedCube<Rational> = reduce_to_cube(&f, &e, 1, &mc).unwrap();
            assert_eq!(v, lebesgue_lower_bound(&cube, &e));
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("exact".parse::<PhiMode>().unwrap(), PhiMode::Exact);
        assert!("fast".parse::<PhiMode>().is_err());
    }
}
