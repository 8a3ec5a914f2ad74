//! The glued map `f(x) = F_i(α_{-s} x)(s)` for `x ∈ α_s(Z_i)`.

use crate::castle::{locate, Castle};
use crate::embedding::block::TowerBlockMap;
use crate::embedding::Evaluate;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::{act, ProductPoint};

#[derive(Clone, Debug)]
pub struct GluedMap<T> {
    castle: Castle,
    maps: Vec<TowerBlockMap<T>>,
    m: usize,
}

impl<T: Scalar> GluedMap<T> {
    /// `castle` lives on `X`; `maps[i]` belongs to tower `i`.
    pub fn new(castle: Castle, maps: Vec<TowerBlockMap<T>>) -> Result<Self> {
        if maps.len() != castle.len() {
            return Err(Error::InvalidArgument(format!("{} maps for {} towers", maps.len(), castle.len())));
        }
        let m = maps.first().map_or(0, |f| f.m());
        for (i, (f, t)) in maps.iter().zip(&castle.towers).enumerate() {
            if f.tower != i || f.shape != t.shape {
                return Err(Error::InvalidArgument(format!("block map {i} does not match tower {i}")));
            }
            if f.m() != m {
                return Err(Error::DimensionMismatch { expected: m, found: f.m() });
            }
        }
        Ok(GluedMap { castle, maps, m })
    }

    pub fn castle(&self) -> &Castle {
        &self.castle
    }

    pub fn maps(&self) -> &[TowerBlockMap<T>] {
        &self.maps
    }
}

impl<T: Scalar> Evaluate<T> for GluedMap<T> {
    fn m(&self) -> usize {
        self.m
    }

    fn eval(&self, x: &ProductPoint) -> Result<Vec<T>> {
        let (i, s) = locate(&self.castle, x)?;
        self.maps[i].eval_at(&act(x, -s), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::castle::{odometer_castle, pullback};
    use crate::embedding::basemap::{BaseMap, BaseMapSpec};
    use crate::embedding::block::{Perturbation, perturbation_features, try_rng};
    use crate::embedding::trajectory_block;
    use crate::scalar::{ratio, Rational};
    use crate::systems::{sample_points, SampleSpec};
    use crate::window::FiniteWindow;

    fn glued(level: u32) -> GluedMap<Rational> {
        let castle = pullback(&odometer_castle(level).unwrap());
        let shape = castle.towers[0].shape.clone();
        let base = BaseMap::new(BaseMapSpec::standard(1, 2), 1).unwrap();
        let feats = perturbation_features(&shape, 1, 1).unwrap();
        let p = Perturbation::random(feats, shape.len(), 2, &ratio(1, 8), &mut try_rng(3, 0, 1));
        GluedMap::new(castle, vec![TowerBlockMap::new(0, shape, base, p).unwrap()]).unwrap()
    }

    #[test]
    fn gluing_identity() {
        let f = glued(2);
        let s = sample_points(&SampleSpec::new(1, 9, 60)).unwrap();
        let block_map = &f.maps()[0];
        for x in &s.points {
            let (i, s0) = locate(f.castle(), x).unwrap();
            let z = act(x, -s0);
            assert_eq!(i, 0);
            for s in 0..4 {
                assert_eq!(f.eval(&act(&z, s)).unwrap(), block_map.eval_at(&z, s).unwrap());
            }
        }
    }

    #[test]
    fn trajectory_equivariance() {
        let f = glued(3);
        let s = sample_points(&SampleSpec::new(1, 4, 20)).unwrap();
        let w = FiniteWindow::interval(-5, 5);
        for x in &s.points {
            for h in [-3, 3] {
                assert_eq!(
                    trajectory_block(&f, &act(x, h), &w).unwrap(),
                    trajectory_block(&f, x, &w.translate(h)).unwrap()
                );
            }
            assert_eq!(trajectory_block(&f, x, &FiniteWindow::singleton(0)).unwrap(), vec![f.eval(x).unwrap()]);
        }
    }

    #[test]
    fn single_level_tower() {
        let castle = pullback(&crate::castle::Castle::new(vec![crate::castle::Tower {
            base: crate::castle::CylinderSet::odometer("").unwrap(),
            shape: FiniteWindow::singleton(0),
        }]).unwrap());
        let base: BaseMap<Rational> = BaseMap::new(BaseMapSpec::standard(1, 1), 1).unwrap();
        let p = Perturbation::zero(perturbation_features(&FiniteWindow::singleton(0), 1, 0).unwrap(), 1, 1);
        let f = GluedMap::new(castle, vec![TowerBlockMap::new(0, FiniteWindow::singleton(0), base.clone(), p).unwrap()]).unwrap();
        let s = sample_points(&SampleSpec::new(1, 2, 10)).unwrap();
        for x in &s.points {
            assert_eq!(f.eval(x).unwrap(), base.eval(x).unwrap());
        }
    }

    #[test]
    fn map_count_must_match() {
        let castle = pullback(&odometer_castle(1).unwrap());
        assert!(GluedMap::<Rational>::new(castle, vec![]).is_err());
    }
}
