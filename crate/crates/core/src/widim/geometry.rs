//! Closed axis-parallel boxes in weighted cubes: coverage, order and mesh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::widim::cube::WeightedCube;

/// A closed box `Π [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox<T> {
    sides: Vec<(T, T)>,
}

impl<T: Scalar> AxisBox<T> {
    pub fn new(sides: Vec<(T, T)>) -> Result<Self> {
        if let Some(i) = sides.iter().position(|(a, b)| a > b) {
            return Err(Error::InvalidArgument(format!("box side {i} has lo > hi")));
        }
        Ok(AxisBox { sides })
    }

    /// The full unit cube of dimension `dim`.
    pub fn unit(dim: usize) -> Self {
        AxisBox { sides: vec![(T::zero(), T::one()); dim] }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[(T, T)] {
        &self.sides
    }

    pub fn contains(&self, p: &[T]) -> bool {
        self.sides.iter().zip(p).all(|((a, b), x)| a <= x && x <= b)
    }

    /// `max_i w_i (hi_i − lo_i)`.
    pub fn weighted_diameter(&self, weights: &[T]) -> T {
        self.sides
            .iter()
            .zip(weights)
            .fold(T::zero(), |acc, ((a, b), w)| T::max_of(acc, w.clone() * (b.clone() - a.clone())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCover<T> {
    pub boxes: Vec<AxisBox<T>>,
}

impl<T: Scalar> BoxCover<T> {
    pub fn new(boxes: Vec<AxisBox<T>>) -> Self {
        BoxCover { boxes }
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.boxes.iter().find(|b| b.dim() != dim) {
            Some(b) => Err(Error::DimensionMismatch { expected: dim, found: b.dim() }),
            None => Ok(()),
        }
    }
}

fn sorted_distinct<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable scalars"));
    v.dedup();
    v
}

/// Whether the union of the closed boxes is the whole cube.
///
/// Sweeps the grid of cells cut out by all box endpoints (and the cube
/// faces); a finite union of closed boxes contains the cube iff it contains
/// the midpoint of every open cell.
pub fn covers<T: Scalar>(cover: &BoxCover<T>, cube: &WeightedCube<T>) -> Result<bool> {
    let dim = cube.dim();
    cover.check_dim(dim)?;
    if dim == 0 {
        return Ok(!cover.is_empty());
    }
    let (zero, one) = (T::zero(), T::one());
    let mids: Vec<Vec<T>> = (0..dim)
        .map(|i| {
            let mut cuts = vec![zero.clone(), one.clone()];
            for b in &cover.boxes {
                for x in [&b.sides[i].0, &b.sides[i].1] {
                    if *x > zero && *x < one {
                        cuts.push(x.clone());
                    }
                }
            }
            let cuts = sorted_distinct(cuts);
            cuts.windows(2).map(|w| (w[0].clone() + w[1].clone()).half()).collect()
        })
        .collect();

    // Filter candidate boxes axis by axis so each cell only scans survivors.
    let all: Vec<usize> = (0..cover.len()).collect();
    Ok(covers_rec(cover, &mids, 0, &all))
}

fn covers_rec<T: Scalar>(cover: &BoxCover<T>, mids: &[Vec<T>], axis: usize, alive: &[usize]) -> bool {
    if axis == mids.len() {
        return !alive.is_empty();
    }
    mids[axis].iter().all(|x| {
        let next: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&b| {
                let (lo, hi) = &cover.boxes[b].sides[axis];
                lo <= x && x <= hi
            })
            .collect();
        !next.is_empty() && covers_rec(cover, mids, axis + 1, &next)
    })
}

/// Largest number of boxes sharing a common point, minus one.
///
/// Boxes that share a point have an intersection whose lower corner is made
/// of lower endpoints, so it suffices to scan points whose coordinates are
/// lower endpoints. Shared faces count.
pub fn order<T: Scalar>(cover: &BoxCover<T>) -> Result<usize> {
    if cover.is_empty() {
        return Err(Error::EmptyCover);
    }
    let dim = cover.boxes[0].dim();
    cover.check_dim(dim)?;
    if dim == 0 {
        return Ok(cover.len() - 1);
    }
    let lows: Vec<Vec<T>> = (0..dim)
        .map(|i| sorted_distinct(cover.boxes.iter().map(|b| b.sides[i].0.clone()).collect()))
        .collect();
    let all: Vec<usize> = (0..cover.len()).collect();
    let mut best = 0usize;
    order_rec(cover, &lows, 0, &all, &mut best);
    Ok(best - 1)
}

fn order_rec<T: Scalar>(
    cover: &BoxCover<T>,
    lows: &[Vec<T>],
    axis: usize,
    alive: &[usize],
    best: &mut usize,
) {
    if alive.len() <= *best {
        return;
    }
    if axis == lows.len() {
        *best = alive.len();
        return;
    }
    for x in &lows[axis] {
        let next: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&b| {
                let (lo, hi) = &cover.boxes[b].sides[axis];
                lo <= x && x <= hi
            })
            .collect();
        order_rec(cover, lows, axis + 1, &next, best);
    }
}

/// Largest weighted diameter of a member.
pub fn mesh<T: Scalar>(cover: &BoxCover<T>, cube: &WeightedCube<T>) -> Result<T> {
    cover.check_dim(cube.dim())?;
    Ok(cover
        .boxes
        .iter()
        .fold(T::zero(), |acc, b| T::max_of(acc, b.weighted_diameter(cube.weights()))))
}
