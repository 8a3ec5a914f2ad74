//! Staggered brick covers: an explicit order-`d` upper bound.
//!
//! Every effective axis `i` gets a grid of spacing `s_i = ε / w_i`. Each face
//! of the grid with `c` fixed (line) coordinates is thickened into a box: a
//! fixed coordinate `z` becomes `[z − cθs, z + cθs]`, a free cell `[z, z+s]`
//! shrinks to `[z + (c+1)θs, z + s − (c+1)θs]`. With `θ ≤ 1/(2d+2)` boxes of
//! the same `c` are pairwise disjoint and the family covers the cube, so the
//! `d+1` classes bound the order by `d`; the point at normalised distances
//! `θ, 2θ, …, dθ` from a grid corner meets all `d+1` classes, so the order is
//! exactly `d`. All boxes have weighted diameter below ε.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::widim::cube::WeightedCube;
use crate::widim::geometry::{AxisBox, BoxCover};
use crate::widim::{SearchStats, WidimKind, WidimResult, Witness};

/// Covers with at most this many boxes are materialised in results.
pub const MATERIALIZE_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid<T> {
    pub spacing: T,
    /// Grid lines sit at `j · spacing` for `j = 0..=lines`.
    pub lines: usize,
}

/// Implicit description of the staggered cover of a weighted cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaggeredCover<T> {
    /// `None` for axes left whole.
    pub axes: Vec<Option<AxisGrid<T>>>,
    /// `θ = 2^{-theta_exp}`.
    pub theta_exp: u32,
}

#[derive(Clone, Copy)]
enum Piece {
    Line(usize),
    Cell(usize),
    Whole,
}

impl<T: Scalar> StaggeredCover<T> {
    pub fn build(cube: &WeightedCube<T>, eps: &T) -> Self {
        let effective = cube.effective_axes(eps);
        let d = effective.len();
        let mut theta_exp = 0u32;
        while (1u64 << theta_exp) < 2 * d as u64 + 2 {
            theta_exp += 1;
        }
        let axes = (0..cube.dim())
            .map(|i| {
                if !effective.contains(&i) {
                    return None;
                }
                let spacing = eps.clone() / cube.weights()[i].clone();
                let mut lines = 1usize;
                while T::from_int(lines as i64) * spacing.clone() < T::one() {
                    lines += 1;
                }
                Some(AxisGrid { spacing, lines })
            })
            .collect();
        StaggeredCover { axes, theta_exp }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of subdivided axes; equals the order of the cover.
    pub fn effective(&self) -> usize {
        self.axes.iter().filter(|a| a.is_some()).count()
    }

    pub fn order(&self) -> usize {
        self.effective()
    }

    /// Number of faces, an upper bound for the number of non-empty boxes.
    pub fn face_count(&self) -> Option<usize> {
        self.axes.iter().try_fold(1usize, |acc, a| match a {
            Some(g) => acc.checked_mul(2 * g.lines + 1),
            None => Some(acc),
        })
    }

    fn pieces(&self, axis: usize) -> Vec<Piece> {
        match &self.axes[axis] {
            None => vec![Piece::Whole],
            Some(g) => (0..=2 * g.lines)
                .map(|p| if p % 2 == 0 { Piece::Line(p / 2) } else { Piece::Cell(p / 2) })
                .collect(),
        }
    }

    fn face_box(&self, face: &[Piece]) -> Option<AxisBox<T>> {
        let fixed = face.iter().filter(|p| matches!(p, Piece::Line(_))).count() as i64;
        let theta = T::dyadic(1, self.theta_exp);
        let (zero, one) = (T::zero(), T::one());
        let mut sides = Vec::with_capacity(face.len());
        for (axis, piece) in face.iter().enumerate() {
            let (lo, hi) = match (piece, &self.axes[axis]) {
                (Piece::Whole, _) => (zero.clone(), one.clone()),
                (Piece::Line(j), Some(g)) => {
                    let z = T::from_int(*j as i64) * g.spacing.clone();
                    let a = theta.clone() * T::from_int(fixed) * g.spacing.clone();
                    (z.clone() - a.clone(), z + a)
                }
                (Piece::Cell(j), Some(g)) => {
                    let z = T::from_int(*j as i64) * g.spacing.clone();
                    let b = theta.clone() * T::from_int(fixed + 1) * g.spacing.clone();
                    (z.clone() + b.clone(), z + g.spacing.clone() - b)
                }
                _ => unreachable!("pieces only come from subdivided axes"),
            };
            let lo = T::max_of(lo, zero.clone());
            let hi = T::min_of(hi, one.clone());
            if lo > hi {
                return None;
            }
            sides.push((lo, hi));
        }
        Some(AxisBox::new(sides).expect("lo ≤ hi after clipping"))
    }

    /// Materialises every non-empty box.
    pub fn boxes(&self) -> BoxCover<T> {
        let pieces: Vec<Vec<Piece>> = (0..self.dim()).map(|i| self.pieces(i)).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim()];
        loop {
            let face: Vec<Piece> = idx.iter().enumerate().map(|(a, &p)| pieces[a][p]).collect();
            if let Some(b) = self.face_box(&face) {
                out.push(b);
            }
            let mut a = 0;
            loop {
                if a == idx.len() {
                    return BoxCover::new(out);
                }
                idx[a] += 1;
                if idx[a] < pieces[a].len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }
}

/// Upper bound for box-cover width dimension via the staggered construction.
/// Every axis with `w_i ≥ ε` is subdivided and contributes one to the value.
pub fn widim_greedy<T: Scalar>(cube: &WeightedCube<T>, eps: &T) -> WidimResult<T> {
    let cover = StaggeredCover::build(cube, eps);
    let value = cover.order();
    let faces = cover.face_count();
    let witness = match faces {
        Some(n) if n <= MATERIALIZE_LIMIT => Witness::Explicit(cover.boxes()),
        _ => Witness::Staggered(cover),
    };
    WidimResult {
        value,
        kind: WidimKind::UpperBound,
        witness,
        stats: SearchStats {
            effective_axes: value,
            candidate_boxes: faces.unwrap_or(usize::MAX),
            nodes: 0,
            y_partition_digits: cube.provenance().map(|p| p.y_partition_digits),
            node_limit_hit: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, Rational};
    use crate::widim::geometry::{covers, mesh, order};

    fn check(cube: &WeightedCube<Rational>, eps: &Rational, expected: usize) {
        let r = widim_greedy(cube, eps);
        assert_eq!(r.value, expected);
        let Witness::Explicit(c) = &r.witness else { panic!("expected explicit witness") };
        assert!(covers(c, cube).unwrap());
        assert!(mesh(c, cube).unwrap() <= *eps);
        assert_eq!(order(c).unwrap(), expected);
    }

    #[test]
    fn unweighted_cubes_get_order_m() {
        for m in 1..=3 {
            check(&WeightedCube::unweighted(m), &ratio(1, 2), m);
        }
        check(&WeightedCube::unweighted(2), &ratio(5, 8), 2);
        check(&WeightedCube::unweighted(3), &ratio(3, 4), 3);
    }

    #[test]
    fn light_axes_contribute_nothing() {
        let cube = WeightedCube::new(vec![int(1), ratio(1, 8)]).unwrap();
        check(&cube, &ratio(1, 4), 1);
        check(&WeightedCube::unweighted(0), &ratio(1, 2), 0);
    }

    #[test]
    fn boundary_weight_axes_are_subdivided() {
        let cube = WeightedCube::new(vec![ratio(1, 2), int(1), ratio(1, 2)]).unwrap();
        check(&cube, &ratio(1, 2), 3);
    }

    #[test]
    fn large_cubes_stay_implicit() {
        let cube: WeightedCube<Rational> = WeightedCube::unweighted(34);
        let r = widim_greedy(&cube, &ratio(1, 2));
        assert_eq!(r.value, 34);
        assert!(matches!(r.witness, Witness::Staggered(_)));
    }

    #[test]
    fn float_cover_matches_exact_cover() {
        let exact = widim_greedy(&WeightedCube::<Rational>::unweighted(2), &ratio(1, 2));
        let float = widim_greedy(&WeightedCube::<f64>::unweighted(2), &0.5);
        let (Witness::Explicit(a), Witness::Explicit(b)) = (&exact.witness, &float.witness) else {
            panic!("explicit witnesses expected")
        };
        assert_eq!(a.len(), b.len());
        assert_eq!(order(b).unwrap(), 2);
    }
}
