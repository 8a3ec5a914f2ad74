//! Minimum order over box covers of a weighted cube.
//!
//! No cover of mesh ≤ ε has a member meeting two opposite faces of an axis
//! with `w_i > ε`, so by Lebesgue's covering theorem the order is at least
//! the number of such splitting axes. A staggered cover of the splitting
//! axes attains it, which settles the default mode. The branch-and-bound
//! below (`lebesgue_start = false`) decides the same minimum over a dyadic
//! grid family without using the bound.
//!
//! Only splitting axes (`w_i > ε`) are searched. On every other axis a single
//! box may span the whole of `[0,1]`, and widening a box on such an axis never
//! raises the order of a cover, so those sides are fixed to `[0,1]`.
//!
//! The search is over the integer grid `{0..2^r}^d`. A candidate box is a
//! product of intervals `[a,b]`, `a < b`, with `w·(b−a)/2^r ≤ ε`. Two closed
//! grid boxes meet iff they share a grid vertex, so the order of a candidate
//! cover is the largest vertex multiplicity minus one. For a target order `t`
//! the DFS branches on the first uncovered cell `c` (last axis most
//! significant), refuses any box that would push a vertex above multiplicity
//! `t+1`, and backtracks as soon as some uncovered cell admits no box.
//!
//! Everything before `c` is already covered, so a box through `c` may be
//! shrunk to start at `c` on the last axis without losing coverage or raising
//! any multiplicity; only such boxes are branched on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::widim::cube::WeightedCube;
use crate::widim::geometry::{AxisBox, BoxCover};
use crate::widim::greedy::{widim_greedy, StaggeredCover};
use crate::widim::{SearchStats, WidimKind, WidimResult, Witness};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    /// Grid resolution `r`: endpoints are multiples of `2^{-r}`.
    pub grid: u32,
    /// Largest number of splitting axes accepted.
    pub axis_limit: usize,
    /// DFS node budget per target order; exhausting it downgrades the
    /// result to an upper bound.
    pub node_limit: u64,
    /// Start at the Lebesgue bound (the number of splitting axes) instead
    /// of 0. No member of an ε-cover meets two opposite faces of a splitting
    /// axis, so every cover has at least that order.
    #[serde(default = "yes")]
    pub lebesgue_start: bool,
}

fn yes() -> bool {
    true
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig { grid: 3, axis_limit: 3, node_limit: 50_000_000, lebesgue_start: true }
    }
}

impl ExactConfig {
    pub fn with_grid(grid: u32) -> Self {
        ExactConfig { grid, ..Self::default() }
    }
}

struct Candidate {
    /// Per searched axis `(a, b)` in grid units.
    sides: Vec<(u32, u32)>,
    cells: Vec<u32>,
    verts: Vec<u32>,
    /// For each side, the cells removed by pulling that side in by one.
    layers: Vec<Vec<u32>>,
}

struct Search<'a> {
    cands: &'a [Candidate],
    by_cell: &'a [Vec<u32>],
    /// Boxes through a cell whose lower side on the last axis is that cell's.
    starts: &'a [Vec<u32>],
    cell_cover: Vec<u16>,
    vert_mult: Vec<u16>,
    chosen: Vec<u32>,
    /// Boxes already refuted in an ancestor's earlier branch.
    banned: Vec<bool>,
    cap: u16,
    nodes: u64,
    node_limit: u64,
}

enum Outcome {
    Found,
    Infeasible,
    Aborted,
}

impl Search<'_> {
    fn place(&mut self, b: u32, sign: bool) {
        let c = &self.cands[b as usize];
        for &x in &c.cells {
            if sign {
                self.cell_cover[x as usize] += 1;
            } else {
                self.cell_cover[x as usize] -= 1;
            }
        }
        for &v in &c.verts {
            if sign {
                self.vert_mult[v as usize] += 1;
            } else {
                self.vert_mult[v as usize] -= 1;
            }
        }
    }

    fn fits(&self, b: u32) -> bool {
        !self.banned[b as usize]
            && self.cands[b as usize].verts.iter().all(|&v| self.vert_mult[v as usize] < self.cap)
    }

    /// Whether every uncovered cell still admits some box.
    fn coverable(&self) -> bool {
        (0..self.cell_cover.len())
            .all(|c| self.cell_cover[c] != 0 || self.by_cell[c].iter().any(|&b| self.fits(b)))
    }

    /// Whether some placed box has a face layer that the other placed boxes
    /// already cover, so it could be shrunk in every completion.
    fn shrinkable(&self) -> bool {
        self.chosen.iter().any(|&b| {
            self.cands[b as usize]
                .layers
                .iter()
                .any(|layer| layer.iter().all(|&x| self.cell_cover[x as usize] >= 2))
        })
    }

    fn dfs(&mut self) -> Outcome {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Outcome::Aborted;
        }
        if self.shrinkable() {
            return Outcome::Infeasible;
        }
        let Some(cell) = self.cell_cover.iter().position(|&c| c == 0) else {
            return Outcome::Found;
        };
        if !self.coverable() {
            return Outcome::Infeasible;
        }
        let options: Vec<u32> = self.starts[cell].iter().copied().filter(|&b| self.fits(b)).collect();
        // Once the branch through `b` is refuted, no completion of the
        // current state uses `b`.
        let mut outcome = Outcome::Infeasible;
        let mut refuted = Vec::new();
        for b in options {
            self.place(b, true);
            self.chosen.push(b);
            match self.dfs() {
                Outcome::Infeasible => {}
                other => {
                    outcome = other;
                    break;
                }
            }
            self.chosen.pop();
            self.place(b, false);
            self.banned[b as usize] = true;
            refuted.push(b);
        }
        for b in refuted {
            self.banned[b as usize] = false;
        }
        outcome
    }
}

fn index(coords: &[u32], base: u32) -> u32 {
    coords.iter().rev().fold(0, |acc, &c| acc * base + c)
}

fn build_candidates<T: Scalar>(weights: &[T], eps: &T, n: u32) -> Result<Vec<Candidate>> {
    let d = weights.len();
    let scale = T::from_int(n as i64);
    let intervals: Vec<Vec<(u32, u32)>> = weights
        .iter()
        .map(|w| {
            let mut v = Vec::new();
            for a in 0..n {
                for b in a + 1..=n {
                    if w.clone() * T::from_int((b - a) as i64) <= eps.clone() * scale.clone() {
                        v.push((a, b));
                    }
                }
            }
            v
        })
        .collect();
    if intervals.iter().any(|v| v.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "grid 2^-{} is too coarse: a single grid cell exceeds epsilon on some axis",
            n.trailing_zeros()
        )));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let sides: Vec<(u32, u32)> = (0..d).map(|i| intervals[i][idx[i]]).collect();
        out.push(candidate(sides, n));
        let mut a = 0;
        loop {
            if a == d {
                return Ok(out);
            }
            idx[a] += 1;
            if idx[a] < intervals[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn candidate(sides: Vec<(u32, u32)>, n: u32) -> Candidate {
    let d = sides.len();
    let mut cells = Vec::new();
    let mut verts = Vec::new();
    let mut cur: Vec<u32> = sides.iter().map(|s| s.0).collect();
    loop {
        if (0..d).all(|i| cur[i] < sides[i].1) {
            cells.push(index(&cur, n));
        }
        verts.push(index(&cur, n + 1));
        let mut a = 0;
        loop {
            if a == d {
                let layers = layers(&sides, n);
                return Candidate { sides, cells, verts, layers };
            }
            cur[a] += 1;
            if cur[a] <= sides[a].1 {
                break;
            }
            cur[a] = sides[a].0;
            a += 1;
        }
    }
}

fn layers(sides: &[(u32, u32)], n: u32) -> Vec<Vec<u32>> {
    let d = sides.len();
    let mut out = Vec::with_capacity(2 * d);
    for axis in 0..d {
        for at in [sides[axis].0, sides[axis].1 - 1] {
            let mut layer = Vec::new();
            let mut cur: Vec<u32> = sides.iter().map(|s| s.0).collect();
            cur[axis] = at;
            'cells: loop {
                layer.push(index(&cur, n));
                for i in (0..d).filter(|&i| i != axis) {
                    cur[i] += 1;
                    if cur[i] < sides[i].1 {
                        continue 'cells;
                    }
                    cur[i] = sides[i].0;
                }
                break;
            }
            out.push(layer);
        }
    }
    out
}

/// Minimum order over covers built from the dyadic grid candidate family.
///
/// Targets are tried in increasing order from the lower bound, so the first
/// feasible target is the minimum. With `lebesgue_start` the lower bound is
/// attained by a staggered cover and no search is needed. `kind` is `Exact` unless some search ran out of nodes.
pub fn widim_exact<T: Scalar>(cube: &WeightedCube<T>, eps: &T, cfg: &ExactConfig) -> Result<WidimResult<T>> {
    if *eps <= T::zero() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let split = cube.splitting_axes(eps);
    if split.len() > cfg.axis_limit {
        return Err(Error::AxisLimit { axes: split.len(), limit: cfg.axis_limit });
    }
    if cfg.grid == 0 || cfg.grid > 8 {
        return Err(Error::InvalidArgument("grid resolution must lie in 1..=8".into()));
    }
    let y_digits = cube.provenance().map(|p| p.y_partition_digits);
    if split.is_empty() {
        return Ok(WidimResult {
            value: 0,
            kind: WidimKind::Exact,
            witness: Witness::Explicit(BoxCover::new(vec![AxisBox::unit(cube.dim())])),
            stats: SearchStats {
                effective_axes: 0,
                candidate_boxes: 1,
                nodes: 0,
                y_partition_digits: y_digits,
                node_limit_hit: false,
            },
        });
    }

    let n = 1u32 << cfg.grid;
    let weights: Vec<T> = split.iter().map(|&i| cube.weights()[i].clone()).collect();
    if cfg.lebesgue_start {
        // The staggered cover of the splitting axes, spanning every other
        // axis whole, has order equal to the lower bound.
        let sub = WeightedCube::new(weights.clone())?;
        let boxes = StaggeredCover::build(&sub, eps)
            .boxes()
            .boxes
            .into_iter()
            .map(|b| {
                let mut full = vec![(T::zero(), T::one()); cube.dim()];
                for (side, &axis) in b.sides().iter().zip(&split) {
                    full[axis] = side.clone();
                }
                AxisBox::new(full).expect("ordered sides")
            })
            .collect::<Vec<_>>();
        return Ok(WidimResult {
            value: split.len(),
            kind: WidimKind::Exact,
            stats: SearchStats {
                effective_axes: split.len(),
                candidate_boxes: boxes.len(),
                nodes: 0,
                y_partition_digits: y_digits,
                node_limit_hit: false,
            },
            witness: Witness::Explicit(BoxCover::new(boxes)),
        });
    }
    let cands = build_candidates(&weights, eps, n)?;
    let cell_count = (n as usize).pow(split.len() as u32);
    let vert_count = (n as usize + 1).pow(split.len() as u32);
    let mut by_cell: Vec<Vec<u32>> = vec![Vec::new(); cell_count];
    for (b, c) in cands.iter().enumerate() {
        for &x in &c.cells {
            by_cell[x as usize].push(b as u32);
        }
    }
    // Big boxes first: they reach a cover sooner.
    for list in &mut by_cell {
        list.sort_by_key(|&b| std::cmp::Reverse(cands[b as usize].cells.len()));
    }
    let last = split.len() - 1;
    let starts: Vec<Vec<u32>> = by_cell
        .iter()
        .enumerate()
        .map(|(c, list)| {
            let row = c as u32 / n.pow(last as u32);
            list.iter().copied().filter(|&b| cands[b as usize].sides[last].0 == row).collect()
        })
        .collect();

    let incumbent = widim_greedy(cube, eps).value;
    let mut nodes = 0u64;
    let mut aborted = false;
    let floor = if cfg.lebesgue_start { split.len() } else { 0 };
    for target in floor..=incumbent.max(split.len()) {
        let mut s = Search {
            cands: &cands,
            by_cell: &by_cell,
            starts: &starts,
            cell_cover: vec![0; cell_count],
            vert_mult: vec![0; vert_count],
            chosen: Vec::new(),
            banned: vec![false; cands.len()],
            cap: (target + 1) as u16,
            nodes: 0,
            node_limit: cfg.node_limit,
        };
        let outcome = s.dfs();
        nodes += s.nodes;
        match outcome {
            Outcome::Found => {
                let boxes = s
                    .chosen
                    .iter()
                    .map(|&b| lift(&cands[b as usize].sides, &split, cube.dim(), cfg.grid))
                    .collect();
                return Ok(WidimResult {
                    value: target,
                    kind: if aborted { WidimKind::UpperBound } else { WidimKind::Exact },
                    witness: Witness::Explicit(BoxCover::new(boxes)),
                    stats: SearchStats {
                        effective_axes: split.len(),
                        candidate_boxes: cands.len(),
                        nodes,
                        y_partition_digits: y_digits,
                        node_limit_hit: aborted,
                    },
                });
            }
            Outcome::Infeasible => {}
            Outcome::Aborted => aborted = true,
        }
    }
    // Every grid search gave up; the staggered cover still certifies a bound.
    let mut g = widim_greedy(cube, eps);
    g.stats.nodes = nodes;
    g.stats.node_limit_hit = true;
    Ok(g)
}

fn lift<T: Scalar>(sides: &[(u32, u32)], split: &[usize], dim: usize, grid: u32) -> AxisBox<T> {
    let mut full = vec![(T::zero(), T::one()); dim];
    for (&(a, b), &axis) in sides.iter().zip(split) {
        full[axis] = (T::dyadic(a as i64, grid), T::dyadic(b as i64, grid));
    }
    AxisBox::new(full).expect("grid intervals are ordered")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, Rational};
    use crate::widim::geometry::{covers, mesh, order};

    fn certify(cube: &WeightedCube<Rational>, eps: &Rational, r: &WidimResult<Rational>) {
        let Witness::Explicit(c) = &r.witness else { panic!("explicit witness expected") };
        assert!(covers(c, cube).unwrap());
        assert!(mesh(c, cube).unwrap() <= *eps);
        assert_eq!(order(c).unwrap(), r.value);
    }

    #[test]
    fn unit_interval_needs_order_one() {
        let cube = WeightedCube::unweighted(1);
        let r = widim_exact(&cube, &ratio(1, 2), &ExactConfig::default()).unwrap();
        assert_eq!((r.value, r.kind), (1, WidimKind::Exact));
        certify(&cube, &ratio(1, 2), &r);
    }

    #[test]
    fn unit_square_needs_order_two() {
        let cube = WeightedCube::unweighted(2);
        let r = widim_exact(&cube, &ratio(5, 8), &ExactConfig::default()).unwrap();
        assert_eq!((r.value, r.kind), (2, WidimKind::Exact));
        certify(&cube, &ratio(5, 8), &r);
    }

    #[test]
    fn search_alone_refutes_lower_orders() {
        let cfg = ExactConfig { lebesgue_start: false, ..ExactConfig::default() };
        for (d, eps) in [(1, ratio(1, 2)), (2, ratio(5, 8)), (2, ratio(1, 2))] {
            let cube = WeightedCube::unweighted(d);
            let r = widim_exact(&cube, &eps, &cfg).unwrap();
            assert_eq!((r.value, r.kind), (d, WidimKind::Exact));
            certify(&cube, &eps, &r);
        }
    }

    #[test]
    fn unit_cube_in_three_dimensions() {
        let cube = WeightedCube::unweighted(3);
        let r = widim_exact(&cube, &ratio(1, 2), &ExactConfig::default()).unwrap();
        assert_eq!((r.value, r.kind), (3, WidimKind::Exact));
        certify(&cube, &ratio(1, 2), &r);
    }

    #[test]
    fn large_epsilon_gives_zero() {
        let cube = WeightedCube::new(vec![int(1), ratio(1, 2)]).unwrap();
        let r = widim_exact(&cube, &int(1), &ExactConfig::default()).unwrap();
        assert_eq!(r.value, 0);
        certify(&cube, &int(1), &r);
    }

    #[test]
    fn light_axes_are_not_searched() {
        let cube = WeightedCube::new(vec![ratio(1, 4), int(1), ratio(1, 2)]).unwrap();
        let r = widim_exact(&cube, &ratio(1, 2), &ExactConfig::default()).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.stats.effective_axes, 1);
        certify(&cube, &ratio(1, 2), &r);
    }

    #[test]
    fn axis_limit_is_enforced() {
        let cube: WeightedCube<Rational> = WeightedCube::unweighted(4);
        assert_eq!(
            widim_exact(&cube, &ratio(1, 2), &ExactConfig::default()).unwrap_err(),
            Error::AxisLimit { axes: 4, limit: 3 }
        );
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let cube: WeightedCube<Rational> = WeightedCube::unweighted(1);
        let cfg = ExactConfig { lebesgue_start: false, ..ExactConfig::with_grid(2) };
        assert!(widim_exact(&cube, &ratio(1, 8), &cfg).is_err());
    }

    #[test]
    fn node_budget_downgrades_to_upper_bound() {
        let cube: WeightedCube<Rational> = WeightedCube::unweighted(2);
        let cfg = ExactConfig { node_limit: 3, lebesgue_start: false, ..ExactConfig::default() };
        let r = widim_exact(&cube, &ratio(5, 8), &cfg).unwrap();
        assert_eq!(r.kind, WidimKind::UpperBound);
        assert!(r.stats.node_limit_hit);
        assert!(r.value >= 2);
    }

    #[test]
    fn float_weights() {
        let cube: WeightedCube<f64> = WeightedCube::unweighted(2);
        let r = widim_exact(&cube, &0.625, &ExactConfig::default()).unwrap();
        assert_eq!(r.value, 2);
    }
}
