//! ε-width dimension over closed box covers of weighted cubes, the window
//! functional `φ(F) = widim_ε(X, d^α_F)` and the mean dimension estimator.

pub mod cube;
pub mod exact;
pub mod geometry;
pub mod greedy;
pub mod phi;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

pub use cube::{reduce_to_cube, AxisLabel, Provenance, WeightedCube};
pub use exact::{widim_exact, ExactConfig};
pub use geometry::{covers, mesh, order, AxisBox, BoxCover};
pub use greedy::{widim_greedy, AxisGrid, StaggeredCover, MATERIALIZE_LIMIT};
pub use phi::{lebesgue_lower_bound, mdim_curve, phi, phi_with, PhiMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidimKind {
    /// Minimum over the dyadic grid candidate family.
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness<T> {
    Explicit(BoxCover<T>),
    /// Too many boxes to list; the cover is described by its grids.
    Staggered(StaggeredCover<T>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Axes that had to be subdivided.
    pub effective_axes: usize,
    pub candidate_boxes: usize,
    pub nodes: u64,
    /// Odometer digits of the clopen partition the cube stands for.
    pub y_partition_digits: Option<u64>,
    pub node_limit_hit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidimResult<T> {
    pub value: usize,
    pub kind: WidimKind,
    pub witness: Witness<T>,
    pub stats: SearchStats,
}

/// Outcome of re-checking a witness against its cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub covers: bool,
    pub mesh_ok: bool,
    pub order: usize,
}

impl WitnessCheck {
    pub fn certifies(&self, value: usize) -> bool {
        self.covers && self.mesh_ok && self.order == value
    }
}

impl<T: Scalar> WidimResult<T> {
    /// The witness boxes, materialising a staggered cover when it is small
    /// enough.
    pub fn witness_boxes(&self) -> Option<BoxCover<T>> {
        match &self.witness {
            Witness::Explicit(c) => Some(c.clone()),
            Witness::Staggered(s) => match s.face_count() {
                Some(n) if n <= MATERIALIZE_LIMIT => Some(s.boxes()),
                _ => None,
            },
        }
    }

    /// Recomputes cover, mesh and order of the witness. `None` when the
    /// witness is too large to materialise.
    pub fn check(&self, cube: &WeightedCube<T>, eps: &T) -> Result<Option<WitnessCheck>> {
        let Some(c) = self.witness_boxes() else { return Ok(None) };
        Ok(Some(WitnessCheck {
            covers: covers(&c, cube)?,
            mesh_ok: mesh(&c, cube)? <= *eps,
            order: order(&c)?,
        }))
    }
}
