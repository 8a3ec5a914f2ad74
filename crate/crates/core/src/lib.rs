//! Width dimension, mean dimension estimates, clopen castles and equivariant
//! embeddings into cubical shifts, for ℤ-actions at desk scale.
//!
//! The geometric and embedding layers are generic over [`Scalar`]; the type
//! aliases below fix the two instantiations used in practice: exact
//! rationals for certificates and `f64` for fast exploration.

pub mod castle;
pub mod embedding;
pub mod error;
pub mod scalar;
pub mod systems;
pub mod widim;
pub mod window;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
pub use window::{FiniteWindow, InvarianceParams};

pub type ExactBox = widim::AxisBox<Rational>;
pub type FloatBox = widim::AxisBox<f64>;
pub type ExactCover = widim::BoxCover<Rational>;
pub type FloatCover = widim::BoxCover<f64>;
pub type ExactCube = widim::WeightedCube<Rational>;
pub type FloatCube = widim::WeightedCube<f64>;
pub type ExactWidim = widim::WidimResult<Rational>;
pub type FloatWidim = widim::WidimResult<f64>;

pub type ExactBaseMap = embedding::BaseMap<Rational>;
pub type FloatBaseMap = embedding::BaseMap<f64>;
pub type ExactBlockMap = embedding::TowerBlockMap<Rational>;
pub type FloatBlockMap = embedding::TowerBlockMap<f64>;
pub type ExactGluedMap = embedding::GluedMap<Rational>;
pub type FloatGluedMap = embedding::GluedMap<f64>;
pub type ExactCertificate = embedding::EmbeddingCertificate;
