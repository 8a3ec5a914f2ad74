//! Concrete dynamical systems: the 2-adic odometer `Y`, its extension
//! `X = Y × ([0,1]^k)^ℤ`, substitution subshifts, and finite samples.

pub mod odometer;
pub mod product;
pub mod sample;
pub mod substitution;

pub use odometer::{dist_y, odometer_act, OdometerPoint};
pub use product::{act, dist_x, dyn_metric, factor_pi, CubeSeqPoint, MetricConfig, ProductPoint};
pub use sample::{sample_points, PairKind, Sample, SamplePair, SampleSpec};
pub use substitution::{ReturnWord, SubstitutionSystem};
