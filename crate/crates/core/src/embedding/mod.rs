//! Equivariant maps `X → ([0,1]^m)^ℤ` built tower by tower on a castle.
//!
//! A base map `f⁰` is perturbed on each tower until its block map separates
//! the sampled base points, the blocks are glued along the castle, and the
//! glued map `f` is certified through its trajectory map `I_f`.

pub mod basemap;
pub mod block;
pub mod certify;
pub mod coding;
pub mod glue;
pub mod pipeline;

pub use basemap::{calibrate_epsilon, BaseMap, BaseMapSpec, Feature, OutputSpec, Term};
pub use block::{perturb_search, BlockSearch, Perturbation, PerturbFailure, SearchSettings, TowerBlockMap};
pub use certify::{separation_margin, verify_eta_embedding, EmbeddingCertificate, Margin, PairRecord, ReplayRecord};
pub use coding::{cantor_code, compose_final, interleave_phi, DigitCoding, FinalCoding, ResidueCoding, SymbolCoding};
pub use glue::GluedMap;
pub use pipeline::{
    hypothesis_check, run_pipeline, CodingConfig, EmbedConfig, HypothesisCheck, HypothesisStatus, PipelineError, PipelineReport,
    PipelineRun, Stage,
};

use crate::error::Result;
use crate::scalar::{format_rational, Scalar};
use crate::systems::{act, ProductPoint};
use crate::window::FiniteWindow;

/// A continuous map `X → [0,1]^m`.
pub trait Evaluate<T> {
    fn m(&self) -> usize;
    fn eval(&self, x: &ProductPoint) -> Result<Vec<T>>;
}

/// `(f(α_g x))_{g∈W}`, the trajectory map `I_f` restricted to `W`.
pub fn trajectory_block<T: Scalar, F: Evaluate<T> + ?Sized>(
    f: &F,
    x: &ProductPoint,
    w: &FiniteWindow,
) -> Result<Vec<Vec<T>>> {
    w.iter().map(|g| f.eval(&act(x, g))).collect()
}

/// Exact scalars print as rationals, floats in shortest round-trip form.
pub(crate) fn fmt_scalar<T: Scalar>(v: &T) -> String {
    if T::EXACT {
        format_rational(&v.to_rational())
    } else {
        format!("{}", v.as_f64())
    }
}
