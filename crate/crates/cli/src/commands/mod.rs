pub mod castle;
pub mod embed;
pub mod mdim;
pub mod verify;
pub mod widim;

use anyhow::{bail, Result};
use serde_json::Value;

use crate::output::Computed;

/// Recomputes the results of a report from its echoed inputs.
pub fn recompute(command: &str, inputs: &Value) -> Result<Computed> {
    match command {
        "widim" => widim::compute(&serde_json::from_value(inputs.clone())?),
        "mdim" => mdim::compute(&serde_json::from_value(inputs.clone())?),
        "castle-build" => castle::build(&serde_json::from_value(inputs.clone())?),
        "castle-verify" => castle::verify(&serde_json::from_value(inputs.clone())?),
        "embed" => embed::compute(&serde_json::from_value(inputs.clone())?),
        other => bail!("cannot reproduce a `{other}` report"),
    }
}
