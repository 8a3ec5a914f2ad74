use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use cubeshift::embedding::{run_pipeline, EmbedConfig, PipelineError, PipelineReport};
use cubeshift::Rational;

use crate::output::{Computed, Table};
use crate::plot::{self, Chart, Mark};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Exact,
    /// `f64` throughout; fast, but the certificate is only indicative.
    Float,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    arithmetic: Arithmetic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedInputs {
    pub config: EmbedConfig,
    pub arithmetic: Arithmetic,
}

/// Reads and validates a config file. Unknown keys are rejected.
pub fn load_config(path: &PathBuf) -> Result<EmbedConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: EmbedConfig = serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    cfg.validate().with_context(|| format!("invalid config {}", path.display()))?;
    Ok(cfg)
}

impl EmbedArgs {
    /// The inputs and the output directory named in the config.
    pub fn inputs(&self) -> Result<(EmbedInputs, Option<String>)> {
        let mut config = load_config(&self.config)?;
        let out = config.output_dir.take();
        Ok((EmbedInputs { config, arithmetic: self.arithmetic }, out))
    }
}

pub fn compute(i: &EmbedInputs) -> Result<Computed> {
    let outcome = match i.arithmetic {
        Arithmetic::Exact => run_pipeline::<Rational>(&i.config).map(|r| r.report),
        Arithmetic::Float => run_pipeline::<f64>(&i.config).map(|r| r.report),
    };
    let (report, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) if e.certification => {
            let PipelineError { stage, message, witness, report, .. } = e;
            (report.map(|b| *b), Some(json!({ "stage": stage, "message": message, "witness": witness })))
        }
        Err(e) => bail!("{e}"),
    };
    let certified = error.is_none() && report.as_ref().is_some_and(|r| r.certified);
    let mut warnings = report.as_ref().map(|r| r.warnings.clone()).unwrap_or_default();
    if i.arithmetic == Arithmetic::Float {
        warnings.push("floating point run: the certificate is indicative only".into());
    }
    let mut summary = match &report {
        Some(r) => r.render_text(),
        None => String::new(),
    };
    if let Some(e) = &error {
        summary.push_str(&format!("certification failed: {e}\n"));
    }
    Ok(Computed {
        table: report.as_ref().map(worst_pairs),
        plot: report.as_ref().map(scatter),
        text: Some(summary.clone()),
        results: json!({ "certified": certified, "report": report, "error": error }),
        warnings,
        passed: certified,
        summary: summary.trim_end().to_string(),
    })
}

fn worst_pairs(r: &PipelineReport) -> Table {
    let rows = r.certificate.iter().flat_map(|c| {
        c.worst_pairs.iter().map(|p| {
            vec![format!("{}-{}", p.a, p.b), p.dist_x.clone(), p.separation.clone(), p.tower.to_string(), p.level.to_string()]
        })
    });
    Table { header: vec!["pair", "dist_x", "weighted_separation", "tower", "level"], rows: rows.collect() }
}

fn scatter(r: &PipelineReport) -> String {
    let points = r.certificate.as_ref().map(|c| c.separations.clone()).unwrap_or_default();
    plot::chart(&Chart {
        title: "same-fiber pairs: separation against distance",
        x_label: "dist_X",
        y_label: "weighted separation over W",
        points: &points,
        mark: Mark::Dots,
    })
}
