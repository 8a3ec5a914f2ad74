use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use cubeshift::scalar::{approx, format_rational, parse_rational, serde_rational};
use cubeshift::systems::MetricConfig;
use cubeshift::widim::{reduce_to_cube, widim_exact, widim_greedy, ExactConfig, PhiMode};
use cubeshift::{ExactCube, FiniteWindow, Rational};

use crate::output::{Computed, Table};
use crate::plot;

#[derive(Args, Debug)]
pub struct WidimArgs {
    /// Scale ε, e.g. `1/2` or `2^-3`.
    #[arg(long, value_parser = parse_rational)]
    epsilon: Rational,
    /// The window F, e.g. `0..3` or `0,2,5`.
    #[arg(long, allow_hyphen_values = true)]
    window: FiniteWindow,
    /// Cube dimension of X.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// `exact` or `greedy`.
    #[arg(long, default_value = "exact")]
    mode: PhiMode,
    /// Grid resolution for the exact search.
    #[arg(long, default_value_t = 3)]
    grid: u32,
    /// Run the grid search from order 0 instead of starting at the Lebesgue bound.
    #[arg(long)]
    search: bool,
    /// Search nodes per target order before settling for an upper bound.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Ratio r of the cube weights c_n ∝ r^|n|.
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    c_ratio: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidimInputs {
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    pub window: FiniteWindow,
    pub k: usize,
    pub mode: PhiMode,
    pub exact: ExactConfig,
    pub metric: MetricConfig,
}

impl WidimArgs {
    pub fn inputs(&self) -> Result<WidimInputs> {
        let defaults = ExactConfig::default();
        Ok(WidimInputs {
            epsilon: self.epsilon.clone(),
            window: self.window.clone(),
            k: self.k,
            mode: self.mode,
            exact: ExactConfig {
                grid: self.grid,
                node_limit: self.node_limit.unwrap_or(defaults.node_limit),
                lebesgue_start: !self.search,
                ..defaults
            },
            metric: MetricConfig::new(self.c_ratio.clone())?,
        })
    }
}

pub fn compute(i: &WidimInputs) -> Result<Computed> {
    let cube: ExactCube = reduce_to_cube(&i.window, &i.epsilon, i.k, &i.metric)?;
    let r = match i.mode {
        PhiMode::Greedy => widim_greedy(&cube, &i.epsilon),
        PhiMode::Exact => widim_exact(&cube, &i.epsilon, &i.exact)?,
    };
    let check = r.check(&cube, &i.epsilon)?;
    let boxes: Option<Vec<Vec<[String; 2]>>> = r.witness_boxes().map(|c| {
        c.boxes.iter()
            .map(|b| b.sides().iter().map(|(lo, hi)| [format_rational(lo), format_rational(hi)]).collect())
            .collect()
    });
    let mut warnings = Vec::new();
    if r.stats.node_limit_hit {
        warnings.push("node budget exhausted; the value is an upper bound".to_string());
    }
    if boxes.is_none() {
        warnings.push("witness too large to list; described by its axis grids".to_string());
    }
    let passed = check.is_none_or(|c| c.certifies(r.value));

    let table = boxes.as_ref().map(|bs| Table {
        header: vec!["box", "axis", "lo", "hi"],
        rows: bs
            .iter()
            .enumerate()
            .flat_map(|(j, b)| {
                b.iter().enumerate().map(move |(a, [lo, hi])| vec![j.to_string(), a.to_string(), lo.clone(), hi.clone()])
            })
            .collect(),
    });
    let plot = match r.witness_boxes() {
        Some(c) if (1..=2).contains(&cube.dim()) => {
            let sides: Vec<Vec<(f64, f64)>> =
                c.boxes.iter().map(|b| b.sides().iter().map(|(lo, hi)| (approx(lo), approx(hi))).collect()).collect();
            Some(plot::boxes(&format!("witness cover, order {}", r.value), &sides))
        }
        _ => None,
    };
    let summary = format!(
        "widim = {} ({}), cube dimension {}, {} splitting axes, {} nodes",
        r.value,
        serde_json::to_value(r.kind)?.as_str().unwrap_or_default(),
        cube.dim(),
        cube.splitting_axes(&i.epsilon).len(),
        r.stats.nodes
    );
    let results = json!({
        "value": r.value,
        "kind": r.kind,
        "cube": {
            "dim": cube.dim(),
            "weights": cube.weights().iter().map(format_rational).collect::<Vec<_>>(),
            "labels": cube.labels(),
            "splitting_axes": cube.splitting_axes(&i.epsilon).len(),
            "effective_axes": cube.effective_axes(&i.epsilon).len(),
        },
        "witness_boxes": boxes,
        "witness_check": check,
        "stats": r.stats,
    });
    Ok(Computed { results, warnings, passed, table, plot, text: None, summary })
}
