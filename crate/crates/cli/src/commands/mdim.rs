use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use cubeshift::scalar::{approx, format_rational, parse_rational, serde_rational};
use cubeshift::systems::MetricConfig;
use cubeshift::widim::mdim_curve;
use cubeshift::Rational;

use crate::output::{Computed, Table};
use crate::plot::{self, Chart, Mark};

#[derive(Args, Debug)]
pub struct MdimArgs {
    #[arg(long, value_parser = parse_rational)]
    epsilon: Rational,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Largest interval length n.
    #[arg(long, default_value_t = 16)]
    n_max: usize,
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    c_ratio: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdimInputs {
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    pub k: usize,
    pub n_max: usize,
    pub metric: MetricConfig,
}

impl MdimArgs {
    pub fn inputs(&self) -> Result<MdimInputs> {
        Ok(MdimInputs {
            epsilon: self.epsilon.clone(),
            k: self.k,
            n_max: self.n_max,
            metric: MetricConfig::new(self.c_ratio.clone())?,
        })
    }
}

pub fn compute(i: &MdimInputs) -> Result<Computed> {
    let curve = mdim_curve(&i.epsilon, i.k, &i.metric, i.n_max)?;
    let rows: Vec<(usize, Rational, Rational)> =
        curve.into_iter().map(|(n, q)| (n, &q * Rational::from_integer((n as i64).into()), q)).collect();
    let table = Table {
        header: vec!["n", "phi", "phi_over_n", "phi_over_n_approx"],
        rows: rows
            .iter()
            .map(|(n, p, q)| vec![n.to_string(), format_rational(p), format_rational(q), approx(q).to_string()])
            .collect(),
    };
    let points: Vec<(f64, f64)> = rows.iter().map(|(n, _, q)| (*n as f64, approx(q))).collect();
    let plot = plot::chart(&Chart {
        title: &format!("phi(0..n-1)/n at eps = {}, k = {}", format_rational(&i.epsilon), i.k),
        x_label: "n",
        y_label: "phi / n",
        points: &points,
        mark: Mark::Line,
    });
    let last = rows.last().map(|(n, _, q)| format!("phi/n at n = {n}: {}", format_rational(q))).unwrap_or_default();
    let results = json!({
        "curve": rows.iter().map(|(n, p, q)| json!({
            "n": n,
            "phi": format_rational(p),
            "phi_over_n": format_rational(q),
        })).collect::<Vec<_>>(),
        "estimator": "greedy",
    });
    Ok(Computed {
        results,
        warnings: Vec::new(),
        passed: true,
        table: Some(table),
        plot: Some(plot),
        text: None,
        summary: format!("{} values of phi/n; {last}", rows.len()),
    })
}
