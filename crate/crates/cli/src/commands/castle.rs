use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cubeshift::castle::{
    odometer_castle, returnword_castle, verify_castle, window_tiling, Castle, CylinderSet, SamplePoints,
    SubshiftPoint, VerifyMode,
};
use cubeshift::scalar::{format_rational, parse_rational, serde_rational};
use cubeshift::systems::SubstitutionSystem;
use cubeshift::{FiniteWindow, InvarianceParams, Rational};

use crate::output::{Computed, Table};

#[derive(Subcommand, Debug)]
pub enum CastleCmd {
    /// Build an odometer castle of a given level or a return-word castle.
    Build(BuildArgs),
    /// Check disjointness, covering and invariance of a castle file.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Odometer,
    Fibonacci,
    /// Rules given with `--rules`.
    Substitution,
}

#[derive(Args, Debug)]
pub struct SubstitutionArgs {
    #[arg(long, value_enum, default_value = "odometer")]
    system: SystemArg,
    /// Substitution rules, e.g. `a=ab,b=a`.
    #[arg(long)]
    rules: Option<String>,
    /// Length of the fixed-point prefix scanned.
    #[arg(long, default_value_t = 2000)]
    horizon: usize,
}

impl SubstitutionArgs {
    fn system(&self) -> Result<Option<SubstitutionSystem>> {
        match (self.system, &self.rules) {
            (SystemArg::Odometer, None) => Ok(None),
            (SystemArg::Fibonacci, None) => Ok(Some(SubstitutionSystem::fibonacci())),
            (SystemArg::Substitution, Some(r)) => Ok(Some(parse_rules(r)?)),
            (SystemArg::Substitution, None) => bail!("--system substitution needs --rules"),
            (_, Some(_)) => bail!("--rules only applies to --system substitution"),
        }
    }
}

fn parse_rules(s: &str) -> Result<SubstitutionSystem> {
    let mut rules = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, img) = part.split_once('=').ok_or_else(|| anyhow!("rule `{part}` is not of the form a=word"))?;
        let mut chars = a.trim().chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            bail!("rule `{part}` must rewrite a single symbol");
        };
        if rules.insert(c, img.trim().to_string()).is_some() {
            bail!("symbol {c:?} has two rules");
        }
    }
    Ok(SubstitutionSystem::new(rules)?)
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    system: SubstitutionArgs,
    /// Odometer level n (one tower of height 2^n).
    #[arg(long)]
    level: Option<u32>,
    /// Word whose return words define the towers.
    #[arg(long)]
    word: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildInputs {
    pub level: Option<u32>,
    pub word: Option<String>,
    pub substitution: Option<SubstitutionSystem>,
    pub horizon: usize,
}

impl BuildArgs {
    pub fn inputs(&self) -> Result<BuildInputs> {
        let substitution = self.system.system()?;
        match (&substitution, self.level, &self.word) {
            (None, Some(_), None) | (Some(_), None, Some(_)) => {}
            (None, _, _) => bail!("an odometer castle needs --level and no --word"),
            (Some(_), _, _) => bail!("a return-word castle needs --word and no --level"),
        }
        Ok(BuildInputs { level: self.level, word: self.word.clone(), substitution, horizon: self.system.horizon })
    }
}

fn castle_table(c: &Castle) -> Table {
    Table {
        header: vec!["tower", "base", "shape_min", "shape_max", "size"],
        rows: c
            .towers
            .iter()
            .enumerate()
            .map(|(i, t)| {
                vec![
                    i.to_string(),
                    t.base.to_string(),
                    t.shape.min().unwrap_or_default().to_string(),
                    t.shape.max().unwrap_or_default().to_string(),
                    t.shape.len().to_string(),
                ]
            })
            .collect(),
    }
}

pub fn build(i: &BuildInputs) -> Result<Computed> {
    let (castle, return_words) = match (&i.substitution, i.level, &i.word) {
        (None, Some(n), _) => (odometer_castle(n)?, Value::Null),
        (Some(s), _, Some(w)) => {
            let rw = s.return_words(w, i.horizon)?;
            (returnword_castle(s, w, i.horizon)?, serde_json::to_value(rw)?)
        }
        _ => bail!("castle inputs name neither a level nor a word"),
    };
    let summary = format!("{} tower(s), {} levels, shape sizes {:?}", castle.len(), castle.level_count(), castle.shapes().map(|s| s.len()).collect::<Vec<_>>());
    Ok(Computed {
        results: json!({ "castle": castle, "return_words": return_words, "levels": castle.level_count() }),
        warnings: Vec::new(),
        passed: true,
        table: Some(castle_table(&castle)),
        plot: None,
        text: None,
        summary,
    })
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Castle JSON, either bare or the report written by `castle build`.
    #[arg(long)]
    castle: PathBuf,
    /// Invariance set K.
    #[arg(long, allow_hyphen_values = true, default_value = "-1..1")]
    k: FiniteWindow,
    #[arg(long, value_parser = parse_rational)]
    delta: Rational,
    /// Subshift used to sample points for word castles.
    #[command(flatten)]
    system: SubstitutionArgs,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyInputs {
    pub castle: Castle,
    pub k: FiniteWindow,
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    pub substitution: Option<SubstitutionSystem>,
    pub horizon: usize,
}

impl VerifyArgs {
    pub fn inputs(&self) -> Result<VerifyInputs> {
        let text = std::fs::read_to_string(&self.castle).with_context(|| format!("reading {}", self.castle.display()))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", self.castle.display()))?;
        let castle_json = match v.pointer("/results/castle") {
            Some(c) => c.clone(),
            None => v,
        };
        let castle: Castle = serde_json::from_value(castle_json).with_context(|| format!("{} is not a castle", self.castle.display()))?;
        let mut substitution = self.system.system()?;
        let words = castle.towers.iter().all(|t| matches!(t.base, CylinderSet::SubshiftWord(_)));
        if words && substitution.is_none() {
            substitution = Some(SubstitutionSystem::fibonacci());
        }
        Ok(VerifyInputs { castle, k: self.k.clone(), delta: self.delta.clone(), substitution, horizon: self.system.horizon })
    }
}

pub fn verify(i: &VerifyInputs) -> Result<Computed> {
    let p = InvarianceParams::new(i.k.clone(), i.delta.clone())?;
    let c = &i.castle;
    let odometer = c.towers.iter().all(|t| matches!(t.base.inner_most(), CylinderSet::OdometerDigits(_)));
    let words = c.towers.iter().all(|t| matches!(t.base, CylinderSet::SubshiftWord(_)));
    let (report, tiling) = if odometer {
        (verify_castle(c, VerifyMode::Exact, &p)?, None)
    } else if words {
        let s = i.substitution.as_ref().ok_or_else(|| anyhow!("word castles need a substitution"))?;
        let text: Arc<str> = s.fixed_word(s.fixed_point_seed('a')?, i.horizon)?.into();
        let longest = c.towers.iter().map(|t| match &t.base {
            CylinderSet::SubshiftWord(w) => w.len() as i64,
            _ => 0,
        });
        let longest = longest.max().unwrap_or(0);
        let s_max = c.shapes().filter_map(|s| s.max()).max().unwrap_or(0).max(0);
        let s_min = c.shapes().filter_map(|s| s.min()).min().unwrap_or(0).min(0);
        let last = i.horizon as i64 - longest + s_min;
        if last < s_max {
            bail!("horizon {} is too short for these towers", i.horizon);
        }
        let pts: Vec<SubshiftPoint> = (s_max..=last).map(|pos| SubshiftPoint::new(text.clone(), pos)).collect();
        (verify_castle(c, VerifyMode::Sampled(SamplePoints::Subshift(&pts)), &p)?, Some(window_tiling(c, &text)?))
    } else {
        bail!("castle bases must all be odometer cylinders (or their pullbacks) or all subshift words");
    };
    let passed = report.passed();
    let summary = format!(
        "{:?} check: disjoint={} covering={} invariant={} ({} failure(s)), (K,delta) = ({}, {})",
        report.mode,
        report.disjoint,
        report.covering,
        report.invariant,
        report.failures.len(),
        i.k,
        format_rational(&i.delta)
    );
    Ok(Computed {
        results: json!({ "report": report, "tiling": tiling }),
        warnings: Vec::new(),
        passed,
        table: Some(castle_table(c)),
        plot: None,
        text: None,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_parse() {
        assert_eq!(parse_rules("a=ab, b=a").unwrap(), SubstitutionSystem::fibonacci());
        assert!(parse_rules("a=ab,a=b").is_err());
        assert!(parse_rules("ab=a").is_err());
        assert!(parse_rules("a").is_err());
    }
}
