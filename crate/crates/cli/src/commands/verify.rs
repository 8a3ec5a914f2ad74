use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::output::{Computed, RunReport};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// A JSON report written by an earlier run.
    report: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyInputs {
    pub sha256: String,
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub passed: bool,
}

impl VerifyArgs {
    pub fn inputs(&self) -> Result<VerifyInputs> {
        let bytes = std::fs::read(&self.report).with_context(|| format!("reading {}", self.report.display()))?;
        let r: RunReport =
            serde_json::from_slice(&bytes).with_context(|| format!("{} is not a run report", self.report.display()))?;
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        Ok(VerifyInputs { sha256, command: r.command, inputs: r.inputs, results: r.results, passed: r.passed })
    }
}

/// JSON pointers at which `a` and `b` differ, at most `limit` of them.
pub fn differences(a: &Value, b: &Value, limit: usize) -> Vec<String> {
    fn walk(a: &Value, b: &Value, path: &str, out: &mut Vec<String>, limit: usize) {
        if out.len() >= limit || a == b {
            return;
        }
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
                for k in keys {
                    let p = format!("{path}/{}", k.replace('~', "~0").replace('/', "~1"));
                    walk(x.get(k).unwrap_or(&Value::Null), y.get(k).unwrap_or(&Value::Null), &p, out, limit);
                }
            }
            (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
                for (j, (u, v)) in x.iter().zip(y).enumerate() {
                    walk(u, v, &format!("{path}/{j}"), out, limit);
                }
            }
            _ => out.push(if path.is_empty() { "/".into() } else { path.to_string() }),
        }
    }
    let mut out = Vec::new();
    walk(a, b, "", &mut out, limit);
    out
}

pub fn compute(i: &VerifyInputs) -> Result<Computed> {
    let again = super::recompute(&i.command, &i.inputs)?;
    let diff = differences(&i.results, &again.results, 20);
    let reproduced = diff.is_empty() && again.passed == i.passed;
    let passed = reproduced && again.passed;
    let summary = match (reproduced, again.passed) {
        (true, true) => format!("{} report reproduced; checks pass", i.command),
        (true, false) => format!("{} report reproduced; its checks fail", i.command),
        (false, _) => format!("{} report NOT reproduced; {} difference(s), first at {}", i.command, diff.len(), diff.first().map_or("passed flag", String::as_str)),
    };
    Ok(Computed {
        results: json!({ "reproduced": reproduced, "checks_pass": again.passed, "differences": diff }),
        warnings: again.warnings,
        passed,
        summary,
        ..Computed::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differences_point_at_changed_leaves() {
        let a = json!({ "x": [1, 2, { "y": "a" }], "z": 1 });
        let b = json!({ "x": [1, 3, { "y": "b" }], "z": 1, "w": 0 });
        assert_eq!(differences(&a, &b, 10), ["/w", "/x/1", "/x/2/y"]);
        assert_eq!(differences(&a, &b, 1).len(), 1);
        assert!(differences(&a, &a, 10).is_empty());
        assert_eq!(differences(&json!([1]), &json!([1, 2]), 10), ["/"]);
    }
}
