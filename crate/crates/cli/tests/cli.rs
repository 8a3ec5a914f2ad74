use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use cubeshift::embedding::EmbedConfig;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cubeshift(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubeshift"))
        .args(args)
        .env("CUBESHIFT_OUT_DIR", out)
        .current_dir(root())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Files written by a run, in the order printed.
fn written(o: &Output) -> Vec<PathBuf> {
    stdout(o).lines().filter_map(|l| l.strip_prefix("wrote ")).map(PathBuf::from).collect()
}

fn json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn with_ext<'a>(files: &'a [PathBuf], ext: &str) -> Option<&'a PathBuf> {
    files.iter().find(|p| p.extension().is_some_and(|e| e == ext))
}

#[test]
fn mdim_writes_curve_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = cubeshift(dir.path(), &["mdim", "--epsilon", "1/2", "--k", "1", "--n-max", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let files = written(&o);
    let csv = std::fs::read_to_string(with_ext(&files, "csv").unwrap()).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n,phi,phi_over_n,phi_over_n_approx");
    assert_eq!(rows.len(), 17);
    // φ({0..n−1}) = n + 2 at ε = 1/2.
    for (n, row) in rows[1..].iter().enumerate() {
        let n = n + 1;
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], n.to_string());
        assert_eq!(cells[1], (n + 2).to_string());
    }
    assert!(std::fs::read_to_string(with_ext(&files, "svg").unwrap()).unwrap().contains("<polyline"));
    let report = json(with_ext(&files, "json").unwrap());
    assert_eq!(report["command"], "mdim");
    assert_eq!(report["results"]["curve"][15]["phi_over_n"], "9/8");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cubeshift(dir.path(), &["mdim", "--epsilon", "1/2", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(cubeshift(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(cubeshift(dir.path(), &["widim", "--epsilon", "1/0", "--window", "0..1"]).status.code(), Some(1));
    assert_eq!(cubeshift(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn widim_reports_value_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = cubeshift(dir.path(), &["widim", "--epsilon", "5/8", "--window", "0", "--k", "2", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let files = written(&o);
    assert_eq!(files.len(), 1, "svg and csv only on request");
    let r = json(&files[0]);
    assert_eq!(r["results"]["value"], 2);
    assert_eq!(r["results"]["kind"], "exact");
    assert_eq!(r["results"]["witness_check"]["covers"], true);
    assert!(!r["results"]["witness_boxes"].as_array().unwrap().is_empty());

    let o = cubeshift(dir.path(), &["widim", "--epsilon", "1/2", "--window", "-1..1", "--mode", "greedy", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&written(&o)[0]);
    assert_eq!(r["results"]["value"], 5);
    assert_eq!(r["results"]["kind"], "upper_bound");
}

#[test]
fn castle_build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let o = cubeshift(dir.path(), &["castle", "build", "--system", "odometer", "--level", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let built = written(&o)[0].clone();
    assert_eq!(json(&built)["results"]["castle"]["towers"][0]["shape"].as_array().unwrap().len(), 8);
    let path = built.to_str().unwrap();

    let ok = cubeshift(dir.path(), &["castle", "verify", "--castle", path, "--k", "-1..1", "--delta", "1/4"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&written(&ok)[0])["results"]["report"]["mode"], "exact_cylinders");
    // |∂S| / |S| = 2/8 exceeds 1/8: ran correctly, check failed.
    let bad = cubeshift(dir.path(), &["castle", "verify", "--castle", path, "--delta", "1/8"]);
    assert_eq!(bad.status.code(), Some(2));

    let o = cubeshift(dir.path(), &["castle", "build", "--system", "fibonacci", "--word", "ab"]);
    assert_eq!(o.status.code(), Some(0));
    let words = written(&o)[0].clone();
    let ok = cubeshift(dir.path(), &["castle", "verify", "--castle", words.to_str().unwrap(), "--delta", "1", "--system", "fibonacci"]);
    assert_eq!(ok.status.code(), Some(0));
    let r = json(&written(&ok)[0]);
    assert_eq!(r["results"]["report"]["mode"], "sampled");
    assert_eq!(r["results"]["tiling"]["overlaps"], 0);
}

#[test]
fn shipped_config_is_the_demo_and_matches_the_schema() {
    let text = std::fs::read_to_string(root().join("configs/demo.json")).unwrap();
    let cfg: EmbedConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, EmbedConfig::demo());

    let schema: Value = serde_json::from_str(&std::fs::read_to_string(root().join("docs/config.schema.json")).unwrap()).unwrap();
    let validator = jsonschema::JSONSchema::compile(&schema).unwrap();
    let as_written: Value = serde_json::from_str(&text).unwrap();
    assert!(validator.is_valid(&as_written));
    // The serialised form, with every default spelled out, validates too.
    assert!(validator.is_valid(&serde_json::to_value(EmbedConfig::demo()).unwrap()));
    let mut extra = as_written.clone();
    extra["castle"]["bogus"] = Value::from(1);
    assert!(!validator.is_valid(&extra));
    assert!(serde_json::from_value::<EmbedConfig>(extra).is_err());
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(root().join("configs/demo.json")).unwrap()).unwrap();
    v["extra"] = Value::from(true);
    std::fs::write(&cfg, v.to_string()).unwrap();
    let o = cubeshift(dir.path(), &["embed", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));
}

#[test]
fn demo_embedding_certifies_reproducibly() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = cubeshift(a.path(), &["embed", "--config", "configs/demo.json", "--format", "csv,svg,txt"]);
    assert_eq!(first.status.code(), Some(0), "{}{}", stdout(&first), String::from_utf8_lossy(&first.stderr));
    let files = written(&first);
    let exts: Vec<_> = files.iter().map(|p| p.extension().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(exts, ["json", "csv", "svg", "txt"]);
    let report = json(&files[0]);
    assert_eq!(report["passed"], true);
    assert_eq!(report["results"]["certified"], true);
    assert_eq!(report["results"]["report"]["certificate"]["violations"].as_array().unwrap().len(), 0);
    let csv = std::fs::read_to_string(&files[1]).unwrap();
    assert!(csv.starts_with("pair,dist_x,weighted_separation,tower,level\n"));
    assert_eq!(csv.lines().count(), 11);

    let second = cubeshift(b.path(), &["embed", "--config", "configs/demo.json"]);
    let again = written(&second);
    assert_eq!(files[0].file_name(), again[0].file_name());
    assert_eq!(std::fs::read(&files[0]).unwrap(), std::fs::read(&again[0]).unwrap());

    let v = cubeshift(b.path(), &["verify", files[0].to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert_eq!(json(&written(&v)[0])["results"]["reproduced"], true);

    // A tampered report is not reproduced.
    let mut tampered = report.clone();
    tampered["results"]["report"]["epsilon"] = Value::from("1/8");
    let t = b.path().join("tampered.json");
    std::fs::write(&t, serde_json::to_vec(&tampered).unwrap()).unwrap();
    let v = cubeshift(b.path(), &["verify", t.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    assert_eq!(json(&written(&v)[0])["results"]["differences"][0], "/report/epsilon");
}

#[test]
fn output_directory_precedence() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let cfg_dir = tempfile::tempdir().unwrap();
    let args = ["mdim", "--epsilon", "1/2", "--n-max", "2", "--format", "json"];
    let o = cubeshift(env_dir.path(), &args);
    assert!(written(&o)[0].starts_with(env_dir.path()));
    let mut with_flag = args.to_vec();
    let flag = flag_dir.path().to_str().unwrap();
    with_flag.extend(["--out-dir", flag]);
    let o = cubeshift(env_dir.path(), &with_flag);
    assert!(written(&o)[0].starts_with(flag_dir.path()));

    // Without the variable, a config file's `output_dir` is used.
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(root().join("configs/demo.json")).unwrap()).unwrap();
    v["sample"]["count"] = Value::from(4);
    v["castle"]["level"] = Value::from(2);
    v["output_dir"] = Value::from(cfg_dir.path().to_str().unwrap());
    let cfg = cfg_dir.path().join("small.json");
    std::fs::write(&cfg, v.to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cubeshift"))
        .args(["embed", "--config", cfg.to_str().unwrap(), "--format", "json"])
        .env_remove("CUBESHIFT_OUT_DIR")
        .output()
        .unwrap();
    assert!(written(&o)[0].starts_with(cfg_dir.path()), "{}", stdout(&o));
}
