use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hlt_core::reports::{BoundReport, CACHE_ENV, CONFIG_SCHEMA, REPORT_SCHEMA};
use serde_json::Value;

fn hlt(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hlt"));
    cmd.args(args).env_remove(CACHE_ENV);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("run hlt")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(out: &Path, command: &str) -> (Value, BoundReport) {
    let text = fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    (serde_json::from_str(&text).unwrap(), serde_json::from_str(&text).unwrap())
}

fn assert_schema_valid(schema: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(schema).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema errors: {errors:?}");
}

const SMALL_VERIFY: &str = r#"
schema_version = 1
[verify]
grid = { d = 1, n = 32, L = 8.0, stagger = true }
s = 0.3
[verify.hlt]
count = 8
"#;

#[test]
fn fast_commands_exit_zero_with_valid_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for cmd in ["constants", "remainder", "hlt", "br"] {
        let o = hlt(&[cmd, "--out", out.to_str().unwrap(), "--jobs", "2", "--no-cache"], &[]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let (json, rep) = report(&out, cmd);
        assert_schema_valid(REPORT_SCHEMA, &json);
        assert_eq!(rep.command, cmd);
        assert!(rep.failures().is_empty());
        let csv = fs::read_to_string(out.join(&rep.table.file)).unwrap();
        assert_eq!(csv.lines().count(), rep.table.rows + 1, "{cmd}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hlt(&["constants", "--out", out.to_str().unwrap(), "--seed", "99"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out, "constants").1.seed, 99);
}

#[test]
fn sweep_rows_follow_config_order() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = [
        (1, 0.1),
        (1, 0.25),
        (1, 0.4),
        (2, 0.2),
        (2, 0.5),
        (2, 0.75),
        (2, 0.9),
        (3, 0.25),
        (3, 0.5),
        (3, 1.0),
        (3, 1.25),
        (3, 1.4),
    ];
    let list: Vec<String> = pairs.iter().map(|(d, s)| format!("[{d}, {s}]")).collect();
    let cfg = write_config(
        dir.path(),
        &format!("schema_version = 1\n[constants]\npairs = [{}]\npsi_grid = 128\n", list.join(", ")),
    );
    let out = dir.path().join("out");
    let o = hlt(&["constants", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("constants.csv")).unwrap();
    let rows: Vec<(u32, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows, pairs.to_vec());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for body in [
        "schema_version = 1\nunknown_key = 3\n",
        "schema_version = 99\n",
        "schema_version = 1\n[constants]\npairs = [[3, \n",
        "schema_version = 1\n[constants]\npairs = [[3, 2.0]]\n",
    ] {
        let cfg = write_config(dir.path(), body);
        let o = hlt(&["constants", "--config", &cfg, "--out", out], &[]);
        assert_eq!(o.status.code(), Some(2), "config {body:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = hlt(&["constants", "--config", "/nonexistent/cfg.toml", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn understated_constant_is_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL_VERIFY}l0 = {{ kind = \"semiclassical\", multiplier = 1e-9 }}\n"),
    );
    let out = dir.path().join("out");
    let o = hlt(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--no-cache"], &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let (json, rep) = report(&out, "verify");
    assert_schema_valid(REPORT_SCHEMA, &json);
    assert!(rep.failures().iter().any(|v| v.check == "hlt"));
}

#[test]
fn zero_shift_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "schema_version = 1\n[verify]\ngrid = { d = 1, n = 16, L = 4.0, stagger = true }\n[verify.magnetic]\nsizes = [8]\nflux_eighths = [1]\ntau = 0.0\ntransfer_samples = 2\n",
    );
    let o = hlt(&["verify", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn cache_hit_reproduces_report_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("spectra");
    let cfg = write_config(dir.path(), SMALL_VERIFY);
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}"));
        let o = hlt(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()], &[(CACHE_ENV, &cache)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.join("cache").exists(), "env override ignored");
        reports.push(report(&out, "verify").1);
    }
    assert_eq!(reports[0].timing.cache_hits, 0);
    assert!(reports[1].timing.cache_hits >= 8);
    assert_eq!(reports[1].timing.cache_misses, 0);
    assert_eq!(reports[0].without_timing(), reports[1].without_timing());
    assert!(fs::read_dir(&cache).unwrap().count() >= 8);
}

#[test]
fn shipped_configs_match_config_schema() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let doc: toml::Value = toml::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
            assert_schema_valid(CONFIG_SCHEMA, &serde_json::to_value(doc).unwrap());
            seen += 1;
        }
    }
    assert!(seen > 0);
}
