use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_se2-nngp"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const SMALL: &str = r#"
depth = 1
widths = [1, 6]
filter_modes = [1]
sigma_w_sq = 2.0
seed = 5

[radial_grid]
count = 3
p_max = 1.5

[input]
rep_index = 0
channels = 1
mode_lo = 1
mode_hi = 1

[[input.terms]]
channel = 0
mode = 1
amplitude = [1.0, 0.0]
profile = { kind = "constant" }

[experiment]
layer = 1
draws = 40
sigma_mult = 5.0
sweep_widths = [2, 6]
seeds = [1, 2]

[gp]
layer = 1
channels = 3
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_on_bundled_config_passes() {
    let out = run(&["check", "--config", bundled("default.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "equivariance");
    assert_eq!(v["pass"], true);
    assert!(v["runtime_seconds"].is_null());
}

#[test]
fn wrong_widths_length_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &SMALL.replace("widths = [1, 6]", "widths = [1, 6, 6]"));
    let out = run(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("widths"));
}

#[test]
fn unknown_key_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "extra.toml", &SMALL.replace("seed = 5", "seed = 5\nlearning_rate = 0.1"));
    let out = run(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));

    let out = run(&["kernel", "--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = run(&["kernel"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_section_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = run(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checks"));
}

#[test]
fn converge_is_byte_deterministic_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("L,width,draws,mode,bin,analytic,empirical,std_err,rel_err,seed\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);
    // the located mode is the input mode shifted by -q
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(3) == Some("0")));

    let c = dir.path().join("c.csv");
    run(&["converge", "--config", cfg.to_str().unwrap(), "--seed", "99", "--out", c.to_str().unwrap()]);
    assert_ne!(std::fs::read(&c).unwrap(), std::fs::read(&a).unwrap());
}

#[test]
fn kernel_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = run(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["analytic"]["mode"], 0);
    assert_eq!(v["analytic"]["values"][0], 6.0);
    assert_eq!(v["empirical"]["provenance"]["draws"], 40);
    assert_eq!(v["empirical"]["provenance"]["config_digest"].as_str().unwrap().len(), 64);

    let out = run(&["kernel", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
}

#[test]
fn sample_gp_emits_a_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = run(&["sample-gp", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["channels"], 3);
    assert_eq!(v["rep_index"], 1);
    assert_eq!(v["mode_lo"], 0);
    let csv = run(&["sample-gp", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(String::from_utf8_lossy(&csv.stdout).lines().count(), 1 + 3 * 3);
}

#[test]
fn filter_check_passes_and_fault_injection_fails() {
    let ok = run(&["filter-check", "--config", bundled("default.toml").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&["filter-check", "--config", bundled("corrupted_filter.toml").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["max_dev"].as_f64().unwrap() > 0.1);
}

#[test]
fn runtime_is_recorded_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(bundled("default.toml")).unwrap().replace("record_runtime = false", "record_runtime = true");
    let cfg = write(dir.path(), "timed.toml", &text);
    let out = run(&["filter-check", "--config", cfg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["runtime_seconds"].as_f64().is_some());
}
