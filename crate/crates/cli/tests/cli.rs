use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use projdiff::RecoveryTrace;
use projdiff_cli::config::ExperimentConfig;
use projdiff_cli::simulate::Manifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_projdiff"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

const SMALL: &str = r#"
[prior]
kind = "lrgmm"
d = 16
r = 2
k = 3

[sensing]
m = 10

[[schedule]]
kind = "geometric"
sigma_max = 0.5
sigma_min = 1e-4
horizon = 60

[[schedule]]
kind = "cosine"
sigma_max = 0.5
sigma_min = 1e-4
horizon = 60

[run]
n_iters = 60
trials = 3
base_seed = 5
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = run(&["simulate", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--threads", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["simulate", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--threads", "3"]);
    assert_eq!(code(&o), 0);
    let (ca, cb) = (dir_contents(&a), dir_contents(&b));
    // Only run.output differs between the two resolved configurations.
    let strip = |m: &BTreeMap<String, Vec<u8>>| -> BTreeMap<String, Vec<u8>> {
        m.iter().filter(|(k, _)| *k != "resolved_config.toml").map(|(k, v)| (k.clone(), v.clone())).collect()
    };
    assert_eq!(strip(&ca), strip(&cb));
    assert_eq!(ca.len(), 3 * 2 + 2);
}

#[test]
fn manifest_lists_every_output_and_resolved_config_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);

    let manifest: Manifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<String> = manifest.files.clone();
    let present: Vec<String> = dir_contents(&out).into_keys().collect();
    assert_eq!(listed, present);
    assert_eq!(manifest.runs.len(), 6);
    let seeds: Vec<u64> = manifest.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![5, 5, 6, 6, 7, 7]);

    let resolved = ExperimentConfig::load(&out.join("resolved_config.toml")).unwrap();
    assert_eq!(resolved.seeds(), vec![5, 6, 7]);
    assert_eq!(resolved.clone().resolve(None, None).unwrap(), resolved);

    // Re-running the resolved configuration reproduces every file.
    let again = tmp.path().join("again");
    let o = run(&["simulate", out.join("resolved_config.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (x, y) = (dir_contents(&out), dir_contents(&again));
    for (name, bytes) in &x {
        if name != "resolved_config.toml" {
            assert_eq!(Some(bytes), y.get(name), "{name} differs");
        }
    }
}

#[test]
fn seed_override_changes_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("o");
    let o = run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed-override", "40"]);
    assert_eq!(code(&o), 0);
    let resolved = ExperimentConfig::load(&out.join("resolved_config.toml")).unwrap();
    assert_eq!(resolved.seeds(), vec![40, 41, 42]);
}

#[test]
fn square_system_recovers_to_machine_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[prior]
kind = "lrgmm"
d = 12
r = 2
k = 3

[sensing]
m = 12
seed = 9

[[schedule]]
kind = "geometric"
sigma_max = 0.5
sigma_min = 1e-12
horizon = 150

[run]
n_iters = 150
trials = 2
base_seed = 1
"#;
    let cfg = write_config(tmp.path(), "c.toml", text);
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    for r in &manifest.runs {
        assert_eq!(r.operator_seed, 9);
        assert!(r.final_mse < 1e-20, "{} final mse {}", r.file, r.final_mse);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "bad.toml", &SMALL.replace("n_iters = 60", "n_iters = 61"));
    let o = run(&["simulate", bad.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizon"));

    let missing = run(&["simulate", tmp.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(code(&missing), 2);

    let diverging = write_config(tmp.path(), "div.toml", &SMALL.replace("m = 10", "m = 10\nmu = 1e200"));
    let o = run(&["simulate", diverging.to_str().unwrap(), "--out", tmp.path().join("d").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trial 0 (seed 5), schedule 0 (geometric)"));

    assert_eq!(code(&run(&["bogus"])), 2);
}

#[test]
fn check_fast_passes_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["check", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = std::fs::read_to_string(tmp.path().join("check_report.csv")).unwrap();
    assert!(report.starts_with("name,value,bound,pass\n"));
    assert!(!report.contains(",false"));
}

#[test]
fn analyze_skips_malformed_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    std::fs::write(out.join("junk.csv"), "not,a,trace\n").unwrap();
    let o = run(&["analyze", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipping junk.csv"));
    let rates = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 1 + 6);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2);

    // Running analyze again ignores its own outputs.
    assert_eq!(code(&run(&["analyze", out.to_str().unwrap()])), 0);

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    std::fs::write(empty.join("junk.csv"), "x\n").unwrap();
    assert_ne!(code(&run(&["analyze", empty.to_str().unwrap()])), 0);
}

#[test]
fn generated_models_drive_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let prior = tmp.path().join("prior.txt");
    let matrix = tmp.path().join("a.txt");
    assert_eq!(code(&run(&["gen-model", "sparse:d=8,s=2", "-o", prior.to_str().unwrap()])), 0);
    assert_eq!(code(&run(&["gen-model", "matrix:m=6,d=8,seed=2", "-o", matrix.to_str().unwrap()])), 0);
    assert!(std::fs::read_to_string(&prior).unwrap().starts_with("union d=8 K=28\n"));
    assert_eq!(code(&run(&["gen-model", "cone:d=3", "-o", prior.to_str().unwrap()])), 2);

    let text = r#"
[prior]
kind = "file"
path = "prior.txt"

[sensing]
matrix = "a.txt"

[[schedule]]
kind = "geometric"
sigma_max = 0.5
sigma_min = 1e-4
horizon = 40

[run]
n_iters = 40
trials = 2
base_seed = 3
"#;
    let cfg = write_config(tmp.path(), "c.toml", text);
    let out = tmp.path().join("o");
    let o = run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = RecoveryTrace::<f64>::read_csv(
        std::fs::read_to_string(out.join("trial000_s0_geometric.csv")).unwrap().as_bytes(),
    )
    .unwrap();
    assert_eq!(trace.header.num_components, Some(28));
    assert_eq!(trace.rows.len(), 41);
}

#[test]
fn box_prior_runs_without_model_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("kind = \"lrgmm\"\nd = 16\nr = 2\nk = 3", "kind = \"box\"\nd = 6\ns = 3\nhalf_width = 1.0")
        .replace("m = 10", "m = 6");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("o");
    let o = run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("trial000_s0_geometric.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().ends_with("weight_entropy"));
}

#[test]
fn help_documents_the_config_format() {
    let o = run(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("[[schedule]]") && text.contains("EXIT CODES"));
}
