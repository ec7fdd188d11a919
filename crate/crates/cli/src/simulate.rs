//! `simulate`: every (trial, schedule) pair of a resolved configuration.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::Trial;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.toml";

/// One recovery run. Seeds index the streams documented in
/// [`crate::experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: usize,
    pub seed: u64,
    pub prior_seed: u64,
    pub operator_seed: u64,
    pub signal_seed: u64,
    pub schedule_index: usize,
    pub schedule: String,
    pub file: String,
    pub problem_hash: String,
    pub true_component: Option<usize>,
    pub final_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: String,
    pub runs: Vec<RunRecord>,
    /// Every file written, including the manifest itself.
    pub files: Vec<String>,
}

pub fn trace_file_name(trial: usize, schedule_index: usize, kind: &str) -> String {
    format!("trial{trial:03}_s{schedule_index}_{kind}.csv")
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Runs the experiment in a pool of `threads` workers (0: available
/// parallelism) and writes traces, the resolved configuration and the
/// manifest to `out`.
pub fn simulate(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<Manifest, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let seeds = cfg.seeds();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;

    let per_trial: Vec<Result<Vec<RunRecord>, CliError>> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(trial, &seed)| run_trial(cfg, out, trial, seed))
            .collect()
    });
    let mut runs = Vec::new();
    for r in per_trial {
        runs.extend(r?);
    }

    write(&out.join(RESOLVED_CONFIG_FILE), &cfg.to_toml())?;
    let mut files: Vec<String> = runs.iter().map(|r| r.file.clone()).collect();
    files.push(RESOLVED_CONFIG_FILE.into());
    files.push(MANIFEST_FILE.into());
    files.sort();
    let manifest = Manifest {
        config: RESOLVED_CONFIG_FILE.into(),
        runs,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Other(e.to_string()))?;
    write(&out.join(MANIFEST_FILE), &(json + "\n"))?;
    Ok(manifest)
}

fn run_trial(cfg: &ExperimentConfig, out: &Path, trial: usize, seed: u64) -> Result<Vec<RunRecord>, CliError> {
    let label = format!("trial {trial} (seed {seed})");
    let t = Trial::build(cfg, seed).map_err(|e| CliError::from_core(&label, e))?;
    let prior_seed = match &cfg.prior {
        crate::config::PriorConfig::Lrgmm { seed: Some(s), .. } => *s,
        _ => seed,
    };
    let operator_seed = cfg.sensing.seed.unwrap_or(seed);
    let mut records = Vec::with_capacity(cfg.schedules.len());
    for (idx, sched) in cfg.schedules.iter().enumerate() {
        let name = sched.kind.name();
        let run_label = format!("{label}, schedule {idx} ({name})");
        let trace = t.run(cfg, idx).map_err(|e| CliError::from_core(&run_label, e))?;
        let file = trace_file_name(trial, idx, name);
        write(&out.join(&file), &trace.to_csv_string())?;
        records.push(RunRecord {
            trial,
            seed,
            prior_seed,
            operator_seed,
            signal_seed: seed,
            schedule_index: idx,
            schedule: trace.header.schedule.clone(),
            file,
            problem_hash: trace.header.problem_hash.clone(),
            true_component: t.true_component,
            final_mse: trace.final_mse().unwrap_or(f64::NAN),
        });
    }
    Ok(records)
}

pub fn resolve_output(cfg: &ExperimentConfig, out_flag: Option<&Path>) -> PathBuf {
    out_flag.map(Path::to_path_buf).unwrap_or_else(|| cfg.run.output.clone())
}
