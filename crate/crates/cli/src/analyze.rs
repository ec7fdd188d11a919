//! `analyze`: burn-in, rate fits and a per-schedule comparison over a
//! directory of traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use projdiff::diagnostics::{detect_burn_in, fit_linear_rate};
use projdiff::trace::fmt17;
use projdiff::{RecoveryTrace, ScheduleKind};

use crate::error::CliError;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RATES_FILE: &str = "rates.csv";

/// Final mse below which a run counts as converged in the summary.
pub const CONVERGED_MSE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStats {
    pub file: String,
    pub schedule: String,
    pub kind: ScheduleKind,
    pub seed: u64,
    pub n_iters: usize,
    pub burn_in: Option<usize>,
    pub rate: Option<f64>,
    pub r2: Option<f64>,
    pub final_mse: f64,
    /// `min_{n ≥ n*}` of the frontier gap.
    pub min_gap_after_burn_in: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSummary {
    pub schedule: String,
    pub kind: ScheduleKind,
    pub runs: usize,
    pub mean_final_mse: f64,
    pub median_final_mse: f64,
    pub converged: usize,
    /// Runs without a burn-in count as `n_iters + 1`.
    pub mean_burn_in: f64,
    pub identified: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Analysis {
    pub traces: Vec<TraceStats>,
    pub summaries: Vec<ScheduleSummary>,
    pub skipped: Vec<(String, String)>,
}

impl Analysis {
    pub fn summary(&self, kind: ScheduleKind) -> Option<&ScheduleSummary> {
        self.summaries.iter().find(|s| s.kind == kind)
    }
}

pub fn trace_stats(file: &str, trace: &RecoveryTrace<f64>) -> TraceStats {
    let burn_in = trace
        .header
        .true_component
        .and_then(|k| detect_burn_in(trace, k).ok().flatten());
    let fit = burn_in.and_then(|n| fit_linear_rate(trace, n).ok());
    let min_gap = burn_in.map(|nb| {
        trace
            .rows
            .iter()
            .filter(|r| r.n >= nb)
            .map(|r| r.frontier_gap)
            .fold(f64::INFINITY, f64::min)
    });
    TraceStats {
        file: file.to_string(),
        schedule: trace.header.schedule.clone(),
        kind: trace.header.schedule_kind,
        seed: trace.header.seed,
        n_iters: trace.header.n_iters,
        burn_in,
        rate: fit.map(|f| f.rate),
        r2: fit.map(|f| f.r2),
        final_mse: trace.final_mse().unwrap_or(f64::NAN),
        min_gap_after_burn_in: min_gap,
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn summarize(traces: &[TraceStats]) -> Vec<ScheduleSummary> {
    let mut groups: BTreeMap<(ScheduleKind, &str), Vec<&TraceStats>> = BTreeMap::new();
    for t in traces {
        groups.entry((t.kind, t.schedule.as_str())).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((kind, schedule), ts)| {
            let n = ts.len() as f64;
            let mut finals: Vec<f64> = ts.iter().map(|t| t.final_mse).collect();
            ScheduleSummary {
                schedule: schedule.to_string(),
                kind,
                runs: ts.len(),
                mean_final_mse: finals.iter().sum::<f64>() / n,
                median_final_mse: median(&mut finals),
                converged: ts.iter().filter(|t| t.final_mse < CONVERGED_MSE).count(),
                mean_burn_in: ts
                    .iter()
                    .map(|t| t.burn_in.unwrap_or(t.n_iters + 1) as f64)
                    .sum::<f64>()
                    / n,
                identified: ts.iter().filter(|t| t.burn_in.is_some()).count(),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

pub fn rates_csv(traces: &[TraceStats]) -> String {
    let mut s = String::from("file,schedule_kind,seed,burn_in,rate,r2,final_mse,min_frontier_gap\n");
    for t in traces {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            t.file,
            t.kind,
            t.seed,
            t.burn_in.map(|b| b.to_string()).unwrap_or_default(),
            opt(t.rate),
            opt(t.r2),
            fmt17(t.final_mse),
            opt(t.min_gap_after_burn_in)
        );
    }
    s
}

pub fn summary_csv(summaries: &[ScheduleSummary]) -> String {
    let mut s = String::from(
        "schedule_kind,schedule,runs,mean_final_mse,median_final_mse,converged,mean_burn_in,identified\n",
    );
    for m in summaries {
        let _ = writeln!(
            s,
            "{},\"{}\",{},{},{},{},{},{}",
            m.kind,
            m.schedule,
            m.runs,
            fmt17(m.mean_final_mse),
            fmt17(m.median_final_mse),
            m.converged,
            fmt17(m.mean_burn_in),
            m.identified
        );
    }
    s
}

/// Analyzes every `*.csv` trace in `dir` (sorted by name), skipping files
/// that are not v1 traces, and writes `summary.csv` and `rates.csv` there.
pub fn analyze(dir: &Path) -> Result<Analysis, CliError> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .filter(|p| {
            let name = p.file_name().unwrap_or_default();
            name != SUMMARY_FILE && name != RATES_FILE
        })
        .collect();
    entries.sort();

    let mut analysis = Analysis::default();
    for path in entries {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let parsed = std::fs::File::open(&path)
            .map_err(|e| e.to_string())
            .and_then(|f| RecoveryTrace::<f64>::read_csv(std::io::BufReader::new(f)).map_err(|e| e.to_string()));
        match parsed {
            Ok(trace) => analysis.traces.push(trace_stats(&name, &trace)),
            Err(msg) => {
                eprintln!("warning: skipping {name}: {msg}");
                analysis.skipped.push((name, msg));
            }
        }
    }
    if analysis.traces.is_empty() {
        return Err(CliError::Other(format!("no readable traces in {}", dir.display())));
    }
    analysis.summaries = summarize(&analysis.traces);
    for (file, body) in [(SUMMARY_FILE, summary_csv(&analysis.summaries)), (RATES_FILE, rates_csv(&analysis.traces))] {
        let p = dir.join(file);
        std::fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(analysis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
