//! One pass/fail line per acceptance criterion.
//!
//! Run with `cargo test -p projdiff-cli --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use projdiff::diagnostics::CheckRecord;
use projdiff_cli::analyze::analyze;
use projdiff_cli::checks::{self, reference_checks, sensing_constants, PriorOps};
use projdiff_cli::config::ExperimentConfig;
use projdiff_cli::experiment::Trial;
use projdiff_cli::simulate::simulate;

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, title: &'static str, records: &[CheckRecord], elapsed: Duration, budget: Duration) -> Outcome {
    let in_time = elapsed <= budget;
    let mut detail: Vec<String> = records
        .iter()
        .map(|r| format!("{}={:.3e} (bound {:.3e}){}", r.name, r.value, r.bound, if r.pass { "" } else { " FAILED" }))
        .collect();
    detail.push(format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs()));
    Outcome {
        id,
        title,
        pass: in_time && records.iter().all(|r| r.pass),
        detail: detail.join("; "),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn reference_experiment() -> Vec<Outcome> {
    let dir = tempfile::tempdir().expect("temporary directory");
    let t0 = Instant::now();
    let cfg = ExperimentConfig::reference(20, 1, dir.path().to_path_buf())
        .resolve(None, None)
        .expect("reference configuration is valid");
    simulate(&cfg, dir.path(), 0).expect("reference experiment runs");
    let analysis = analyze(dir.path()).expect("traces are readable");
    let mut constants = Vec::new();
    for seed in cfg.seeds() {
        let trial = Trial::build(&cfg, seed).expect("trial builds");
        constants.push((seed, sensing_constants(&trial).expect("finite constants").expect("mixture prior")));
    }
    let q = cfg.schedules[0].build().unwrap().geometric_ratio().unwrap();
    let records = reference_checks(&analysis.traces, &constants, q);
    let elapsed = t0.elapsed();
    let budget = Duration::from_secs(120);
    let pick = |names: &[&str]| -> Vec<CheckRecord> {
        records.iter().filter(|r| names.contains(&r.name.as_str())).cloned().collect()
    };
    vec![
        outcome(
            5,
            "reference experiment: convergence, median ordering, burn-in ordering",
            &pick(&[
                "reference_geometric_converged_fraction",
                "reference_geometric_lowest_median",
                "reference_burn_in_geometric_le_cosine",
            ]),
            elapsed,
            budget,
        ),
        outcome(
            6,
            "frontier gap stays positive after burn-in",
            &pick(&["reference_frontier_gap_after_burn_in"]),
            elapsed,
            budget,
        ),
        outcome(
            7,
            "post-burn-in rate below max(sqrt(delta*beta), q)*1.1",
            &pick(&["reference_rate_below_ceiling"]),
            elapsed,
            budget,
        ),
    ]
}

#[test]
fn acceptance_criteria() {
    let ops = PriorOps::exact();
    let generous = Duration::from_secs(600);
    let mut results = Vec::new();

    let (r, t) = timed(|| checks::tweedie_identity(&ops, 200));
    results.push(outcome(1, "Tweedie identity on 200 random instances", &[r], t, Duration::from_secs(10)));

    let (r, t) = timed(|| checks::single_component_law(&ops));
    results.push(outcome(2, "K=1 gap equals sigma^2/(1+sigma^2)", &[r], t, generous));

    let (r, t) = timed(|| checks::projection_gap_bound(10_000));
    results.push(outcome(3, "projection-gap bound on 10^4 off-frontier instances", &[r], t, Duration::from_secs(60)));

    let (r, t) = timed(|| checks::form_equivalence(100));
    results.push(outcome(4, "score form equals projected-gradient form at mu=1", &[r], t, generous));

    results.extend(reference_experiment());

    let (mut r, t) = timed(|| {
        let mut v = checks::convex_rates();
        v.retain(|c| c.name == "convex_rate_boundary_slope");
        v.push(checks::box_vs_monte_carlo(50, 20_000));
        v
    });
    r.sort_by(|a, b| a.name.cmp(&b.name));
    results.push(outcome(8, "convex-prior rate and box denoiser vs Monte Carlo", &r, t, generous));

    let (r, t) = timed(|| checks::sparse_equivalence(1_000));
    results.push(outcome(9, "sparse mixture vs hard thresholding", &r, t, generous));

    let (r, t) = timed(|| checks::ric_secants(100_000));
    results.push(outcome(10, "pairwise RIC dominates 10^5 sampled secants; trivial cases exact", &r, t, generous));

    results.sort_by_key(|o| o.id);
    for o in &results {
        println!(
            "[{}] criterion {}: {} -- {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail
        );
    }
    let failed: Vec<usize> = results.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
