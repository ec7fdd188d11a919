//! Invariant checks behind `projdiff check`.
//!
//! Each check returns a [`CheckRecord`] holding the worst observed value and
//! the bound it is compared with. Checks of prior evaluation take a
//! [`PriorOps`] so that deliberately broken implementations can be fed
//! through the same harness.

use std::path::PathBuf;

use projdiff::diagnostics::{detect_burn_in, fit_linear_rate, projection_gap, CheckRecord};
use projdiff::linalg::{self, Matrix};
use projdiff::{
    box_denoiser, convex_gap_curve, fit_convex_rate, gaussian_operator, gpgd_step, hard_threshold, kadkhodaie_step,
    mc_denoiser, restricted_lipschitz_estimate, ric_union, BoxSet, LrGmmPrior, NoiseSchedule, OracleProjection,
    RecoveryOptions, SeededRng, SensingProblem, Subspace, UnionOfSubspaces,
};

use crate::analyze::{summarize, trace_stats, TraceStats, CONVERGED_MSE};
use crate::config::ExperimentConfig;
use crate::experiment::Trial;

type Vector = Vec<f64>;
type Eval<T> = fn(&LrGmmPrior<f64>, &[f64], f64) -> projdiff::Result<T>;

/// The prior evaluations under test.
#[derive(Clone, Copy)]
pub struct PriorOps {
    pub denoise: Eval<Vector>,
    pub log_density: Eval<f64>,
    pub weights: Eval<Vector>,
}

impl PriorOps {
    pub fn exact() -> Self {
        Self {
            denoise: |p, x, s| Ok(p.denoiser(x, s)?.value),
            log_density: |p, x, s| p.log_density(x, s * s),
            weights: |p, x, s| p.weights(x, s * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    fn pick(self, fast: usize, full: usize) -> usize {
        match self {
            Level::Fast => fast,
            Level::Full => full,
        }
    }
}

const SEED: u64 = 0x5eed;

fn gaussian_vec(rng: &mut SeededRng, d: usize, scale: f64) -> Vector {
    (0..d).map(|_| scale * rng.gaussian()).collect()
}

/// Random mixture weights bounded away from zero.
fn random_pi(rng: &mut SeededRng, k: usize) -> Vector {
    let raw: Vector = (0..k).map(|_| rng.uniform_in(0.2, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

fn random_prior(rng: &mut SeededRng, d_max: usize, k_max: usize) -> LrGmmPrior<f64> {
    let d = 2 + rng.below(d_max - 1);
    let r = 1 + rng.below(d - 1);
    let k = 1 + rng.below(k_max);
    let union = UnionOfSubspaces::random(d, r, k, rng).expect("valid random union");
    let pi = random_pi(rng, k);
    LrGmmPrior::new(union, &pi).expect("normalised weights")
}

/// `σ² ∇ log p_σ(x)` by central differences matches `D_σ(x) − x`.
pub fn tweedie_identity(ops: &PriorOps, instances: usize) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 1);
    let mut worst = 0.0f64;
    for i in 0..instances {
        let prior = random_prior(&mut rng, 8, 4);
        let sigma = [0.1, 0.5, 1.0][i % 3];
        let d = prior.ambient_dim();
        let x = gaussian_vec(&mut rng, d, 1.0);
        let h = 1e-4 * sigma;
        let mut grad = vec![0.0; d];
        let mut xp = x.clone();
        let mut failed = false;
        for j in 0..d {
            xp[j] = x[j] + h;
            let fp = (ops.log_density)(&prior, &xp, sigma);
            xp[j] = x[j] - h;
            let fm = (ops.log_density)(&prior, &xp, sigma);
            xp[j] = x[j];
            match (fp, fm) {
                (Ok(a), Ok(b)) => grad[j] = sigma * sigma * (a - b) / (2.0 * h),
                _ => failed = true,
            }
        }
        let err = match (ops.denoise)(&prior, &x, sigma) {
            Ok(dv) if !failed => {
                let target = linalg::sub(&dv, &x);
                linalg::distance(&grad, &target) / linalg::norm(&target)
            }
            _ => f64::INFINITY,
        };
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    CheckRecord::new("tweedie_identity", worst, 1e-4, worst <= 1e-4)
}

/// Posterior weights near a component for `σ² ∈ {1e-8, 1e-10}` and
/// `‖x‖ ∈ [1, 1e3]`: finite, summing to 1 within 1e-10, with at most 1e-12
/// mass on components that do not contain `x`.
pub fn weight_stability(ops: &PriorOps, instances: usize) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 2);
    let mut failures = 0usize;
    for i in 0..instances {
        let sigma = if i % 2 == 0 { 1e-4 } else { 1e-5 };
        let prior = random_prior(&mut rng, 16, 6);
        let k = rng.below(prior.num_components());
        let comp = &prior.union().components()[k];
        let coef = gaussian_vec(&mut rng, comp.rank(), 1.0);
        let on = comp.embed(&coef).expect("rank-sized coefficients");
        let scale = 10f64.powf(rng.uniform_in(0.0, 3.0)) / linalg::norm(&on);
        let noise = gaussian_vec(&mut rng, prior.ambient_dim(), 1e-6);
        let x = linalg::add(&linalg::scale(&on, scale), &noise);
        // Components containing x (up to noise) legitimately share weight.
        let near: Vec<bool> = prior
            .union()
            .distances(&x)
            .expect("matching dimension")
            .iter()
            .map(|&dist| dist < 1e-3)
            .collect();
        let ok = match (ops.weights)(&prior, &x, sigma) {
            Ok(w) => {
                let total: f64 = w.iter().sum();
                let far_mass: f64 = w.iter().zip(&near).filter(|(_, &n)| !n).map(|(v, _)| v).sum();
                linalg::all_finite(&w) && (total - 1.0).abs() <= 1e-10 && far_mass <= 1e-12
            }
            Err(_) => false,
        };
        failures += usize::from(!ok);
    }
    CheckRecord::new("weight_stability", failures as f64, 0.0, failures == 0)
}

/// For `K = 1` the relative gap on unit vectors of the subspace is exactly
/// `σ²/(1+σ²)`.
pub fn single_component_law(ops: &PriorOps) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 3);
    let union = UnionOfSubspaces::random(12, 4, 1, &mut rng).expect("valid union");
    let prior = LrGmmPrior::uniform(union);
    let basis = prior.union().components()[0].basis().columns();
    let mut worst = 0.0f64;
    for sigma in [1e-4, 1e-2, 0.5] {
        let t = sigma * sigma;
        let mut sup = 0.0f64;
        for u in &basis {
            let gap = match (ops.denoise)(&prior, u, sigma) {
                Ok(dv) => linalg::distance(&dv, u) / linalg::norm(u),
                Err(_) => f64::INFINITY,
            };
            sup = sup.max(gap);
        }
        worst = worst.max((sup - t / (1.0 + t)).abs());
    }
    CheckRecord::new("single_component_exact_law", worst, 1e-12, worst <= 1e-12)
}

/// The off-frontier projection-error bound over random instances.
pub fn projection_gap_bound(instances: usize) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 4);
    let mut violations = 0usize;
    let mut done = 0;
    while done < instances {
        let d = 2 + rng.below(15);
        let r = 1 + rng.below(d - 1);
        let k = 2 + rng.below(5);
        let union = UnionOfSubspaces::random(d, r, k, &mut rng).expect("valid union");
        let pi = random_pi(&mut rng, k);
        let prior = LrGmmPrior::new(union, &pi).expect("normalised weights");
        let scale = rng_scale(&mut rng);
        let x = gaussian_vec(&mut rng, d, scale);
        let sigma = 10f64.powf(rng.uniform_in(-3.0, 0.5f64.log10()));
        match projection_gap(&prior, &x, sigma) {
            Ok(g) => {
                done += 1;
                violations += usize::from(g.gap > g.bound + 1e-12);
            }
            Err(_) => continue,
        }
    }
    CheckRecord::new("projection_gap_bound", violations as f64, 0.0, violations == 0)
}

fn rng_scale(rng: &mut SeededRng) -> f64 {
    10f64.powf(rng.uniform_in(-1.0, 1.0))
}

/// The score form of the iteration equals the projected-gradient form at
/// `μ = 1`.
pub fn form_equivalence(states: usize) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 5);
    let mut worst = 0.0f64;
    for _ in 0..states {
        let prior = random_prior(&mut rng, 12, 4);
        let d = prior.ambient_dim();
        let m = 1 + rng.below(d);
        let a = gaussian_operator::<f64>(m, d, &mut rng).expect("valid shape");
        let a = a.scaled(1.0 / (m as f64).sqrt());
        let y = gaussian_vec(&mut rng, m, 1.0);
        let scale = rng_scale(&mut rng);
        let x = gaussian_vec(&mut rng, d, scale);
        let sigma = 10f64.powf(rng.uniform_in(-2.0, 0.0));
        let err = match (
            gpgd_step(&prior, &a, 1.0, &y, &x, sigma),
            kadkhodaie_step(&prior, &a, &y, &x, sigma),
        ) {
            (Ok(p), Ok(q)) => linalg::distance(&p, &q) / (1.0 + linalg::norm(&x)),
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    CheckRecord::new("iteration_form_equivalence", worst, 1e-10, worst <= 1e-10)
}

/// Sparse mixture at small noise versus hard thresholding, and the exact
/// union projection versus a brute-force search over supports.
pub fn sparse_equivalence(points: usize) -> Vec<CheckRecord> {
    let (d, s) = (8, 2);
    let prior = LrGmmPrior::<f64>::sparse_gmm(d, s).expect("C(8,2) supports");
    let supports: Vec<Vec<usize>> = (0..d).flat_map(|i| (i + 1..d).map(move |j| vec![i, j])).collect();
    let mut rng = SeededRng::substream(SEED, 6);
    let (mut worst, mut mismatches, mut done) = (0.0f64, 0usize, 0);
    while done < points {
        let x = gaussian_vec(&mut rng, d, 1.0);
        let mut sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        // Tie-free: the s-th and (s+1)-th squared magnitudes are separated.
        if sq[s - 1] - sq[s] < 1e-6 {
            continue;
        }
        done += 1;
        let ht = hard_threshold(&x, s).expect("s <= d");
        let den = prior.denoiser(&x, 1e-4).expect("valid input").value;
        worst = worst.max(linalg::distance(&den, &ht));

        let proj = prior.union().project(&x, 0.0).expect("valid input").point;
        let best = supports
            .iter()
            .max_by(|a, b| {
                let na: f64 = a.iter().map(|&i| x[i] * x[i]).sum();
                let nb: f64 = b.iter().map(|&i| x[i] * x[i]).sum();
                na.total_cmp(&nb)
            })
            .expect("non-empty");
        let mut brute = vec![0.0; d];
        for &i in best {
            brute[i] = x[i];
        }
        mismatches += usize::from(proj != ht || brute != ht);
    }
    vec![
        CheckRecord::new("sparse_denoiser_vs_hard_threshold", worst, 1e-3, worst <= 1e-3),
        CheckRecord::new("sparse_projection_exact", mismatches as f64, 0.0, mismatches == 0),
    ]
}

/// The pairwise restricted isometry constant dominates every sampled secant
/// and takes its trivial values exactly.
pub fn ric_secants(secants: usize) -> Vec<CheckRecord> {
    let mut rng = SeededRng::substream(SEED, 7);
    let (d, r, k, m) = (16, 2, 5, 12);
    let union = UnionOfSubspaces::<f64>::random(d, r, k, &mut rng).expect("valid union");
    let a = gaussian_operator::<f64>(m, d, &mut rng).expect("valid shape");
    let mu = 1.0 / m as f64;
    let delta = ric_union(&a, mu, &union).expect("valid inputs");
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..secants {
        let (i, j) = (rng.below(k), rng.below(k));
        let xi = union.components()[i].embed(&gaussian_vec(&mut rng, r, 1.0)).expect("rank r");
        let xj = union.components()[j].embed(&gaussian_vec(&mut rng, r, 1.0)).expect("rank r");
        let sec = linalg::sub(&xi, &xj);
        let ns = linalg::norm_sq(&sec);
        if ns == 0.0 {
            continue;
        }
        let ratio = (mu * linalg::norm_sq(&a.matvec(&sec).expect("shape")) / ns - 1.0).abs();
        worst_excess = worst_excess.max(ratio - delta);
    }
    let identity = ric_union(&Matrix::identity(d), 1.0, &union).expect("valid inputs");
    let zero = ric_union(&Matrix::zeros(m, d), 1.0, &union).expect("valid inputs");
    vec![
        CheckRecord::new("ric_dominates_secants", worst_excess, 1e-12, worst_excess <= 1e-12),
        CheckRecord::new("ric_orthogonal_is_zero", identity, 0.0, identity == 0.0),
        CheckRecord::new("ric_zero_operator_is_one", zero, 1.0, zero == 1.0),
    ]
}

/// Closed-form box denoiser against the Monte-Carlo posterior mean; per
/// configuration `‖closed − mc‖ ≤ 3 ‖stderr‖`. Noise levels are drawn
/// relative to the half width so that uniform proposals keep a usable
/// effective sample size.
pub fn box_vs_monte_carlo(configs: usize, samples: usize) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 8);
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let d = 1 + rng.below(5);
        let s = 1 + rng.below(d);
        let hw = rng.uniform_in(0.5, 2.0);
        let b = BoxSet::centered_cube(s, d, hw).expect("valid box");
        let y = gaussian_vec(&mut rng, d, hw);
        let sigma = hw * 10f64.powf(rng.uniform_in(-0.3, 0.3));
        let exact = box_denoiser(&b, &y, sigma).expect("valid input");
        let z = match mc_denoiser(&b, &y, sigma, samples, &mut rng) {
            Ok(est) => {
                let se = linalg::norm(&est.stderr);
                let diff = linalg::distance(&exact, &est.value);
                if se > 0.0 {
                    diff / se
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(z);
    }
    CheckRecord::new("box_denoiser_vs_monte_carlo_z", worst, 3.0, worst <= 3.0)
}

/// `n` log-spaced noise levels from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, n: usize) -> Vector {
    (0..n)
        .map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Rate of the box denoiser at boundary points (slope ≥ 0.9 against
/// `σ √log(1/σ)`) and at an interior point (slope ≥ 2).
pub fn convex_rates() -> Vec<CheckRecord> {
    let grid = log_grid(1e-1, 1e-4, 13);
    let mut worst_boundary = f64::INFINITY;
    let mut rng = SeededRng::substream(SEED, 9);
    for s in [1usize, 2, 5] {
        let b = BoxSet::centered_cube(s, s, 1.0).expect("valid box");
        let corner = vec![1.0; s];
        let mut face: Vector = (0..s).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
        face[0] = -1.0;
        for y in [corner, face] {
            let curve = convex_gap_curve(&b, &y, &grid).expect("valid grid");
            let slope = fit_convex_rate(&curve).map(|f| f.slope).unwrap_or(f64::NEG_INFINITY);
            worst_boundary = worst_boundary.min(slope);
        }
    }
    let b = BoxSet::centered_cube(1, 1, 1.0).expect("valid box");
    let interior = convex_gap_curve(&b, &[0.8], &log_grid(0.1, 0.04, 7)).expect("valid grid");
    let interior_slope = fit_convex_rate(&interior).map(|f| f.slope).unwrap_or(f64::NEG_INFINITY);
    vec![
        CheckRecord::new("convex_rate_boundary_slope", worst_boundary, 0.9, worst_boundary >= 0.9),
        CheckRecord::new("convex_rate_interior_slope", interior_slope, 2.0, interior_slope >= 2.0),
    ]
}

/// Idempotence, self-adjointness, contraction and the Pythagorean identity
/// of subspace and union projections.
pub fn projection_invariants(instances: usize) -> CheckRecord {
    let mut rng = SeededRng::substream(SEED, 10);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let d = 2 + rng.below(20);
        let r = 1 + rng.below(d - 1);
        let e = Subspace::<f64>::random(d, r, &mut rng).expect("valid subspace");
        let x = gaussian_vec(&mut rng, d, 1.0);
        let z = gaussian_vec(&mut rng, d, 1.0);
        let px = e.project(&x).expect("shape");
        let ppx = e.project(&px).expect("shape");
        let pz = e.project(&z).expect("shape");
        worst = worst.max(linalg::distance(&px, &ppx));
        worst = worst.max((linalg::dot(&px, &z) - linalg::dot(&x, &pz)).abs());
        worst = worst.max((linalg::norm(&px) - linalg::norm(&x)).max(0.0));

        let union = UnionOfSubspaces::random(d, r, 1 + rng.below(4), &mut rng).expect("valid union");
        let p = union.project(&x, 1e-9).expect("shape").point;
        let lhs = linalg::norm_sq(&x);
        let rhs = linalg::norm_sq(&p) + linalg::norm_sq(&linalg::sub(&x, &p));
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    CheckRecord::new("projection_invariants", worst, 1e-9, worst <= 1e-9)
}

/// Rate fit on an exact geometric sequence and burn-in stability under
/// truncation, on an instant-recovery and a short mixture run.
pub fn trace_diagnostics() -> Vec<CheckRecord> {
    let mut rng = SeededRng::substream(SEED, 11);
    let prior = LrGmmPrior::<f64>::random_uniform(16, 2, 3, &mut rng).expect("valid prior");
    let (xt, k) = prior.sample_with_component(&mut rng);

    // A = I with the exact projection recovers x̂ after one step.
    let identity = SensingProblem::from_signal(Matrix::identity(16), xt.clone(), 1.0, 0).expect("noiseless");
    let schedule = NoiseSchedule::geometric(0.5, 1e-4, 20).expect("valid schedule");
    let mut opts = RecoveryOptions::new(20);
    opts.model = Some(prior.union());
    let oracle = OracleProjection::new(prior.union());
    let instant = projdiff::run_recovery(&identity, &oracle, &schedule, &opts).expect("finite run");
    let instant_burn = detect_burn_in(&instant, k).ok().flatten();
    let instant_mse = instant.rows[1].mse;

    let a = gaussian_operator::<f64>(12, 16, &mut rng).expect("valid shape");
    let problem = SensingProblem::with_default_step(a, xt, 0).expect("noiseless");
    let schedule = NoiseSchedule::geometric(0.5, 1e-4, 100).expect("valid schedule");
    let mut opts = RecoveryOptions::new(100);
    opts.model = Some(prior.union());
    let trace = projdiff::run_recovery(&problem, &prior, &schedule, &opts).expect("finite run");
    let prefix_ok = match detect_burn_in(&trace, k) {
        Ok(Some(nb)) => (nb..=trace.rows.len())
            .step_by(7)
            .all(|len| detect_burn_in(&trace.truncated(len.max(nb + 1)), k) == Ok(Some(nb))),
        _ => false,
    };

    let mut geometric = trace.clone();
    for row in &mut geometric.rows {
        row.mse = 0.3f64.powi(2 * row.n as i32);
    }
    let rate_err = fit_linear_rate(&geometric, 0)
        .map(|f| (f.rate - 0.3).abs())
        .unwrap_or(f64::INFINITY);

    vec![
        CheckRecord::new(
            "instant_recovery_burn_in",
            instant_burn.map_or(f64::NAN, |b| b as f64),
            1.0,
            instant_burn == Some(1) && instant_mse < 1e-30,
        ),
        CheckRecord::new("burn_in_prefix_monotone", f64::from(u8::from(prefix_ok)), 1.0, prefix_ok),
        CheckRecord::new("rate_fit_exact_geometric", rate_err, 1e-12, rate_err <= 1e-12),
    ]
}

/// Restricted isometry constant and Lipschitz estimate for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingConstants {
    pub delta: f64,
    pub beta: f64,
}

pub const LIPSCHITZ_SAMPLES: usize = 2000;

pub fn sensing_constants(trial: &Trial) -> projdiff::Result<Option<SensingConstants>> {
    let Some(union) = trial.prior.union() else {
        return Ok(None);
    };
    let delta = ric_union(&trial.problem.a, trial.problem.mu, union)?;
    let beta = restricted_lipschitz_estimate(union, LIPSCHITZ_SAMPLES, &mut SeededRng::substream(trial.seed, 3))?;
    Ok(Some(SensingConstants { delta, beta }))
}

/// Reference-experiment properties over per-run statistics. `constants`
/// maps trial seeds to their sensing constants; `q` is the per-iteration
/// ratio of the geometric schedule.
pub fn reference_checks(traces: &[TraceStats], constants: &[(u64, SensingConstants)], q: f64) -> Vec<CheckRecord> {
    use projdiff::ScheduleKind::*;
    let summaries = summarize(traces);
    let get = |k| summaries.iter().find(|s| s.kind == k);
    let mut out = Vec::new();

    let geo = get(Geometric);
    let frac = geo.map_or(0.0, |g| g.converged as f64 / g.runs as f64);
    out.push(CheckRecord::new("reference_geometric_converged_fraction", frac, 0.7, frac >= 0.7));

    let geo_median = geo.map_or(f64::INFINITY, |g| g.median_final_mse);
    let best_other = summaries
        .iter()
        .filter(|s| s.kind != Geometric)
        .map(|s| s.median_final_mse)
        .fold(f64::INFINITY, f64::min);
    let all_four = [Geometric, Linear, Cosine, InfiniteGeometric].iter().all(|&k| get(k).is_some());
    out.push(CheckRecord::new(
        "reference_geometric_lowest_median",
        geo_median,
        best_other,
        all_four && geo_median < best_other,
    ));

    let geo_burn = geo.map_or(f64::INFINITY, |g| g.mean_burn_in);
    let cos_burn = get(Cosine).map_or(f64::NEG_INFINITY, |c| c.mean_burn_in);
    out.push(CheckRecord::new(
        "reference_burn_in_geometric_le_cosine",
        geo_burn,
        cos_burn,
        geo_burn <= cos_burn,
    ));

    // Converging runs leave the frontier for good after burn-in.
    let converging: Vec<&TraceStats> = traces.iter().filter(|t| t.final_mse < CONVERGED_MSE).collect();
    let min_gap = converging
        .iter()
        .map(|t| t.min_gap_after_burn_in.unwrap_or(f64::NAN))
        .fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) });
    out.push(CheckRecord::new(
        "reference_frontier_gap_after_burn_in",
        min_gap,
        0.0,
        !converging.is_empty() && min_gap > 0.0,
    ));

    // Post-burn-in contraction against max(√(δβ̂), q)·1.1.
    let mut worst_margin = f64::NEG_INFINITY;
    let mut fitted = 0usize;
    let mut missing = 0usize;
    for t in converging.iter().filter(|t| t.kind == Geometric) {
        let c = constants.iter().find(|(s, _)| *s == t.seed).map(|(_, c)| *c);
        match (t.rate, c) {
            (Some(rate), Some(c)) => {
                fitted += 1;
                let ceiling = (c.delta * c.beta).sqrt().max(q) * 1.1;
                worst_margin = worst_margin.max(rate - ceiling);
            }
            _ => missing += 1,
        }
    }
    out.push(CheckRecord::new(
        "reference_rate_below_ceiling",
        worst_margin,
        0.0,
        fitted > 0 && missing == 0 && worst_margin <= 0.0,
    ));
    out
}

/// Runs the reference experiment in memory and evaluates
/// [`reference_checks`].
pub fn reference_experiment(trials: usize) -> projdiff::Result<Vec<CheckRecord>> {
    let cfg = ExperimentConfig::reference(trials, 1, PathBuf::from("unused"))
        .resolve(None, None)
        .map_err(|e| projdiff::Error::InvalidArgument(e.0))?;
    let mut traces = Vec::new();
    let mut constants = Vec::new();
    for seed in cfg.seeds() {
        let trial = Trial::build(&cfg, seed)?;
        if let Some(c) = sensing_constants(&trial)? {
            constants.push((seed, c));
        }
        for idx in 0..cfg.schedules.len() {
            let trace = trial.run(&cfg, idx)?;
            traces.push(trace_stats(&format!("seed{seed}_s{idx}"), &trace));
        }
    }
    let q = cfg.schedules[0]
        .build()
        .ok()
        .and_then(|s| s.geometric_ratio())
        .unwrap_or(f64::NAN);
    Ok(reference_checks(&traces, &constants, q))
}

/// Every check at the given level, in a fixed order.
pub fn run_all(level: Level) -> Vec<CheckRecord> {
    let ops = PriorOps::exact();
    let mut out = vec![
        tweedie_identity(&ops, level.pick(60, 200)),
        weight_stability(&ops, level.pick(50, 200)),
        single_component_law(&ops),
        projection_gap_bound(level.pick(1_000, 10_000)),
        form_equivalence(level.pick(30, 100)),
        projection_invariants(level.pick(200, 2_000)),
        box_vs_monte_carlo(level.pick(10, 50), level.pick(5_000, 20_000)),
    ];
    out.extend(sparse_equivalence(level.pick(200, 1_000)));
    out.extend(ric_secants(level.pick(10_000, 100_000)));
    out.extend(convex_rates());
    out.extend(trace_diagnostics());
    if level == Level::Full {
        match reference_experiment(20) {
            Ok(records) => out.extend(records),
            Err(e) => out.push(CheckRecord::new(format!("reference_experiment ({e})"), f64::NAN, 0.0, false)),
        }
    }
    out
}
