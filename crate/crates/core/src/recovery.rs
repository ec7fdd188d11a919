//! Generalised projected gradient descent with varying projections:
//!
//! ```text
//! x_{n+1} = P^n(x_n) − μ Aᵀ(A P^n(x_n) − y),   P^n = D_{σ_n}
//! ```
//!
//! plus the equivalent score-form update `x − (d_n + g_n)` at `μ = 1`, and
//! the driver that records a [`RecoveryTrace`].

use crate::denoise::Denoiser;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::model_sets::{frontier_gap_from_norms, UnionOfSubspaces};
use crate::schedule::NoiseSchedule;
use crate::scalar::Real;
use crate::sensing::SensingProblem;
use crate::trace::{RecoveryTrace, TraceHeader, TraceRow};

/// Iterates above this dimension are not stored unless requested.
pub const RECORD_ITERATES_MAX_DIM: usize = 256;

/// One GPGD-VP step.
pub fn gpgd_step<T: Real, D: Denoiser<T> + ?Sized>(
    denoise: &D,
    a: &Matrix<T>,
    mu: T,
    y: &[T],
    x: &[T],
    sigma: T,
) -> Result<Vec<T>> {
    let p = denoise.denoise(x, sigma)?;
    gradient_from(a, mu, y, p)
}

fn gradient_from<T: Real>(a: &Matrix<T>, mu: T, y: &[T], p: Vec<T>) -> Result<Vec<T>> {
    let resid = linalg::sub(&a.matvec(&p)?, y);
    let grad = a.matvec_t(&resid)?;
    let mut out = p;
    linalg::axpy(-mu, &grad, &mut out);
    Ok(out)
}

/// Score-form update at unit step: `x − (d + g)` with `d = Aᵀ(Ax − y)` the
/// data-fit direction and `g = (I − AᵀA)(x − D_σ(x))` the prior direction.
pub fn kadkhodaie_step<T: Real, D: Denoiser<T> + ?Sized>(
    denoise: &D,
    a: &Matrix<T>,
    y: &[T],
    x: &[T],
    sigma: T,
) -> Result<Vec<T>> {
    check_dim(a.cols(), x.len())?;
    let d_n = a.matvec_t(&linalg::sub(&a.matvec(x)?, y))?;
    let prior_dir = linalg::sub(x, &denoise.denoise(x, sigma)?);
    let ata_dir = a.matvec_t(&a.matvec(&prior_dir)?)?;
    let g_n = linalg::sub(&prior_dir, &ata_dir);
    Ok(x.iter()
        .zip(d_n.iter().zip(&g_n))
        .map(|(&xi, (&di, &gi))| xi - (di + gi))
        .collect())
}

/// Options for [`run_recovery`].
#[derive(Debug, Clone)]
pub struct RecoveryOptions<'a, T> {
    /// Starting point; the zero vector when `None`.
    pub x0: Option<Vec<T>>,
    pub n_iters: usize,
    /// Store every iterate in the trace. Defaults to `d ≤ 256`.
    pub record_iterates: Option<bool>,
    /// Union whose per-component distances and frontier gap are recorded.
    pub model: Option<&'a UnionOfSubspaces<T>>,
    /// Component containing the ground truth, when known.
    pub true_component: Option<usize>,
    pub prior_descriptor: String,
}

impl<T> RecoveryOptions<'_, T> {
    pub fn new(n_iters: usize) -> Self {
        Self {
            x0: None,
            n_iters,
            record_iterates: None,
            model: None,
            true_component: None,
            prior_descriptor: String::new(),
        }
    }
}

/// Runs `n_iters` GPGD-VP steps with `σ_n` from `schedule`, consuming
/// `σ_n` to produce `x_{n+1}`. Rows `0..=n_iters` are recorded; row `n`
/// holds `x_n` and `σ_n`. There is no tolerance-based early stop; a
/// non-finite iterate, error or residual aborts with [`Error::Divergence`].
pub fn run_recovery<T: Real, D: Denoiser<T> + ?Sized>(
    problem: &SensingProblem<T>,
    denoise: &D,
    schedule: &NoiseSchedule<T>,
    opts: &RecoveryOptions<'_, T>,
) -> Result<RecoveryTrace<T>> {
    let d = problem.signal_dim();
    if let Some(h) = schedule.horizon() {
        if opts.n_iters > h {
            return Err(Error::invalid(format!(
                "n_iters = {} exceeds the schedule horizon N = {h}",
                opts.n_iters
            )));
        }
    }
    if let Some(model) = opts.model {
        check_dim(d, model.ambient_dim())?;
    }
    let mut x = match &opts.x0 {
        Some(x0) => {
            check_dim(d, x0.len())?;
            x0.clone()
        }
        None => vec![T::zero(); d],
    };
    let record = opts.record_iterates.unwrap_or(d <= RECORD_ITERATES_MAX_DIM);

    let header = TraceHeader {
        problem_hash: problem_hash(problem),
        schedule: schedule.descriptor(),
        schedule_kind: schedule.kind(),
        mu: problem.mu.as_f64(),
        seed: problem.seed,
        prior: opts.prior_descriptor.clone(),
        d,
        m: problem.num_measurements(),
        n_iters: opts.n_iters,
        num_components: opts.model.map(UnionOfSubspaces::len),
        true_component: opts.true_component,
    };
    let mut rows = Vec::with_capacity(opts.n_iters + 1);

    for n in 0..=opts.n_iters {
        if !linalg::all_finite(&x) {
            return Err(Error::Divergence { n });
        }
        let sigma = schedule.sigma(n)?;
        let (p, weights) = denoise.denoise_with_weights(&x, sigma)?;
        let row = measure_row(problem, opts.model, n, sigma, &x, weights.as_deref(), record)?;
        // A finite iterate whose squared norm overflows has diverged as well.
        if !(row.mse.is_finite() && row.residual.is_finite()) {
            return Err(Error::Divergence { n });
        }
        rows.push(row);
        if n == opts.n_iters {
            break;
        }
        x = gradient_from(&problem.a, problem.mu, &problem.y, p)?;
    }
    Ok(RecoveryTrace { header, rows })
}

fn measure_row<T: Real>(
    problem: &SensingProblem<T>,
    model: Option<&UnionOfSubspaces<T>>,
    n: usize,
    sigma: T,
    x: &[T],
    weights: Option<&[T]>,
    record: bool,
) -> Result<TraceRow<T>> {
    let (mse, residual) = trace_errors(problem, x)?;
    let (distances, gap) = match model {
        Some(u) => {
            let norms = u.projection_norms_sq(x)?;
            (u.distances(x)?, frontier_gap_from_norms(&norms).1)
        }
        None => (Vec::new(), T::nan()),
    };
    Ok(TraceRow {
        n,
        sigma,
        x: record.then(|| x.to_vec()),
        mse,
        residual,
        subspace_distances: distances,
        frontier_gap: gap,
        weight_entropy: weights.map_or(T::nan(), entropy),
    })
}

/// `(‖x − x̂‖²/d, ‖A x − y‖)`; the mse is NaN without ground truth.
pub fn trace_errors<T: Real>(problem: &SensingProblem<T>, x: &[T]) -> Result<(T, T)> {
    let mse = match &problem.x_true {
        Some(xt) => linalg::distance(x, xt).powi(2) / T::from_usize_lossy(x.len()),
        None => T::nan(),
    };
    let residual = linalg::distance(&problem.a.matvec(x)?, &problem.y);
    Ok((mse, residual))
}

/// Shannon entropy `−Σ ω log ω` (natural log).
pub fn entropy<T: Real>(w: &[T]) -> T {
    w.iter()
        .filter(|&&v| v > T::zero())
        .map(|&v| -v * v.ln())
        .sum()
}

/// Short hex digest of `(A, y)` identifying the problem instance.
pub fn problem_hash<T: Real>(problem: &SensingProblem<T>) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update((problem.a.rows() as u64).to_le_bytes());
    h.update((problem.a.cols() as u64).to_le_bytes());
    for v in problem.a.as_slice().iter().chain(&problem.y) {
        h.update(v.as_f64().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}
