//! MMSE denoisers for the uniform prior on a box.
//!
//! Under a uniform prior on `[l, u]` the posterior given `y = x + σ z` is a
//! product of Gaussians `N(y_i, σ²)` truncated to `[l_i, u_i]`, so the
//! denoiser is the vector of truncated-normal means. A self-normalised
//! Monte-Carlo estimator serves as an independent cross-check.

use rayon::prelude::*;
use libm::erfc;

use crate::denoise::Denoiser;
use crate::error::{check_dim, Error, Result};
use crate::model_sets::BoxSet;
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Standardised bounds beyond which the tail (Mills ratio) form is used.
const TAIL_THRESHOLD: f64 = 6.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Upper tail `Q(x) = P(Z > x)`.
#[inline]
fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Lower tail `Φ(x) = P(Z < x)`.
#[inline]
fn lower_tail(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Mills ratio `Q(x)/φ(x)` for large positive `x`, by backward evaluation of
/// its continued fraction `1/(x + 1/(x + 2/(x + 3/(x + …))))`. Equivalent to
/// `√(π/2)·erfcx(x/√2)`.
fn mills_ratio(x: f64) -> f64 {
    let mut f = x;
    for k in (1..=120).rev() {
        f = x + k as f64 / f;
    }
    1.0 / f
}

/// Mean of `N(y, σ²)` truncated to `[a, b]`.
pub fn truncated_normal_mean(a: f64, b: f64, y: f64, sigma: f64) -> f64 {
    let alpha = (a - y) / sigma;
    let beta = (b - y) / sigma;
    if beta < -TAIL_THRESHOLD {
        return -truncated_normal_mean(-b, -a, -y, sigma);
    }
    let shift = if alpha > TAIL_THRESHOLD {
        // Both bounds deep in the upper tail. With Q = φ·M:
        // (φ(α) − φ(β)) / (Q(α) − Q(β)) = (1 − ρ) / (M(α) − ρ M(β)),
        // ρ = φ(β)/φ(α) = exp(−(β−α)(β+α)/2).
        let rho = (-0.5 * (beta - alpha) * (beta + alpha)).exp();
        (1.0 - rho) / (mills_ratio(alpha) - rho * mills_ratio(beta))
    } else {
        let mass = if alpha >= 0.0 {
            upper_tail(alpha) - upper_tail(beta)
        } else if beta <= 0.0 {
            lower_tail(beta) - lower_tail(alpha)
        } else {
            1.0 - upper_tail(beta) - lower_tail(alpha)
        };
        (std_normal_pdf(alpha) - std_normal_pdf(beta)) / mass
    };
    (y + sigma * shift).clamp(a, b)
}

/// Closed-form MMSE denoiser for the uniform prior on `b`.
pub fn box_denoiser<T: Real>(b: &BoxSet<T>, y: &[T], sigma: T) -> Result<Vec<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    check_dim(b.ambient_dim(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("y contains non-finite entries"));
    }
    let s = sigma.as_f64();
    Ok((0..y.len())
        .map(|i| {
            if b.active_mask()[i] {
                T::lit(truncated_normal_mean(
                    b.lower()[i].as_f64(),
                    b.upper()[i].as_f64(),
                    y[i].as_f64(),
                    s,
                ))
            } else {
                T::zero()
            }
        })
        .collect())
}

impl<T: Real> Denoiser<T> for BoxSet<T> {
    fn denoise(&self, x: &[T], sigma: T) -> Result<Vec<T>> {
        box_denoiser(self, x, sigma)
    }
}

/// Monte-Carlo posterior mean with per-coordinate standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate<T> {
    pub value: Vec<T>,
    pub stderr: Vec<T>,
    /// `Σ w / max w`.
    pub effective_samples: f64,
}

pub const MIN_MC_SAMPLES: usize = 1000;

/// Streaming accumulator for self-normalised importance sums. All sums are
/// stored relative to `exp(max_log_w)` so weights never overflow.
#[derive(Debug, Clone)]
struct WeightedSums {
    max_log_w: f64,
    sw: f64,
    sw2: f64,
    swx: Vec<f64>,
    sw2x: Vec<f64>,
    sw2x2: Vec<f64>,
}

impl WeightedSums {
    fn new(d: usize) -> Self {
        Self {
            max_log_w: f64::NEG_INFINITY,
            sw: 0.0,
            sw2: 0.0,
            swx: vec![0.0; d],
            sw2x: vec![0.0; d],
            sw2x2: vec![0.0; d],
        }
    }

    fn rescale(&mut self, new_max: f64) {
        if self.max_log_w == f64::NEG_INFINITY {
            self.max_log_w = new_max;
            return;
        }
        let f = (self.max_log_w - new_max).exp();
        let f2 = f * f;
        self.sw *= f;
        self.sw2 *= f2;
        for j in 0..self.swx.len() {
            self.swx[j] *= f;
            self.sw2x[j] *= f2;
            self.sw2x2[j] *= f2;
        }
        self.max_log_w = new_max;
    }

    fn push(&mut self, log_w: f64, x: &[f64]) {
        if log_w > self.max_log_w {
            self.rescale(log_w);
        }
        let w = (log_w - self.max_log_w).exp();
        let w2 = w * w;
        self.sw += w;
        self.sw2 += w2;
        for (j, &xj) in x.iter().enumerate() {
            self.swx[j] += w * xj;
            self.sw2x[j] += w2 * xj;
            self.sw2x2[j] += w2 * xj * xj;
        }
    }

    fn merge(mut self, mut other: WeightedSums) -> WeightedSums {
        let m = self.max_log_w.max(other.max_log_w);
        if m == f64::NEG_INFINITY {
            return self;
        }
        self.rescale(m);
        other.rescale(m);
        self.sw += other.sw;
        self.sw2 += other.sw2;
        for j in 0..self.swx.len() {
            self.swx[j] += other.swx[j];
            self.sw2x[j] += other.sw2x[j];
            self.sw2x2[j] += other.sw2x2[j];
        }
        self
    }

    /// Largest individual weight is `exp(0) = 1` after shifting, so the
    /// effective sample size `Σw / max w` is simply `sw`.
    fn finish<T: Real>(&self) -> Result<McEstimate<T>> {
        let ess = self.sw;
        if !(ess >= 10.0) {
            return Err(Error::DegenerateWeights { ess });
        }
        let mut value = Vec::with_capacity(self.swx.len());
        let mut stderr = Vec::with_capacity(self.swx.len());
        for j in 0..self.swx.len() {
            let mu = self.swx[j] / self.sw;
            let num = self.sw2x2[j] - 2.0 * mu * self.sw2x[j] + mu * mu * self.sw2;
            value.push(T::lit(mu));
            stderr.push(T::lit((num.max(0.0)).sqrt() / self.sw));
        }
        Ok(McEstimate {
            value,
            stderr,
            effective_samples: ess,
        })
    }
}

fn mc_validate<T: Real>(b: &BoxSet<T>, y: &[T], sigma: T, n_samples: usize) -> Result<()> {
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma must be positive"));
    }
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!(
            "n_samples must be at least {MIN_MC_SAMPLES}, got {n_samples}"
        )));
    }
    check_dim(b.ambient_dim(), y.len())
}

fn mc_accumulate<T: Real>(
    b: &BoxSet<T>,
    y: &[f64],
    inv_two_var: f64,
    n: usize,
    rng: &mut SeededRng,
) -> WeightedSums {
    let d = y.len();
    let mut acc = WeightedSums::new(d);
    let mut x = vec![0.0; d];
    for _ in 0..n {
        let mut dist2 = 0.0;
        for i in 0..d {
            x[i] = if b.active_mask()[i] {
                rng.uniform_in(b.lower()[i].as_f64(), b.upper()[i].as_f64())
            } else {
                0.0
            };
            dist2 += (y[i] - x[i]) * (y[i] - x[i]);
        }
        acc.push(-dist2 * inv_two_var, &x);
    }
    acc
}

/// Self-normalised importance estimate of `E[x | x + σ z = y]` with `x`
/// uniform on the box, from `n_samples` draws of `rng`.
pub fn mc_denoiser<T: Real>(
    b: &BoxSet<T>,
    y: &[T],
    sigma: T,
    n_samples: usize,
    rng: &mut SeededRng,
) -> Result<McEstimate<T>> {
    mc_validate(b, y, sigma, n_samples)?;
    let yf: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let s = sigma.as_f64();
    mc_accumulate(b, &yf, 0.5 / (s * s), n_samples, rng).finish()
}

/// Parallel variant of [`mc_denoiser`]: the budget is split over `workers`,
/// worker `w` draws from `SeededRng::substream(seed, w)` and partial sums
/// are merged in worker order, so the result depends only on
/// `(seed, workers, n_samples)`.
pub fn mc_denoiser_parallel<T: Real>(
    b: &BoxSet<T>,
    y: &[T],
    sigma: T,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<McEstimate<T>> {
    mc_validate(b, y, sigma, n_samples)?;
    let workers = workers.max(1);
    let yf: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let s = sigma.as_f64();
    let partials: Vec<WeightedSums> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let share = n_samples / workers + usize::from(w < n_samples % workers);
            let mut rng = SeededRng::substream(seed, w as u64);
            mc_accumulate(b, &yf, 0.5 / (s * s), share, &mut rng)
        })
        .collect();
    partials
        .into_iter()
        .reduce(WeightedSums::merge)
        .expect("at least one worker")
        .finish()
}

/// `(σ, ‖box_denoiser(y, σ) − project_box(y)‖)` along a descending grid of
/// noise levels in (0, 1).
pub fn convex_gap_curve<T: Real>(b: &BoxSet<T>, y: &[T], sigmas: &[T]) -> Result<Vec<(T, T)>> {
    if sigmas.iter().any(|&s| !(s > T::zero() && s < T::one())) {
        return Err(Error::invalid("sigmas must lie in (0, 1)"));
    }
    if sigmas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("sigmas must be sorted in descending order"));
    }
    let target = b.project(y)?;
    sigmas
        .iter()
        .map(|&s| {
            let d = box_denoiser(b, y, s)?;
            Ok((s, crate::linalg::distance(&d, &target)))
        })
        .collect()
}
