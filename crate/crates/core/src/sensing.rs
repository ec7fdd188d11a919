//! Measurement operators and the two quantities that govern recovery:
//! the restricted isometry constant of `μ AᵀA` over the secant set of a
//! union of subspaces, and the restricted Lipschitz constant of its metric
//! projection.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::model_sets::{UnionOfSubspaces, DEFAULT_TIE_TOL};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Singular-value cutoff used when orthonormalising a sum of two subspaces.
pub const SUM_SPACE_RANK_CUTOFF: f64 = 1e-10;

pub const DEFAULT_POWER_TOL: f64 = 1e-10;
pub const DEFAULT_POWER_MAX_ITER: usize = 10_000;

/// Linear inverse problem `y = A x̂` with a gradient step size.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingProblem<T> {
    pub a: Matrix<T>,
    pub mu: T,
    pub y: Vec<T>,
    pub x_true: Option<Vec<T>>,
    pub seed: u64,
}

impl<T: Real> SensingProblem<T> {
    pub fn new(a: Matrix<T>, mu: T, y: Vec<T>, x_true: Option<Vec<T>>, seed: u64) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::invalid(format!("step size must be positive, got {mu}")));
        }
        check_dim(a.rows(), y.len())?;
        if let Some(x) = &x_true {
            check_dim(a.cols(), x.len())?;
            let resid = linalg::distance(&a.matvec(x)?, &y);
            let tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0)) * linalg::norm(&y);
            if resid > tol {
                return Err(Error::invalid(format!(
                    "measurements are not noiseless: ‖y − A x̂‖ = {resid:e}"
                )));
            }
        }
        Ok(Self { a, mu, y, x_true, seed })
    }

    /// Noiseless problem `y = A x̂`.
    pub fn from_signal(a: Matrix<T>, x_true: Vec<T>, mu: T, seed: u64) -> Result<Self> {
        let y = a.matvec(&x_true)?;
        Self::new(a, mu, y, Some(x_true), seed)
    }

    /// Noiseless problem with the default step size `1.9 / ‖A‖₂²`.
    pub fn with_default_step(a: Matrix<T>, x_true: Vec<T>, seed: u64) -> Result<Self> {
        let mu = default_step_size(&a)?;
        Self::from_signal(a, x_true, mu, seed)
    }

    #[inline]
    pub fn signal_dim(&self) -> usize {
        self.a.cols()
    }

    #[inline]
    pub fn num_measurements(&self) -> usize {
        self.a.rows()
    }
}

/// `m × d` matrix of i.i.d. standard normal entries, filled row by row.
pub fn gaussian_operator<T: Real>(m: usize, d: usize, rng: &mut SeededRng) -> Result<Matrix<T>> {
    if m == 0 || d == 0 {
        return Err(Error::invalid("operator dimensions must be positive"));
    }
    let data = (0..m * d).map(|_| T::lit(rng.gaussian())).collect();
    Matrix::from_row_major(m, d, data)
}

/// Largest singular value of `A` by power iteration on `AᵀA`, started from
/// the normalised all-ones vector. Stops when the Rayleigh quotient changes
/// by less than `tol` relative.
pub fn spectral_norm<T: Real>(a: &Matrix<T>, tol: T, max_iter: usize) -> Result<T> {
    let d = a.cols();
    if a.max_abs() == T::zero() {
        return Err(Error::invalid("spectral_norm requires a nonzero matrix"));
    }
    let start = vec![T::one() / T::from_usize_lossy(d).sqrt(); d];
    match power_iterate(a, start, tol, max_iter)? {
        Some(s) => Ok(s),
        None => {
            // The all-ones start is orthogonal to the row space; fall back
            // to a fixed pseudo-random direction.
            let mut rng = SeededRng::new(0x5eed);
            let v: Vec<T> = (0..d).map(|_| T::lit(rng.gaussian())).collect();
            let n = linalg::norm(&v);
            power_iterate(a, linalg::scale(&v, T::one() / n), tol, max_iter)?
                .ok_or_else(|| Error::NumericFailure { iterations: 0, last_gap: f64::NAN })
        }
    }
}

fn power_iterate<T: Real>(a: &Matrix<T>, mut v: Vec<T>, tol: T, max_iter: usize) -> Result<Option<T>> {
    let mut lambda = T::zero();
    let mut gap = T::infinity();
    for it in 0..max_iter {
        let av = a.matvec(&v)?;
        let w = a.matvec_t(&av)?;
        let rayleigh = linalg::norm_sq(&av);
        let wn = linalg::norm(&w);
        if wn == T::zero() {
            return Ok(None);
        }
        if it > 0 {
            gap = (rayleigh - lambda).abs() / rayleigh;
            if gap <= tol {
                return Ok(Some(rayleigh.sqrt()));
            }
        }
        lambda = rayleigh;
        v = linalg::scale(&w, T::one() / wn);
    }
    Err(Error::NumericFailure {
        iterations: max_iter,
        last_gap: gap.as_f64(),
    })
}

/// Default step size `1.9 / ‖A‖₂²`.
pub fn default_step_size<T: Real>(a: &Matrix<T>) -> Result<T> {
    let s = spectral_norm(a, T::lit(DEFAULT_POWER_TOL).max(T::epsilon() * T::lit(16.0)), DEFAULT_POWER_MAX_ITER)?;
    Ok(T::lit(1.9) / (s * s))
}

/// Restricted isometry constant of `μ AᵀA` over `Σ − Σ` for a union of
/// subspaces.
///
/// Every secant `x₁ − x₂` with `x₁ ∈ E_k`, `x₂ ∈ E_ℓ` lies in `E_k + E_ℓ`, so
/// the supremum is a finite maximum over pairs `k ≤ ℓ` of the spectral norm
/// of `Qᵀ(μ AᵀA − I)Q`, with `Q` an orthonormal basis of `E_k + E_ℓ`.
pub fn ric_union<T: Real>(a: &Matrix<T>, mu: T, s: &UnionOfSubspaces<T>) -> Result<T> {
    check_dim(a.cols(), s.ambient_dim())?;
    if a.as_slice().iter().all(|&v| v == T::zero()) {
        // Qᵀ(0 − I)Q = −I on every sum space.
        return Ok(T::one());
    }
    let bases: Vec<Vec<Vec<T>>> = s.components().iter().map(|c| c.basis().columns()).collect();
    let mut delta = T::zero();
    for k in 0..bases.len() {
        for l in k..bases.len() {
            let mut cols = bases[k].clone();
            if l != k {
                cols.extend(bases[l].iter().cloned());
            }
            let q = linalg::orthonormalize(&cols, T::lit(SUM_SPACE_RANK_CUTOFF));
            delta = delta.max(restricted_deviation(a, mu, &q)?);
        }
    }
    Ok(delta)
}

/// `‖Qᵀ(μ AᵀA − I)Q‖₂` for orthonormal columns `q`. The identity term is
/// formed as `QᵀQ` rather than assumed, so isometries give exactly 0.
fn restricted_deviation<T: Real>(a: &Matrix<T>, mu: T, q: &[Vec<T>]) -> Result<T> {
    let aq: Vec<Vec<T>> = q.iter().map(|c| a.matvec(c)).collect::<Result<_>>()?;
    let n = q.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = mu * linalg::dot(&aq[i], &aq[j]) - linalg::dot(&q[i], &q[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    linalg::symmetric_spectral_norm(&m)
}

/// Sampled lower bound on the restricted Lipschitz constant
/// `sup ‖P(z) − x‖ / ‖z − x‖` of the metric projection `P` onto the union.
///
/// Samples alternate between isotropic Gaussian `z` and points near the
/// frontier between two random components (a bisection point on a segment
/// joining them, perturbed at a log-uniform scale in `[1e-7, 1e-1]`). For
/// each `z` the ratio is evaluated against a prior-style sample of `Σ`, every
/// component projection of `z`, and the idempotent pair `(P(z), x)`.
pub fn restricted_lipschitz_estimate<T: Real>(
    s: &UnionOfSubspaces<T>,
    n_samples: usize,
    rng: &mut SeededRng,
) -> Result<T> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    let d = s.ambient_dim();
    let k = s.len();
    let tie = T::lit(DEFAULT_TIE_TOL);
    let min_sep = T::lit(1e-9);
    let mut best = T::zero();
    let consider = |p: &[T], z: &[T], x: &[T], best: &mut T| {
        let den = linalg::distance(z, x);
        if den >= min_sep {
            let ratio = linalg::distance(p, x) / den;
            if ratio.is_finite() && ratio > *best {
                *best = ratio;
            }
        }
    };
    for i in 0..n_samples {
        let z: Vec<T> = if i % 2 == 0 || k < 2 {
            (0..d).map(|_| T::lit(rng.gaussian())).collect()
        } else {
            let a = rng.below(k);
            let mut b = rng.below(k - 1);
            if b >= a {
                b += 1;
            }
            let f = frontier_point(s, a, b, rng)?;
            let scale = T::lit(10f64.powf(rng.uniform_in(-7.0, -1.0)));
            f.iter().map(|&v| v + scale * T::lit(rng.gaussian())).collect()
        };
        let pz = s.project(&z, tie)?.point;

        let comp = &s.components()[rng.below(k)];
        let g: Vec<T> = (0..comp.rank()).map(|_| T::lit(rng.gaussian())).collect();
        let x_prior = comp.embed(&g)?;
        consider(&pz, &z, &x_prior, &mut best);

        for c in s.components() {
            let x = c.project(&z)?;
            consider(&pz, &z, &x, &mut best);
        }

        // z' = P(z) ∈ Σ is its own projection: ratio 1 against any x.
        let ppz = s.project(&pz, tie)?.point;
        consider(&ppz, &pz, &x_prior, &mut best);
    }
    Ok(best)
}

/// Point on the segment between random unit vectors of `E_a` and `E_b` where
/// the two squared projection norms agree.
fn frontier_point<T: Real>(s: &UnionOfSubspaces<T>, a: usize, b: usize, rng: &mut SeededRng) -> Result<Vec<T>> {
    let unit = |idx: usize, rng: &mut SeededRng| -> Result<Vec<T>> {
        let c = &s.components()[idx];
        let g: Vec<T> = (0..c.rank()).map(|_| T::lit(rng.gaussian())).collect();
        let v = c.embed(&g)?;
        let n = linalg::norm(&v);
        Ok(linalg::scale(&v, T::one() / n))
    };
    let ua = unit(a, rng)?;
    let ub = unit(b, rng)?;
    let (ea, eb) = (&s.components()[a], &s.components()[b]);
    let point = |lam: T| -> Vec<T> {
        ua.iter()
            .zip(&ub)
            .map(|(&p, &q)| (T::one() - lam) * p + lam * q)
            .collect()
    };
    let h = |lam: T| -> Result<T> {
        let z = point(lam);
        Ok(ea.projection_norm_sq(&z)? - eb.projection_norm_sq(&z)?)
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    let h_lo = h(lo)?;
    for _ in 0..80 {
        let mid = (lo + hi) / T::lit(2.0);
        let hm = h(mid)?;
        if (hm >= T::zero()) == (h_lo >= T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(point((lo + hi) / T::lit(2.0)))
}
