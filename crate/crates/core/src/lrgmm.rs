//! Low-rank Gaussian mixture priors `p = Σ_k π_k N(0, U_k U_kᵀ)`.
//!
//! The noise-convolved density `p_σ = Σ_k π_k N(0, U_k U_kᵀ + σ² I)` is
//! evaluated entirely in the log domain. The covariance of each component
//! is never formed: with `u = U_k U_kᵀ x` and `u⊥ = x − u`,
//!
//! ```text
//! log ν_k(x, t) = log π_k − (d/2) log 2π − ½ [r_k log(1+t) + (d−r_k) log t]
//!                 − ½ [‖u‖²/(1+t) + ‖u⊥‖²/t]
//! ```
//!
//! so everything costs `O(K d r)` per point. Posterior weights are a softmax
//! of the `log ν_k` and the MMSE denoiser is the weighted sum of component
//! projections shrunk by `1/(1+t)`.

use crate::denoise::Denoiser;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, logsumexp};
use crate::model_sets::{Subspace, UnionOfSubspaces};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Default cap on the number of supports enumerated by [`LrGmmPrior::sparse_gmm`].
pub const DEFAULT_SPARSE_CAP: u128 = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LrGmmPrior<T> {
    union: UnionOfSubspaces<T>,
    log_pi: Vec<T>,
}

/// One evaluation of the MMSE denoiser.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserEval<T> {
    /// `P^n(x) = D_σ(x)`.
    pub value: Vec<T>,
    /// Posterior component weights `ω_k(x, σ²)`.
    pub weights: Vec<T>,
    /// `log p_σ(x)`.
    pub log_density: T,
    pub sigma: T,
}

/// Per-component quantities shared by densities, weights and the denoiser.
struct ComponentPass<T> {
    projections: Vec<Vec<T>>,
    log_nu: Vec<T>,
}

fn check_time<T: Real>(t: T, what: &str) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be positive and finite, got {t}")))
    }
}

impl<T: Real> LrGmmPrior<T> {
    /// Builds a prior from mixture weights `pi` (must be positive and sum to 1).
    pub fn new(union: UnionOfSubspaces<T>, pi: &[T]) -> Result<Self> {
        check_dim(union.len(), pi.len())?;
        if pi.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(Error::invalid("mixture weights must be positive and finite"));
        }
        let total: T = pi.iter().copied().sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if (total - T::one()).abs() > tol {
            return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self {
            union,
            log_pi: pi.iter().map(|p| p.ln()).collect(),
        })
    }

    pub fn uniform(union: UnionOfSubspaces<T>) -> Self {
        let k = union.len();
        let log_w = -T::from_usize_lossy(k).ln();
        Self {
            union,
            log_pi: vec![log_w; k],
        }
    }

    /// Uniform mixture over `k` random `r`-dimensional subspaces of `R^d`.
    pub fn random_uniform(d: usize, r: usize, k: usize, rng: &mut SeededRng) -> Result<Self> {
        Ok(Self::uniform(UnionOfSubspaces::random(d, r, k, rng)?))
    }

    /// Uniform mixture over all `C(d, s)` coordinate subspaces, i.e. the law
    /// of a random `s`-sparse vector with Gaussian non-zeros. Supports are
    /// enumerated in lexicographic order.
    pub fn sparse_gmm(d: usize, s: usize) -> Result<Self> {
        Self::sparse_gmm_with_cap(d, s, DEFAULT_SPARSE_CAP)
    }

    pub fn sparse_gmm_with_cap(d: usize, s: usize, cap: u128) -> Result<Self> {
        if s == 0 || s > d {
            return Err(Error::invalid(format!("sparsity {s} must satisfy 1 <= s <= d = {d}")));
        }
        let count = binomial(d as u128, s as u128);
        if count > cap {
            return Err(Error::ResourceLimit {
                what: format!("C({d},{s})"),
                requested: count,
                cap,
            });
        }
        let mut comps = Vec::with_capacity(count as usize);
        let mut support: Vec<usize> = (0..s).collect();
        loop {
            comps.push(Subspace::coordinate(d, &support)?);
            // next combination in lexicographic order
            let mut i = s;
            while i > 0 && support[i - 1] == d - s + (i - 1) {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            support[i - 1] += 1;
            for j in i..s {
                support[j] = support[j - 1] + 1;
            }
        }
        Ok(Self::uniform(UnionOfSubspaces::new(comps)?))
    }

    #[inline]
    pub fn union(&self) -> &UnionOfSubspaces<T> {
        &self.union
    }

    #[inline]
    pub fn log_pi(&self) -> &[T] {
        &self.log_pi
    }

    pub fn pi(&self) -> Vec<T> {
        self.log_pi.iter().map(|l| l.exp()).collect()
    }

    #[inline]
    pub fn num_components(&self) -> usize {
        self.union.len()
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.union.ambient_dim()
    }

    fn log_nu_from_parts(&self, k: usize, proj_sq: T, resid_sq: T, t: T) -> T {
        let d = T::from_usize_lossy(self.ambient_dim());
        let r = T::from_usize_lossy(self.union.components()[k].rank());
        let half = T::lit(0.5);
        self.log_pi[k]
            - half * d * T::TAU().ln()
            - half * (r * t.ln_1p() + (d - r) * t.ln())
            - half * (proj_sq / (T::one() + t) + resid_sq / t)
    }

    fn pass(&self, x: &[T], t: T) -> Result<ComponentPass<T>> {
        check_dim(self.ambient_dim(), x.len())?;
        let mut projections = Vec::with_capacity(self.num_components());
        let mut log_nu = Vec::with_capacity(self.num_components());
        for (k, comp) in self.union.components().iter().enumerate() {
            let c = comp.coefficients(x)?;
            let p = comp.embed(&c)?;
            let proj_sq = linalg::norm_sq(&c);
            let resid_sq = linalg::distance(x, &p).powi(2);
            log_nu.push(self.log_nu_from_parts(k, proj_sq, resid_sq, t));
            projections.push(p);
        }
        Ok(ComponentPass { projections, log_nu })
    }

    /// `log(π_k N(x; 0, U_k U_kᵀ + t I))`.
    pub fn log_component_density(&self, k: usize, x: &[T], t: T) -> Result<T> {
        check_time(t, "t")?;
        check_dim(self.ambient_dim(), x.len())?;
        let comp = self
            .union
            .components()
            .get(k)
            .ok_or_else(|| Error::invalid(format!("component index {k} out of range")))?;
        let p = comp.project(x)?;
        let proj_sq = linalg::norm_sq(&p);
        let resid_sq = linalg::distance(x, &p).powi(2);
        Ok(self.log_nu_from_parts(k, proj_sq, resid_sq, t))
    }

    /// `log p_t(x)` with `t = σ²`.
    pub fn log_density(&self, x: &[T], t: T) -> Result<T> {
        check_time(t, "t")?;
        Ok(logsumexp(&self.pass(x, t)?.log_nu))
    }

    /// Posterior component weights `ω_k(x, t)`.
    pub fn weights(&self, x: &[T], t: T) -> Result<Vec<T>> {
        check_time(t, "t")?;
        Ok(softmax(&self.pass(x, t)?.log_nu).0)
    }

    /// MMSE denoiser `D_σ(x) = (1/(1+σ²)) Σ_k ω_k(x, σ²) U_k U_kᵀ x`.
    pub fn denoiser(&self, x: &[T], sigma: T) -> Result<DenoiserEval<T>> {
        check_time(sigma, "sigma")?;
        let t = sigma * sigma;
        check_time(t, "sigma^2")?;
        let pass = self.pass(x, t)?;
        let (weights, log_density) = softmax(&pass.log_nu);
        let shrink = T::one() / (T::one() + t);
        let mut value = vec![T::zero(); x.len()];
        for (w, p) in weights.iter().zip(&pass.projections) {
            if *w > T::zero() {
                linalg::axpy(*w * shrink, p, &mut value);
            }
        }
        Ok(DenoiserEval {
            value,
            weights,
            log_density,
            sigma,
        })
    }

    /// Score `∇ log p_σ(x) = (D_σ(x) − x) / σ²`.
    pub fn score(&self, x: &[T], sigma: T) -> Result<Vec<T>> {
        let eval = self.denoiser(x, sigma)?;
        let inv_t = T::one() / (sigma * sigma);
        Ok(eval
            .value
            .iter()
            .zip(x)
            .map(|(&v, &xi)| (v - xi) * inv_t)
            .collect())
    }

    /// Pointwise limit of the denoiser as `σ → 0`: the metric projection when
    /// it is single-valued, otherwise the `π`-weighted average of the tied
    /// component projections (defined only for equal-rank unions).
    pub fn limiting_projection(&self, x: &[T], tie_tol: T) -> Result<Vec<T>> {
        let proj = self.union.project(x, tie_tol)?;
        if proj.argmin_set.len() == 1 {
            return Ok(proj.point);
        }
        if !self.union.equal_rank() {
            return Err(Error::Unsupported(
                "limit on the frontier of a union with unequal ranks".into(),
            ));
        }
        let pi = self.pi();
        let mut total = T::zero();
        let mut out = vec![T::zero(); x.len()];
        for &l in &proj.argmin_set {
            let u = self.union.components()[l].project(x)?;
            linalg::axpy(pi[l], &u, &mut out);
            total = total + pi[l];
        }
        Ok(linalg::scale(&out, T::one() / total))
    }

    /// Draws `x = U_k g` with `k ~ π` and `g ~ N(0, I_r)`; returns the
    /// component index too.
    pub fn sample_with_component(&self, rng: &mut SeededRng) -> (Vec<T>, usize) {
        let probs: Vec<f64> = self.log_pi.iter().map(|l| l.as_f64().exp()).collect();
        let k = rng.categorical(&probs);
        let comp = &self.union.components()[k];
        let g: Vec<T> = (0..comp.rank()).map(|_| T::lit(rng.gaussian())).collect();
        let x = comp.embed(&g).expect("coefficient length equals rank");
        (x, k)
    }

    pub fn sample(&self, rng: &mut SeededRng) -> Vec<T> {
        self.sample_with_component(rng).0
    }

    pub fn descriptor(&self) -> String {
        let ranks: Vec<usize> = self.union.components().iter().map(Subspace::rank).collect();
        let r_desc = if self.union.equal_rank() {
            ranks[0].to_string()
        } else {
            format!("{ranks:?}")
        };
        format!(
            "lrgmm d={} K={} r={}",
            self.ambient_dim(),
            self.num_components(),
            r_desc
        )
    }

    pub fn cast<U: Real>(&self) -> LrGmmPrior<U> {
        LrGmmPrior {
            union: self.union.cast(),
            log_pi: self.log_pi.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Normalised weights and the log normaliser.
fn softmax<T: Real>(log_values: &[T]) -> (Vec<T>, T) {
    let lse = logsumexp(log_values);
    (log_values.iter().map(|&l| (l - lse).exp()).collect(), lse)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

impl<T: Real> Denoiser<T> for LrGmmPrior<T> {
    fn denoise(&self, x: &[T], sigma: T) -> Result<Vec<T>> {
        Ok(self.denoiser(x, sigma)?.value)
    }

    fn denoise_with_weights(&self, x: &[T], sigma: T) -> Result<(Vec<T>, Option<Vec<T>>)> {
        let eval = self.denoiser(x, sigma)?;
        Ok((eval.value, Some(eval.weights)))
    }
}

pub fn log_component_density<T: Real>(prior: &LrGmmPrior<T>, k: usize, x: &[T], t: T) -> Result<T> {
    prior.log_component_density(k, x, t)
}

pub fn weights<T: Real>(prior: &LrGmmPrior<T>, x: &[T], t: T) -> Result<Vec<T>> {
    prior.weights(x, t)
}

pub fn denoiser<T: Real>(prior: &LrGmmPrior<T>, x: &[T], sigma: T) -> Result<DenoiserEval<T>> {
    prior.denoiser(x, sigma)
}

pub fn score<T: Real>(prior: &LrGmmPrior<T>, x: &[T], sigma: T) -> Result<Vec<T>> {
    prior.score(x, sigma)
}

pub fn limiting_projection<T: Real>(prior: &LrGmmPrior<T>, x: &[T], tie_tol: T) -> Result<Vec<T>> {
    prior.limiting_projection(x, tie_tol)
}

pub fn sample<T: Real>(prior: &LrGmmPrior<T>, rng: &mut SeededRng) -> Vec<T> {
    prior.sample(rng)
}

pub fn sparse_gmm<T: Real>(d: usize, s: usize) -> Result<LrGmmPrior<T>> {
    LrGmmPrior::sparse_gmm(d, s)
}
