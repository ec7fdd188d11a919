//! The denoiser abstraction consumed by the recovery iteration.

use crate::error::Result;
use crate::model_sets::UnionOfSubspaces;
use crate::scalar::Real;

/// A time-varying approximate projection `P^n = D_σ`.
///
/// Implemented by the mixture prior (exact MMSE denoiser), by boxes (closed
/// form uniform-prior denoiser), by [`OracleProjection`] (the limiting metric
/// projection) and by any closure `Fn(&[T], T) -> Result<Vec<T>>`.
pub trait Denoiser<T: Real> {
    fn denoise(&self, x: &[T], sigma: T) -> Result<Vec<T>>;

    /// Denoised value together with the posterior component weights, for
    /// mixture priors. The default reports no weights.
    fn denoise_with_weights(&self, x: &[T], sigma: T) -> Result<(Vec<T>, Option<Vec<T>>)> {
        Ok((self.denoise(x, sigma)?, None))
    }
}

impl<T: Real, F> Denoiser<T> for F
where
    F: Fn(&[T], T) -> Result<Vec<T>>,
{
    fn denoise(&self, x: &[T], sigma: T) -> Result<Vec<T>> {
        self(x, sigma)
    }
}

/// Exact metric projection onto a union of subspaces, ignoring `sigma`.
#[derive(Debug, Clone)]
pub struct OracleProjection<'a, T> {
    pub union: &'a UnionOfSubspaces<T>,
    pub tie_tol: T,
}

impl<'a, T: Real> OracleProjection<'a, T> {
    pub fn new(union: &'a UnionOfSubspaces<T>) -> Self {
        Self {
            union,
            tie_tol: T::lit(crate::model_sets::DEFAULT_TIE_TOL),
        }
    }
}

impl<T: Real> Denoiser<T> for OracleProjection<'_, T> {
    fn denoise(&self, x: &[T], _sigma: T) -> Result<Vec<T>> {
        Ok(self.union.project(x, self.tie_tol)?.point)
    }
}
