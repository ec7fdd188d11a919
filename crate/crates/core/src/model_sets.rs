//! Geometric model sets: linear subspaces, finite unions of subspaces,
//! axis-aligned boxes and sparse vectors, with their exact metric projections.

use std::borrow::Cow;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Default absolute tolerance on squared projection norms used to decide
/// that several components are equally close.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
enum Basis<T> {
    Dense(Matrix<T>),
    /// Columns are the standard basis vectors at these (sorted) indices.
    Coordinate(Vec<usize>),
}

/// Linear subspace `Im(U)` of `R^d` represented by an orthonormal basis `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T> {
    ambient_dim: usize,
    basis: Basis<T>,
}

impl<T: Real> Subspace<T> {
    /// Wraps a `d × r` matrix whose columns must already be orthonormal.
    pub fn new(basis: Matrix<T>) -> Result<Self> {
        let (d, r) = (basis.rows(), basis.cols());
        if r == 0 || r > d {
            return Err(Error::invalid(format!("subspace rank {r} must satisfy 1 <= r <= d = {d}")));
        }
        let gram = basis.gram();
        let tol = T::structural_tol();
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { T::one() } else { T::zero() };
                if (gram[(i, j)] - target).abs() > tol {
                    return Err(Error::invalid(format!(
                        "basis columns are not orthonormal: (UᵀU - I)[{i},{j}] = {:e}",
                        (gram[(i, j)] - target).as_f64()
                    )));
                }
            }
        }
        Ok(Self {
            ambient_dim: d,
            basis: Basis::Dense(basis),
        })
    }

    /// Orthonormalises an arbitrary spanning set first.
    pub fn from_spanning(columns: &[Vec<T>]) -> Result<Self> {
        let q = linalg::orthonormalize(columns, T::lit(1e-10));
        if q.is_empty() {
            return Err(Error::invalid("spanning set is zero"));
        }
        Self::new(Matrix::from_columns(&q)?)
    }

    /// Coordinate subspace spanned by `e_i` for `i` in `indices`.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Result<Self> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != indices.len() || idx.is_empty() {
            return Err(Error::invalid("coordinate indices must be distinct and non-empty"));
        }
        if idx.last().is_some_and(|&i| i >= ambient_dim) {
            return Err(Error::invalid(format!("coordinate index out of range for d = {ambient_dim}")));
        }
        Ok(Self {
            ambient_dim,
            basis: Basis::Coordinate(idx),
        })
    }

    /// Uniformly random `r`-dimensional subspace of `R^d`.
    pub fn random(d: usize, r: usize, rng: &mut SeededRng) -> Result<Self> {
        Self::new(linalg::random_orthonormal(d, r, rng)?)
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        match &self.basis {
            Basis::Dense(m) => m.cols(),
            Basis::Coordinate(idx) => idx.len(),
        }
    }

    /// The `d × r` orthonormal basis.
    pub fn basis(&self) -> Cow<'_, Matrix<T>> {
        match &self.basis {
            Basis::Dense(m) => Cow::Borrowed(m),
            Basis::Coordinate(idx) => {
                let mut m = Matrix::zeros(self.ambient_dim, idx.len());
                for (j, &i) in idx.iter().enumerate() {
                    m[(i, j)] = T::one();
                }
                Cow::Owned(m)
            }
        }
    }

    /// Coordinates `Uᵀ x` of the projection in the basis.
    pub fn coefficients(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.ambient_dim, x.len())?;
        Ok(match &self.basis {
            Basis::Dense(m) => m.matvec_t(x)?,
            Basis::Coordinate(idx) => idx.iter().map(|&i| x[i]).collect(),
        })
    }

    /// Embeds coefficients: `U c`.
    pub fn embed(&self, c: &[T]) -> Result<Vec<T>> {
        check_dim(self.rank(), c.len())?;
        Ok(match &self.basis {
            Basis::Dense(m) => m.matvec(c)?,
            Basis::Coordinate(idx) => {
                let mut out = vec![T::zero(); self.ambient_dim];
                for (&i, &v) in idx.iter().zip(c) {
                    out[i] = v;
                }
                out
            }
        })
    }

    /// Orthogonal projection `U Uᵀ x`.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        self.embed(&self.coefficients(x)?)
    }

    /// `‖U Uᵀ x‖²`, computed as `‖Uᵀ x‖²`.
    pub fn projection_norm_sq(&self, x: &[T]) -> Result<T> {
        Ok(linalg::norm_sq(&self.coefficients(x)?))
    }

    /// `‖(I − U Uᵀ) x‖`.
    pub fn distance(&self, x: &[T]) -> Result<T> {
        let p = self.project(x)?;
        Ok(linalg::distance(x, &p))
    }

    pub fn cast<U: Real>(&self) -> Subspace<U> {
        Subspace {
            ambient_dim: self.ambient_dim,
            basis: match &self.basis {
                Basis::Dense(m) => Basis::Dense(m.cast()),
                Basis::Coordinate(idx) => Basis::Coordinate(idx.clone()),
            },
        }
    }
}

/// Free-function form of [`Subspace::project`].
pub fn project_subspace<T: Real>(e: &Subspace<T>, x: &[T]) -> Result<Vec<T>> {
    e.project(x)
}

/// Result of projecting onto a union of subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionProjection<T> {
    pub point: Vec<T>,
    /// Every component whose squared projection norm is within the tie
    /// tolerance of the maximum, in increasing index order.
    pub argmin_set: Vec<usize>,
}

/// Union of linear subspaces `Σ = ∪ E_k` sharing one ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionOfSubspaces<T> {
    components: Vec<Subspace<T>>,
    equal_rank: bool,
}

impl<T: Real> UnionOfSubspaces<T> {
    pub fn new(components: Vec<Subspace<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::invalid("a union needs at least one subspace"))?;
        let d = first.ambient_dim();
        let r = first.rank();
        for c in &components {
            check_dim(d, c.ambient_dim())?;
        }
        let equal_rank = components.iter().all(|c| c.rank() == r);
        Ok(Self {
            components,
            equal_rank,
        })
    }

    /// `K` independent uniformly random `r`-dimensional subspaces of `R^d`.
    pub fn random(d: usize, r: usize, k: usize, rng: &mut SeededRng) -> Result<Self> {
        let comps = (0..k)
            .map(|_| Subspace::random(d, r, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    #[inline]
    pub fn components(&self) -> &[Subspace<T>] {
        &self.components
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.components[0].ambient_dim()
    }

    #[inline]
    pub fn equal_rank(&self) -> bool {
        self.equal_rank
    }

    /// `‖P_{E_k} x‖²` for every component.
    pub fn projection_norms_sq(&self, x: &[T]) -> Result<Vec<T>> {
        self.components
            .iter()
            .map(|c| c.projection_norm_sq(x))
            .collect()
    }

    /// Distances `‖(I − U_k U_kᵀ) x‖` to every component.
    pub fn distances(&self, x: &[T]) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.distance(x)).collect()
    }

    /// Metric projection onto the union. Ties within `tie_tol` (absolute, on
    /// squared norms) are all reported; the returned point comes from the
    /// lowest-index tied component.
    pub fn project(&self, x: &[T], tie_tol: T) -> Result<UnionProjection<T>> {
        if tie_tol < T::zero() {
            return Err(Error::invalid("tie_tol must be non-negative"));
        }
        let norms = self.projection_norms_sq(x)?;
        let max = norms.iter().copied().fold(T::neg_infinity(), T::max);
        let argmin_set: Vec<usize> = norms
            .iter()
            .enumerate()
            .filter(|(_, &n)| max - n <= tie_tol)
            .map(|(k, _)| k)
            .collect();
        let point = self.components[argmin_set[0]].project(x)?;
        Ok(UnionProjection { point, argmin_set })
    }

    /// Gap `min_{ℓ≠k*} (‖P_{k*} x‖² − ‖P_ℓ x‖²)` between the closest component
    /// and the runner-up; zero on the frontier, `+∞` for a single component.
    pub fn frontier_gap(&self, x: &[T]) -> Result<T> {
        let norms = self.projection_norms_sq(x)?;
        Ok(frontier_gap_from_norms(&norms).1)
    }

    pub fn cast<U: Real>(&self) -> UnionOfSubspaces<U> {
        UnionOfSubspaces {
            components: self.components.iter().map(Subspace::cast).collect(),
            equal_rank: self.equal_rank,
        }
    }
}

/// Argmax component (lowest index on exact ties) and frontier gap from
/// precomputed squared projection norms.
pub(crate) fn frontier_gap_from_norms<T: Real>(norms: &[T]) -> (usize, T) {
    let mut best = 0;
    for (k, &n) in norms.iter().enumerate() {
        if n > norms[best] {
            best = k;
        }
    }
    let gap = norms
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != best)
        .map(|(_, &n)| norms[best] - n)
        .fold(T::infinity(), T::min);
    (best, gap)
}

pub fn project_union<T: Real>(s: &UnionOfSubspaces<T>, x: &[T], tie_tol: T) -> Result<UnionProjection<T>> {
    s.project(x, tie_tol)
}

pub fn frontier_gap<T: Real>(s: &UnionOfSubspaces<T>, x: &[T]) -> Result<T> {
    s.frontier_gap(x)
}

/// Keeps the `s` largest-magnitude entries of `x`; on equal magnitudes the
/// lower index is kept.
pub fn hard_threshold<T: Real>(x: &[T], s: usize) -> Result<Vec<T>> {
    if s == 0 || s > x.len() {
        return Err(Error::invalid(format!("sparsity {s} must satisfy 1 <= s <= d = {}", x.len())));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| {
        x[j].abs()
            .partial_cmp(&x[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut out = vec![T::zero(); x.len()];
    for &i in &order[..s] {
        out[i] = x[i];
    }
    Ok(out)
}

/// Axis-aligned box containing the origin. Coordinates with
/// `lower == upper == 0` are inactive: the box lives in the coordinate
/// subspace spanned by the remaining (active) axes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    active: Vec<bool>,
}

impl<T: Real> BoxSet<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::invalid("box dimension must be positive"));
        }
        let mut active = Vec::with_capacity(lower.len());
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::invalid(format!("box bound {i} is not finite")));
            }
            if lo == hi {
                if lo != T::zero() {
                    return Err(Error::invalid(format!(
                        "inactive coordinate {i} must be pinned at 0, got {lo}"
                    )));
                }
                active.push(false);
            } else if lo < hi && lo <= T::zero() && T::zero() <= hi {
                active.push(true);
            } else {
                return Err(Error::invalid(format!(
                    "coordinate {i}: [{lo}, {hi}] must satisfy lower <= 0 <= upper with lower < upper"
                )));
            }
        }
        Ok(Self { lower, upper, active })
    }

    /// `[-half_width, half_width]^s × {0}^{d-s}`.
    pub fn centered_cube(s: usize, d: usize, half_width: T) -> Result<Self> {
        if s > d {
            return Err(Error::invalid("active dimension exceeds ambient dimension"));
        }
        let lower = (0..d).map(|i| if i < s { -half_width } else { T::zero() }).collect();
        let upper = (0..d).map(|i| if i < s { half_width } else { T::zero() }).collect();
        Self::new(lower, upper)
    }

    #[inline]
    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    #[inline]
    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    #[inline]
    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.lower.len()
    }

    /// Number of active coordinates (dimension of the affine hull).
    pub fn intrinsic_dim(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn diameter(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (hi - lo) * (hi - lo))
            .sum::<T>()
            .sqrt()
    }

    pub fn centroid(&self) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (lo + hi) / T::lit(2.0))
            .collect()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.lower.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Exact metric projection: coordinate-wise clamp, zero on inactive axes.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.active[i] {
                    v.max(self.lower[i]).min(self.upper[i])
                } else {
                    T::zero()
                }
            })
            .collect())
    }

    /// Uniform draw from the box.
    pub fn sample(&self, rng: &mut SeededRng) -> Vec<T> {
        (0..self.ambient_dim())
            .map(|i| {
                if self.active[i] {
                    T::lit(rng.uniform_in(self.lower[i].as_f64(), self.upper[i].as_f64()))
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

pub fn project_box<T: Real>(b: &BoxSet<T>, x: &[T]) -> Result<Vec<T>> {
    b.project(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes() -> UnionOfSubspaces<f64> {
        UnionOfSubspaces::new(vec![
            Subspace::coordinate(2, &[0]).unwrap(),
            Subspace::coordinate(2, &[1]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn subspace_projection_examples() {
        let e1 = Subspace::coordinate(2, &[0]).unwrap();
        assert_eq!(project_subspace(&e1, &[3.0, 4.0]).unwrap(), vec![3.0, 0.0]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let diag = Subspace::new(Matrix::from_rows(&[vec![h], vec![h]]).unwrap()).unwrap();
        let p = diag.project(&[1.0, 0.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let again = diag.project(&p).unwrap();
        assert!(linalg::distance(&p, &again) < 1e-12);
    }

    #[test]
    fn subspace_rejects_non_orthonormal_and_bad_dims() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(Subspace::new(m), Err(Error::InvalidArgument(_))));
        let e1 = Subspace::<f64>::coordinate(2, &[0]).unwrap();
        assert!(matches!(e1.project(&[1.0, 2.0, 3.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn union_projection_examples() {
        let s = axes();
        let p = s.project(&[2.0, 1.0], 1e-12).unwrap();
        assert_eq!(p.point, vec![2.0, 0.0]);
        assert_eq!(p.argmin_set, vec![0]);

        let p = s.project(&[1.0, 1.0], 1e-12).unwrap();
        assert_eq!(p.argmin_set, vec![0, 1]);
        assert_eq!(p.point, vec![1.0, 0.0]);

        let p = s.project(&[0.0, 0.0], 1e-12).unwrap();
        assert_eq!(p.argmin_set, vec![0, 1]);
        assert_eq!(p.point, vec![0.0, 0.0]);
    }

    #[test]
    fn frontier_gap_examples() {
        let s = axes();
        assert_eq!(s.frontier_gap(&[2.0, 1.0]).unwrap(), 3.0);
        assert_eq!(s.frontier_gap(&[1.0, 1.0]).unwrap(), 0.0);
        let single = UnionOfSubspaces::new(vec![Subspace::<f64>::coordinate(2, &[0]).unwrap()]).unwrap();
        assert_eq!(single.frontier_gap(&[1.0, 1.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(&[3.0, -1.0, 2.0], 2).unwrap(), vec![3.0, 0.0, 2.0]);
        assert_eq!(hard_threshold(&[1.0, 1.0, 0.0], 1).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(hard_threshold(&[1.0, -4.0], 2).unwrap(), vec![1.0, -4.0]);
        assert!(hard_threshold(&[1.0], 0).is_err());
        assert!(hard_threshold(&[1.0], 2).is_err());
    }

    #[test]
    fn box_projection_examples() {
        let b = BoxSet::centered_cube(2, 2, 1.0).unwrap();
        assert_eq!(b.project(&[2.0, 0.5]).unwrap(), vec![1.0, 0.5]);
        assert_eq!(b.project(&[0.2, -0.3]).unwrap(), vec![0.2, -0.3]);

        let pinned = BoxSet::centered_cube(1, 2, 1.0).unwrap();
        assert_eq!(pinned.project(&[0.5, 7.0]).unwrap(), vec![0.5, 0.0]);
        assert_eq!(pinned.intrinsic_dim(), 1);
    }

    #[test]
    fn box_requires_origin() {
        assert!(BoxSet::new(vec![0.5], vec![2.0]).is_err());
        assert!(BoxSet::new(vec![1.0], vec![1.0]).is_err());
        assert!(BoxSet::new(vec![0.0], vec![2.0]).is_ok());
    }
}
