//! Small dense linear algebra: a row-major matrix, slice-level vector kernels,
//! Gram–Schmidt orthonormalisation and a cyclic Jacobi eigensolver.
//!
//! Everything here is sized for the problems the library handles (ambient
//! dimension up to about a thousand, subspace ranks in the tens), so the
//! routines favour clarity over blocking.

use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm_sq<T: Real>(a: &[T]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub fn all_finite<T: Real>(a: &[T]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Numerically stable `log(sum(exp(values)))`. Returns `-inf` for an empty
/// slice or when every entry is `-inf`.
pub fn logsumexp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            check_dim(r, col.len())?;
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `A x`
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ v`
    pub fn matvec_t(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.rows, v.len())?;
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != T::zero() {
                axpy(vi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != T::zero() {
                    axpy(a, other.row(k), out_row);
                }
            }
        }
        Ok(out)
    }

    /// `Aᵀ A`
    pub fn gram(&self) -> Matrix<T> {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for p in 0..self.cols {
                let rp = r[p];
                if rp == T::zero() {
                    continue;
                }
                for q in p..self.cols {
                    g.data[p * self.cols + q] = g.data[p * self.cols + q] + rp * r[q];
                }
            }
        }
        for p in 0..self.cols {
            for q in 0..p {
                g.data[p * self.cols + q] = g.data[q * self.cols + p];
            }
        }
        g
    }

    pub fn scaled(&self, s: T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthonormalises `columns` with two passes of modified Gram–Schmidt.
///
/// Columns whose residual norm after projection falls below `cutoff` times
/// their original norm are dropped, so the result spans the same space with
/// exactly as many columns as its numerical rank.
pub fn orthonormalize<T: Real>(columns: &[Vec<T>], cutoff: T) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(columns.len());
    for col in columns {
        let original = norm(col);
        if original == T::zero() {
            continue;
        }
        let mut v = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let n = norm(&v);
        if n > cutoff * original {
            basis.push(scale(&v, T::one() / n));
        }
    }
    basis
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, in
/// ascending order.
pub fn symmetric_eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Vec<T>> {
    let n = m.rows();
    check_dim(n, m.cols())?;
    let mut a = m.clone();
    let eps = T::epsilon();
    for sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)] * a[(i, j)];
                total = total + v;
                if i != j {
                    off = off + v;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
        if sweep == 99 {
            return Err(Error::NumericFailure {
                iterations: 100,
                last_gap: (off / total).as_f64(),
            });
        }
    }
    unreachable!()
}

/// Spectral norm of a symmetric matrix: its largest eigenvalue magnitude.
pub fn symmetric_spectral_norm<T: Real>(m: &Matrix<T>) -> Result<T> {
    let ev = symmetric_eigenvalues(m)?;
    Ok(ev.iter().fold(T::zero(), |acc, v| acc.max(v.abs())))
}

/// `d × r` matrix with orthonormal columns drawn from the Haar measure
/// (Gram–Schmidt on an i.i.d. Gaussian matrix). Columns are filled from the
/// generator stream column by column.
pub fn random_orthonormal<T: Real>(d: usize, r: usize, rng: &mut SeededRng) -> Result<Matrix<T>> {
    if r == 0 || r > d {
        return Err(Error::invalid(format!("rank {r} must satisfy 1 <= r <= d = {d}")));
    }
    loop {
        let cols: Vec<Vec<T>> = (0..r)
            .map(|_| (0..d).map(|_| T::lit(rng.gaussian())).collect())
            .collect();
        let q = orthonormalize(&cols, T::lit(1e-6));
        if q.len() == r {
            return Matrix::from_columns(&q);
        }
    }
}
